use crate::model::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `#name`: an IO predicate or a named constant.
    Hash(String),
    Int(u64),
    Decl,
    Dot,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    If,
    At,
    Bang,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    /// Raw text between a `{` and its matching `}`.
    Braced(String),
    Error(String),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Hash(s) => format!("`#{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Decl => "`.decl`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::If => "`:-`".into(),
            Tok::At => "`@`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Eq => "`==`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Braced(_) => "`{ ... }`".into(),
            Tok::Error(_) => "invalid input".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Cursor<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    i: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).map(|&(_, c)| c)
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.i).map_or(self.src.len(), |&(o, _)| o)
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !is_ident_char(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn skip_trivia(&mut self) {
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    /// Consumes a braced block starting at `{`; returns the inner text.
    fn braced(&mut self) -> Result<String, String> {
        self.bump();
        let inner_start = self.offset();
        let mut depth = 1usize;
        while let Some(c) = self.peek() {
            match c {
                '{' => {
                    depth += 1;
                    self.bump();
                }
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        let inner_end = self.offset();
                        self.bump();
                        return Ok(self.src[inner_start..inner_end].to_string());
                    }
                    self.bump();
                }
                '"' | '\'' => {
                    self.bump();
                    while let Some(d) = self.bump() {
                        if d == '\\' {
                            self.bump();
                        } else if d == c {
                            break;
                        }
                    }
                }
                '/' if self.peek_at(1) == Some('/') => {
                    while let Some(d) = self.peek() {
                        if d == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '/' if self.peek_at(1) == Some('*') => {
                    self.bump();
                    self.bump();
                    while self.peek().is_some() {
                        if self.peek() == Some('*') && self.peek_at(1) == Some('/') {
                            self.bump();
                            self.bump();
                            break;
                        }
                        self.bump();
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
        Err("unterminated `{` block".into())
    }
}

pub fn tokenize(src: &str) -> Vec<Token> {
    let mut cur = Cursor {
        src,
        chars: src.char_indices().collect(),
        i: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        cur.skip_trivia();
        let pos = cur.pos();
        let start = cur.offset();
        let Some(c) = cur.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                pos,
                start,
                end: start,
            });
            return out;
        };
        let tok = match c {
            c if is_ident_start(c) => Tok::Ident(cur.ident()),
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(d) = cur.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    digits.push(d);
                    cur.bump();
                }
                if cur.peek().is_some_and(is_ident_start) {
                    let rest = cur.ident();
                    Tok::Error(format!("malformed number `{digits}{rest}`"))
                } else {
                    match digits.parse::<u64>() {
                        Ok(n) => Tok::Int(n),
                        Err(_) => Tok::Error(format!("integer literal `{digits}` is too large")),
                    }
                }
            }
            '#' => {
                cur.bump();
                if cur.peek().is_some_and(is_ident_start) {
                    Tok::Hash(cur.ident())
                } else {
                    Tok::Error("expected a name after `#`".into())
                }
            }
            '.' => {
                cur.bump();
                let is_decl = cur.peek() == Some('d')
                    && cur.peek_at(1) == Some('e')
                    && cur.peek_at(2) == Some('c')
                    && cur.peek_at(3) == Some('l')
                    && !cur.peek_at(4).is_some_and(is_ident_char);
                if is_decl {
                    for _ in 0..4 {
                        cur.bump();
                    }
                    Tok::Decl
                } else {
                    Tok::Dot
                }
            }
            '{' => match cur.braced() {
                Ok(body) => Tok::Braced(body),
                Err(e) => Tok::Error(e),
            },
            _ => {
                cur.bump();
                let next = cur.peek();
                let mut two = |t: Tok| {
                    cur.bump();
                    t
                };
                match (c, next) {
                    (':', Some('-')) => two(Tok::If),
                    ('=', Some('=')) => two(Tok::Eq),
                    ('!', Some('=')) => two(Tok::Ne),
                    ('<', Some('=')) => two(Tok::Le),
                    ('>', Some('=')) => two(Tok::Ge),
                    (':', _) => Tok::Colon,
                    ('=', _) => Tok::Assign,
                    ('!', _) => Tok::Bang,
                    ('<', _) => Tok::Lt,
                    ('>', _) => Tok::Gt,
                    (',', _) => Tok::Comma,
                    ('(', _) => Tok::LParen,
                    (')', _) => Tok::RParen,
                    ('[', _) => Tok::LBracket,
                    (']', _) => Tok::RBracket,
                    ('@', _) => Tok::At,
                    ('+', _) => Tok::Plus,
                    ('-', _) => Tok::Minus,
                    ('*', _) => Tok::Star,
                    ('}', _) => Tok::Error("unmatched `}`".into()),
                    _ => Tok::Error(format!("unexpected character `{c}`")),
                }
            }
        };
        out.push(Token {
            tok,
            pos,
            start,
            end: cur.offset(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn decl_keyword_vs_dot() {
        assert_eq!(
            toks("setup@0.\n.decl p"),
            vec![
                Tok::Ident("setup".into()),
                Tok::At,
                Tok::Int(0),
                Tok::Dot,
                Tok::Decl,
                Tok::Ident("p".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks(".declx")[0], Tok::Dot);
    }

    #[test]
    fn operators() {
        assert_eq!(
            toks(":- <= >= == != ! < > = :"),
            vec![
                Tok::If,
                Tok::Le,
                Tok::Ge,
                Tok::Eq,
                Tok::Ne,
                Tok::Bang,
                Tok::Lt,
                Tok::Gt,
                Tok::Assign,
                Tok::Colon,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn braced_body_is_verbatim_and_nests() {
        let t = toks("{int Val = digitalRead(#P); if (x) { y(\"}\"); }}");
        assert_eq!(
            t[0],
            Tok::Braced("int Val = digitalRead(#P); if (x) { y(\"}\"); }".into())
        );
        assert!(matches!(toks("{ oops")[0], Tok::Error(_)));
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("p.\n  q");
        assert_eq!(t[0].pos, Pos::new(1, 1));
        assert_eq!(t[2].pos, Pos::new(2, 3));
    }

    #[test]
    fn comments_skipped() {
        assert_eq!(toks("// hi\np // there"), vec![Tok::Ident("p".into()), Tok::Eof]);
    }
}
