//! Recursive-descent parser for the dialect.
//!
//! Statements are `.decl` lines, IO predicate definitions
//! (`#name(P, ...) = { C code }`), timestamp-0 facts (`p(5)@0.`) and rules,
//! optionally prefixed by macro calls such as `[setup]` or `[delay:1000]`.
//! On a syntax error the parser records a diagnostic, skips to the end of
//! the statement and keeps going, so one run reports every broken statement.

mod lexer;

use std::collections::HashSet;

use regex::Regex;

use crate::diag::{Diagnostic, Diagnostics};
use crate::model::*;

pub use lexer::{tokenize, Tok, Token};

type PResult<T> = Result<T, Diagnostic>;

/// Parses a complete source file.
pub fn parse_program(source: &str) -> Result<Program, Diagnostics> {
    let mut p = Parser {
        src: source,
        toks: tokenize(source),
        i: 0,
        diags: Vec::new(),
        program: Program::default(),
    };
    p.run();
    p.program.renumber_rules();
    if p.diags.is_empty() {
        Ok(p.program)
    } else {
        Err(Diagnostics(p.diags))
    }
}

/// Parses a single `#name(args) = { body }` definition.
pub fn parse_io_definition(line: &str) -> Result<IoDefinition, Diagnostics> {
    let program = parse_program(line)?;
    let n_other = program.declarations.len() + program.facts.len() + program.rules.len();
    match (program.io_definitions.len(), n_other) {
        (1, 0) => Ok(program.io_definitions.into_iter().next().unwrap()),
        _ => Err(Diagnostics::single(Diagnostic::error(
            Pos::new(1, 1),
            "expected exactly one IO predicate definition",
        ))),
    }
}

pub(crate) fn is_variable_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    i: usize,
    diags: Vec<Diagnostic>,
    program: Program,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        let tok = self.peek();
        let msg = match tok {
            Tok::Error(e) => e.clone(),
            _ => format!("expected {what}, found {}", tok.describe()),
        };
        Diagnostic::error(self.pos(), msg)
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<Token> {
        if self.peek() == t {
            Ok(self.bump())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn run(&mut self) {
        while *self.peek() != Tok::Eof {
            let start = self.i;
            if let Err(d) = self.statement() {
                self.diags.push(d);
                self.recover(start);
            }
        }
    }

    /// Skips past the end of the broken statement.
    fn recover(&mut self, start: usize) {
        if self.i == start {
            self.bump();
        }
        loop {
            match self.peek() {
                Tok::Eof | Tok::Decl => return,
                Tok::Dot => {
                    self.bump();
                    return;
                }
                Tok::Braced(_) => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn statement(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Decl => self.declaration(),
            Tok::LBracket | Tok::Ident(_) | Tok::Hash(_) => self.clause(),
            _ => Err(self.unexpected("a declaration, fact or rule")),
        }
    }

    fn declaration(&mut self) -> PResult<()> {
        let pos = self.bump().pos;
        let name = match self.peek().clone() {
            Tok::Ident(n) if !is_variable_name(&n) => {
                self.bump();
                n
            }
            _ => return Err(self.unexpected("a lowercase predicate name")),
        };
        let mut arg_types = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                arg_types.push(self.value_type()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma, "`,` or `)`")?;
            }
        }
        // The terminating dot is optional for declarations.
        self.eat(&Tok::Dot);
        self.program.declarations.push(Declaration {
            name,
            arg_types,
            pos,
        });
        Ok(())
    }

    fn value_type(&mut self) -> PResult<ValueType> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(w) if w == "byte" => {
                self.bump();
                Ok(ValueType::Byte)
            }
            Tok::Ident(w) if w == "int" => {
                self.bump();
                Ok(ValueType::Int)
            }
            Tok::Ident(w) if w == "unsigned" => {
                self.bump();
                match self.peek() {
                    Tok::Ident(l) if l == "long" => {
                        self.bump();
                        Ok(ValueType::UnsignedLong)
                    }
                    _ => Err(Diagnostic::error(
                        pos,
                        "unknown type `unsigned` (expected byte, int or unsigned long)",
                    )),
                }
            }
            Tok::Ident(w) => Err(Diagnostic::error(
                pos,
                format!("unknown type `{w}` (expected byte, int or unsigned long)"),
            )),
            _ => Err(self.unexpected("an argument type")),
        }
    }

    fn macro_prefixes(&mut self) -> PResult<Vec<MacroCall>> {
        let mut out = Vec::new();
        while *self.peek() == Tok::LBracket {
            let pos = self.bump().pos;
            let name = match self.peek().clone() {
                Tok::Ident(n) => {
                    self.bump();
                    n
                }
                _ => return Err(self.unexpected("a macro name")),
            };
            let mut arg = None;
            // `[delay:-3]` lexes its colon as part of `:-`.
            if matches!(self.peek(), Tok::Colon | Tok::If) {
                let start = self.toks[self.i].start + 1;
                self.bump();
                while !matches!(self.peek(), Tok::RBracket | Tok::Eof) {
                    self.bump();
                }
                let end = self.toks[self.i].start;
                arg = Some(self.src[start..end].trim().to_string());
            }
            self.expect(&Tok::RBracket, "`]`")?;
            out.push(MacroCall { name, arg, pos });
        }
        Ok(out)
    }

    fn clause(&mut self) -> PResult<()> {
        let pos = self.pos();
        let macros = self.macro_prefixes()?;
        let head = self.literal(false)?;

        if *self.peek() == Tok::Assign && head.is_io {
            if !macros.is_empty() {
                return Err(Diagnostic::error(pos, "macros cannot prefix an IO definition"));
            }
            return self.io_definition(head);
        }

        let mut head_next = false;
        let mut fact_stamp = false;
        if self.eat(&Tok::At) {
            let at = self.pos();
            match self.peek().clone() {
                Tok::Ident(w) if w == "next" => {
                    self.bump();
                    head_next = true;
                }
                Tok::Int(0) => {
                    self.bump();
                    fact_stamp = true;
                }
                Tok::Int(_) => {
                    return Err(Diagnostic::error(at, "facts allowed at timestamp 0 only"));
                }
                _ => return Err(self.unexpected("`next` or `0` after `@`")),
            }
        }

        if fact_stamp {
            if *self.peek() == Tok::If {
                return Err(Diagnostic::error(
                    self.pos(),
                    "the @0 suffix is only allowed on facts",
                ));
            }
            self.expect(&Tok::Dot, "`.`")?;
            if !macros.is_empty() {
                return Err(Diagnostic::error(pos, "macros cannot prefix a fact"));
            }
            let fact = self.fact_from(head, pos)?;
            self.program.facts.push(fact);
            return Ok(());
        }

        let mut body = Vec::new();
        if self.eat(&Tok::If) {
            loop {
                body.push(self.body_item()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::Dot, "`.`")?;
        let mut rule = Rule::new(head, body);
        rule.head_next = head_next;
        rule.macros = macros;
        rule.pos = pos;
        self.program.rules.push(rule);
        Ok(())
    }

    fn fact_from(&self, head: Literal, pos: Pos) -> PResult<Fact> {
        if head.is_io {
            return Err(Diagnostic::error(pos, "IO predicates cannot have facts"));
        }
        let mut args = Vec::with_capacity(head.args.len());
        for a in &head.args {
            match a {
                Term::Integer(n) => args.push(*n),
                Term::Variable(v) => {
                    return Err(Diagnostic::error(
                        pos,
                        format!("facts must be ground, found variable `{v}`"),
                    ))
                }
                Term::Named(c) => {
                    return Err(Diagnostic::error(
                        pos,
                        format!("fact arguments must be integer constants, found `#{c}`"),
                    ))
                }
            }
        }
        Ok(Fact {
            predicate: head.predicate,
            args,
            pos,
        })
    }

    fn io_definition(&mut self, head: Literal) -> PResult<()> {
        let pos = head.pos;
        self.bump(); // `=`
        let body = match self.peek().clone() {
            Tok::Braced(b) => {
                self.bump();
                b
            }
            _ => return Err(self.unexpected("`{` starting the definition body")),
        };
        let mut names = Vec::new();
        for a in &head.args {
            match a {
                Term::Variable(v) if !names.contains(v) => names.push(v.clone()),
                Term::Variable(v) => {
                    return Err(Diagnostic::error(pos, format!("duplicate parameter `{v}`")))
                }
                _ => {
                    return Err(Diagnostic::error(
                        pos,
                        "IO definition parameters must be variables",
                    ))
                }
            }
        }
        if self.program.io_definition(&head.predicate).is_some() {
            return Err(Diagnostic::error(
                pos,
                format!("duplicate definition of IO predicate `#{}`", head.predicate),
            ));
        }
        let params = classify_params(&head.predicate, &names, &body)
            .map_err(|m| Diagnostic::error(pos, m))?;
        self.program.io_definitions.push(IoDefinition {
            name: head.predicate,
            params,
            body,
            pos,
        });
        Ok(())
    }

    fn literal(&mut self, negated: bool) -> PResult<Literal> {
        let pos = self.pos();
        let (predicate, is_io) = match self.peek().clone() {
            Tok::Ident(n) if !is_variable_name(&n) => (n, false),
            Tok::Hash(n) => (n, true),
            Tok::Ident(n) => {
                return Err(Diagnostic::error(
                    pos,
                    format!("predicate names start lowercase, found `{n}`"),
                ))
            }
            _ => return Err(self.unexpected("a predicate")),
        };
        self.bump();
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                args.push(self.term()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma, "`,` or `)`")?;
            }
        }
        Ok(Literal {
            predicate,
            args,
            negated,
            is_io,
            pos,
        })
    }

    fn integer(&mut self, negative: bool) -> PResult<i64> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                let v = i64::try_from(n)
                    .map_err(|_| Diagnostic::error(pos, "integer literal out of range"))?;
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(n) if is_variable_name(&n) => {
                self.bump();
                Ok(Term::Variable(n))
            }
            Tok::Ident(n) => Err(Diagnostic::error(
                pos,
                format!("expected a variable, integer or #CONSTANT, found `{n}`"),
            )),
            Tok::Int(_) => Ok(Term::Integer(self.integer(false)?)),
            Tok::Minus => {
                self.bump();
                Ok(Term::Integer(self.integer(true)?))
            }
            Tok::Hash(n) => {
                self.bump();
                Ok(Term::Named(n))
            }
            _ => Err(self.unexpected("an argument")),
        }
    }

    fn body_item(&mut self) -> PResult<BodyItem> {
        match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tok::Bang, _) => {
                self.bump();
                Ok(BodyItem::Literal(self.literal(true)?))
            }
            (Tok::Ident(n), _) if !is_variable_name(&n) => {
                Ok(BodyItem::Literal(self.literal(false)?))
            }
            (Tok::Hash(_), Tok::LParen) => Ok(BodyItem::Literal(self.literal(false)?)),
            _ => Ok(BodyItem::Comparison(self.comparison()?)),
        }
    }

    fn comparison(&mut self) -> PResult<Comparison> {
        let pos = self.pos();
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Comparison { lhs, op, rhs, pos })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        while self.eat(&Tok::Star) {
            let rhs = self.factor()?;
            lhs = Expr::binary(ArithOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Minus => {
                self.bump();
                if matches!(self.peek(), Tok::Int(_)) {
                    Ok(Expr::Term(Term::Integer(self.integer(true)?)))
                } else {
                    Err(Diagnostic::error(
                        pos,
                        "unary minus only applies to integer constants",
                    ))
                }
            }
            Tok::Ident(n) if !is_variable_name(&n) => Err(Diagnostic::error(
                pos,
                format!("expected a variable or constant in arithmetic, found `{n}`"),
            )),
            _ => Ok(Expr::Term(self.term()?)),
        }
    }
}

/// Splits IO parameters into Read and Set according to how the body uses them.
pub(crate) fn classify_params(
    io_name: &str,
    names: &[String],
    body: &str,
) -> Result<Vec<IoParam>, String> {
    let mut seen = HashSet::new();
    let mut params = Vec::with_capacity(names.len());
    for name in names {
        if !seen.insert(name) {
            return Err(format!("duplicate parameter `{name}`"));
        }
        let n = regex::escape(name);
        let read = Regex::new(&format!(r"#{n}(?:[^A-Za-z0-9_]|$)")).unwrap();
        let set = Regex::new(&format!(
            r"(?:^|[;{{}}])\s*((?:[A-Za-z_][A-Za-z0-9_]*\s+)+){n}\s*=(?:[^=]|$)"
        ))
        .unwrap();
        let is_read = read.is_match(body);
        let set_decl = set.captures(body).map(|c| c[1].to_string());
        match (is_read, set_decl) {
            (true, Some(_)) => {
                return Err(format!(
                    "parameter `{name}` of `#{io_name}` is both read and set in the definition"
                ))
            }
            (false, None) => {
                return Err(format!(
                    "parameter `{name}` of `#{io_name}` is neither read nor set in the definition"
                ))
            }
            (true, None) => params.push(IoParam {
                name: name.clone(),
                mode: ParamMode::Read,
                set_type: None,
            }),
            (false, Some(words)) => {
                let ty = c_type_words(&words).ok_or_else(|| {
                    format!(
                        "unsupported type `{}` for set parameter `{name}` of `#{io_name}`",
                        words.trim()
                    )
                })?;
                params.push(IoParam {
                    name: name.clone(),
                    mode: ParamMode::Set,
                    set_type: Some(ty),
                });
            }
        }
    }
    Ok(params)
}

fn c_type_words(words: &str) -> Option<ValueType> {
    let w: Vec<&str> = words
        .split_whitespace()
        .filter(|w| !matches!(*w, "const" | "volatile" | "register"))
        .collect();
    match w.join(" ").as_str() {
        "int" | "int16_t" | "short" | "short int" | "signed int" => Some(ValueType::Int),
        "byte" | "uint8_t" | "unsigned char" | "bool" | "boolean" => Some(ValueType::Byte),
        "unsigned long" | "unsigned long int" | "uint32_t" => Some(ValueType::UnsignedLong),
        _ => None,
    }
}
