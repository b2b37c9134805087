//! Program AST, value types and fact-size arithmetic.
//!
//! The time suffix of every predicate never appears in the tree: it is
//! carried by [`Rule::head_next`] (successor timestamp) and by the fact
//! form `p(..)@0`, which is the only timestamped fact the language allows.

use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Argument types a predicate may be declared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    /// Unsigned, one byte.
    Byte,
    /// Signed, two bytes (stored sign-magnitude).
    Int,
    /// Unsigned, four bytes.
    UnsignedLong,
}

impl ValueType {
    pub const ALL: [ValueType; 3] = [ValueType::Byte, ValueType::Int, ValueType::UnsignedLong];

    pub fn width(self) -> usize {
        value_width(self)
    }

    /// Smallest and largest value storable in a fact slot of this type.
    pub fn range(self) -> (i64, i64) {
        match self {
            ValueType::Byte => (0, 255),
            // -32768 has no sign-magnitude encoding.
            ValueType::Int => (-32767, 32767),
            ValueType::UnsignedLong => (0, u32::MAX as i64),
        }
    }

    pub fn can_store(self, v: i64) -> bool {
        let (lo, hi) = self.range();
        (lo..=hi).contains(&v)
    }

    /// C conversion of an arbitrary integer into a variable of this type.
    pub fn wrap(self, v: i64) -> i64 {
        match self {
            ValueType::Byte => v as u8 as i64,
            ValueType::Int => v as i16 as i64,
            ValueType::UnsignedLong => v as u32 as i64,
        }
    }

    pub fn is_signed(self) -> bool {
        matches!(self, ValueType::Int)
    }

    /// Source spelling in `.decl`.
    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Byte => "byte",
            ValueType::Int => "int",
            ValueType::UnsignedLong => "unsigned long",
        }
    }

    /// Fixed-width C type used by generated code.
    pub fn c_type(self) -> &'static str {
        match self {
            ValueType::Byte => "uint8_t",
            ValueType::Int => "int16_t",
            ValueType::UnsignedLong => "uint32_t",
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Bytes occupied by one argument of type `t`.
pub fn value_width(t: ValueType) -> usize {
    match t {
        ValueType::Byte => 1,
        ValueType::Int => 2,
        ValueType::UnsignedLong => 4,
    }
}

/// Bytes occupied by one fact of the declared predicate: tag byte plus arguments.
pub fn fact_size(d: &Declaration) -> usize {
    1 + d.arg_types.iter().map(|t| value_width(*t)).sum::<usize>()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub name: String,
    pub arg_types: Vec<ValueType>,
    pub pos: Pos,
}

impl Declaration {
    pub fn new(name: impl Into<String>, arg_types: Vec<ValueType>) -> Self {
        Declaration {
            name: name.into(),
            arg_types,
            pos: Pos::default(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Variable(String),
    Integer(i64),
    /// `#NAME` in source; resolved through the constant table or emitted verbatim.
    Named(String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Variable(name.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
    pub negated: bool,
    pub is_io: bool,
    pub pos: Pos,
}

impl Literal {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal {
            predicate: predicate.into(),
            args,
            negated: false,
            is_io: false,
            pos: Pos::default(),
        }
    }

    pub fn io(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal {
            is_io: true,
            ..Literal::new(predicate, args)
        }
    }

    pub fn negate(mut self) -> Self {
        self.negated = true;
        self
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Term(Term),
    Binary(ArithOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: ArithOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Term(Term::Variable(v)) => out.push(v),
            Expr::Term(_) => {}
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

impl From<Term> for Expr {
    fn from(t: Term) -> Self {
        Expr::Term(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
    pub pos: Pos,
}

impl Comparison {
    pub fn new(lhs: Expr, op: CmpOp, rhs: Expr) -> Self {
        Comparison {
            lhs,
            op,
            rhs,
            pos: Pos::default(),
        }
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut v = self.lhs.variables();
        v.extend(self.rhs.variables());
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyItem {
    Literal(Literal),
    Comparison(Comparison),
}

impl BodyItem {
    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            BodyItem::Literal(l) => Some(l),
            BodyItem::Comparison(_) => None,
        }
    }

    pub fn pos(&self) -> Pos {
        match self {
            BodyItem::Literal(l) => l.pos,
            BodyItem::Comparison(c) => c.pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Deductive,
    Inductive,
    Output,
    Input,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Deductive => "deductive",
            RuleKind::Inductive => "inductive",
            RuleKind::Output => "output",
            RuleKind::Input => "input",
        })
    }
}

/// A `[name]` or `[name:arg]` prefix awaiting expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroCall {
    pub name: String,
    pub arg: Option<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Literal,
    pub head_next: bool,
    pub body: Vec<BodyItem>,
    pub kind: Option<RuleKind>,
    pub source_index: usize,
    pub macros: Vec<MacroCall>,
    /// Set for rules produced by macro expansion.
    pub generated: bool,
    pub pos: Pos,
}

impl Rule {
    pub fn new(head: Literal, body: Vec<BodyItem>) -> Self {
        Rule {
            head,
            head_next: false,
            body,
            kind: None,
            source_index: 0,
            macros: Vec::new(),
            generated: false,
            pos: Pos::default(),
        }
    }

    pub fn next(mut self) -> Self {
        self.head_next = true;
        self
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(BodyItem::as_literal)
    }

    pub fn io_literals(&self) -> impl Iterator<Item = &Literal> {
        std::iter::once(&self.head)
            .chain(self.literals())
            .filter(|l| l.is_io)
    }

    /// Every variable name in the rule, first-occurrence order, head first.
    pub fn variable_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |v: &str| {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        };
        self.head.variables().for_each(&mut push);
        for item in &self.body {
            match item {
                BodyItem::Literal(l) => l.variables().for_each(&mut push),
                BodyItem::Comparison(c) => c.variables().into_iter().for_each(&mut push),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub predicate: String,
    pub args: Vec<i64>,
    pub pos: Pos,
}

impl Fact {
    pub fn new(predicate: impl Into<String>, args: Vec<i64>) -> Self {
        Fact {
            predicate: predicate.into(),
            args,
            pos: Pos::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamMode {
    /// Value flows into the target code (`#Param` occurs in the body).
    Read,
    /// The body declares the parameter and produces its value.
    Set,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoParam {
    pub name: String,
    pub mode: ParamMode,
    /// Declared C type of a Set parameter.
    pub set_type: Option<ValueType>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoDefinition {
    /// Name without the leading `#`.
    pub name: String,
    pub params: Vec<IoParam>,
    /// Verbatim target code between the outer braces.
    pub body: String,
    pub pos: Pos,
}

impl IoDefinition {
    pub fn param(&self, name: &str) -> Option<&IoParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub declarations: Vec<Declaration>,
    pub io_definitions: Vec<IoDefinition>,
    pub facts: Vec<Fact>,
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn declaration(&self, name: &str) -> Option<&Declaration> {
        self.declarations.iter().find(|d| d.name == name)
    }

    pub fn io_definition(&self, name: &str) -> Option<&IoDefinition> {
        self.io_definitions.iter().find(|d| d.name == name)
    }

    /// Macro prefixes still attached to rules; empty after expansion.
    pub fn pending_macros(&self) -> impl Iterator<Item = (&Rule, &MacroCall)> {
        self.rules
            .iter()
            .flat_map(|r| r.macros.iter().map(move |m| (r, m)))
    }

    pub fn is_empty(&self) -> bool {
        self.declarations.is_empty()
            && self.io_definitions.is_empty()
            && self.facts.is_empty()
            && self.rules.is_empty()
    }

    pub fn renumber_rules(&mut self) {
        for (i, r) in self.rules.iter_mut().enumerate() {
            r.source_index = i;
        }
    }

    /// Copy with positions, analysis results and generated flags cleared,
    /// leaving only what the concrete syntax determines.
    pub fn normalized(&self) -> Program {
        let mut p = self.clone();
        for d in &mut p.declarations {
            d.pos = Pos::default();
        }
        for d in &mut p.io_definitions {
            d.pos = Pos::default();
        }
        for f in &mut p.facts {
            f.pos = Pos::default();
        }
        for r in &mut p.rules {
            normalize_rule(r);
        }
        p
    }
}

pub(crate) fn normalize_rule(r: &mut Rule) {
    r.pos = Pos::default();
    r.kind = None;
    r.generated = false;
    r.head.pos = Pos::default();
    for m in &mut r.macros {
        m.pos = Pos::default();
    }
    for item in &mut r.body {
        match item {
            BodyItem::Literal(l) => l.pos = Pos::default(),
            BodyItem::Comparison(c) => c.pos = Pos::default(),
        }
    }
}

/// Syntactic identity of two rules, ignoring positions and the generated flag.
pub fn same_rule(a: &Rule, b: &Rule) -> bool {
    let (mut a, mut b) = (a.clone(), b.clone());
    normalize_rule(&mut a);
    normalize_rule(&mut b);
    a.source_index = 0;
    b.source_index = 0;
    a == b
}
