//! Canonical concrete syntax for the AST.
//!
//! Printing then re-parsing yields the same program up to source positions.

use std::fmt::{self, Display, Formatter};

use crate::model::*;

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(v) => f.write_str(v),
            Term::Integer(n) => write!(f, "{n}"),
            Term::Named(n) => write!(f, "#{n}"),
        }
    }
}

fn write_args(f: &mut Formatter<'_>, args: &[impl Display]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        if self.is_io {
            f.write_str("#")?;
        }
        f.write_str(&self.predicate)?;
        if self.is_io && self.args.is_empty() {
            // `#name` alone in a body would read as a named constant.
            return f.write_str("()");
        }
        write_args(f, &self.args)
    }
}

fn write_expr(f: &mut Formatter<'_>, e: &Expr, parent: u8, right: bool) -> fmt::Result {
    match e {
        Expr::Term(t) => write!(f, "{t}"),
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let paren = p < parent || (right && p == parent);
            if paren {
                f.write_str("(")?;
            }
            write_expr(f, l, p, false)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, r, p, true)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0, false)
    }
}

impl Display for Comparison {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

impl Display for BodyItem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Literal(l) => write!(f, "{l}"),
            BodyItem::Comparison(c) => write!(f, "{c}"),
        }
    }
}

impl Display for MacroCall {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.arg {
            Some(a) => write!(f, "[{}:{}]", self.name, a),
            None => write!(f, "[{}]", self.name),
        }
    }
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for m in &self.macros {
            write!(f, "{m}")?;
        }
        write!(f, "{}", self.head)?;
        if self.head_next {
            f.write_str("@next")?;
        }
        for (i, item) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            write!(f, "{item}")?;
        }
        f.write_str(".")
    }
}

impl Display for Fact {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        write_args(f, &self.args)?;
        f.write_str("@0.")
    }
}

impl Display for Declaration {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, ".decl {}", self.name)?;
        write_args(f, &self.arg_types)
    }
}

impl Display for IoDefinition {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.name)?;
        let names: Vec<&str> = self.params.iter().map(|p| p.name.as_str()).collect();
        write_args(f, &names)?;
        write!(f, " = {{{}}}", self.body)
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let sections: [Vec<String>; 4] = [
            self.declarations.iter().map(ToString::to_string).collect(),
            self.io_definitions.iter().map(ToString::to_string).collect(),
            self.facts.iter().map(ToString::to_string).collect(),
            self.rules.iter().map(ToString::to_string).collect(),
        ];
        let mut first = true;
        for s in sections.into_iter().filter(|s| !s.is_empty()) {
            if !first {
                writeln!(f)?;
            }
            first = false;
            for line in s {
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}
