//! Arithmetic comparisons with the integer semantics of the generated C.
//!
//! A comparison is evaluated in one of two domains. If any operand is an
//! `unsigned long` variable or a constant outside the 16-bit signed range,
//! everything is converted to unsigned 32-bit; otherwise everything is
//! 16-bit signed. Operations wrap in the chosen domain.

use crate::model::{ArithOp, CmpOp, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    I16,
    U32,
}

impl Domain {
    /// Picks the domain for operands of the given variable types and constants.
    pub fn for_operands(types: &[ValueType], constants: &[i64]) -> Domain {
        let wide_var = types.contains(&ValueType::UnsignedLong);
        let wide_const = constants
            .iter()
            .any(|c| !(i16::MIN as i64..=i16::MAX as i64).contains(c));
        if wide_var || wide_const {
            Domain::U32
        } else {
            Domain::I16
        }
    }

    /// Converts a value into this domain, as a C cast would.
    pub fn leaf(self, v: i64) -> i64 {
        match self {
            Domain::I16 => v as i16 as i64,
            Domain::U32 => v as u32 as i64,
        }
    }

    pub fn apply(self, op: ArithOp, a: i64, b: i64) -> i64 {
        match self {
            Domain::I16 => {
                let (a, b) = (a as i16, b as i16);
                (match op {
                    ArithOp::Add => a.wrapping_add(b),
                    ArithOp::Sub => a.wrapping_sub(b),
                    ArithOp::Mul => a.wrapping_mul(b),
                }) as i64
            }
            Domain::U32 => {
                let (a, b) = (a as u32, b as u32);
                (match op {
                    ArithOp::Add => a.wrapping_add(b),
                    ArithOp::Sub => a.wrapping_sub(b),
                    ArithOp::Mul => a.wrapping_mul(b),
                }) as i64
            }
        }
    }
}

/// Arithmetic expression over rule variable slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AExpr {
    Var(usize),
    Const(i64),
    Bin(ArithOp, Box<AExpr>, Box<AExpr>),
}

impl AExpr {
    pub fn eval(&self, domain: Domain, vars: &[i64]) -> i64 {
        match self {
            AExpr::Var(i) => domain.leaf(vars[*i]),
            AExpr::Const(c) => domain.leaf(*c),
            AExpr::Bin(op, l, r) => domain.apply(*op, l.eval(domain, vars), r.eval(domain, vars)),
        }
    }

    pub fn vars(&self, out: &mut Vec<usize>) {
        match self {
            AExpr::Var(i) => out.push(*i),
            AExpr::Const(_) => {}
            AExpr::Bin(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    pub fn constants(&self, out: &mut Vec<i64>) {
        match self {
            AExpr::Var(_) => {}
            AExpr::Const(c) => out.push(*c),
            AExpr::Bin(_, l, r) => {
                l.constants(out);
                r.constants(out);
            }
        }
    }
}

/// A planned comparison: both sides share one domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Check {
    pub lhs: AExpr,
    pub op: CmpOp,
    pub rhs: AExpr,
    pub domain: Domain,
}

impl Check {
    pub fn holds(&self, vars: &[i64]) -> bool {
        let a = self.lhs.eval(self.domain, vars);
        let b = self.rhs.eval(self.domain, vars);
        self.op.holds(a, b)
    }
}
