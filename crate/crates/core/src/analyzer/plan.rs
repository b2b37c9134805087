//! Per-rule evaluation plans shared by the simulator and the code generator.
//!
//! A plan lists the body in order as nested scans, absence probes,
//! comparisons and at most one IO call, with every variable resolved to a
//! numbered slot of fixed type.

use std::collections::HashMap;

use crate::arith::{AExpr, Check, Domain};
use crate::diag::Diagnostic;
use crate::model::*;
use crate::stdlib;

use super::layout::{pattern_string, CompileLayout};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Var(usize),
    Const(i64),
    /// `#NAME` with its known value; C code spells it by name.
    Named(String, i64),
}

impl Operand {
    pub fn value(&self, vars: &[i64]) -> i64 {
        match self {
            Operand::Var(i) => vars[*i],
            Operand::Const(c) | Operand::Named(_, c) => *c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanArg {
    /// Compared by the finder.
    Bound(Operand),
    /// Binds a fresh variable from the found fact.
    Bind(usize),
    /// Second occurrence of a variable bound earlier in the same literal.
    Same(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IoArg {
    Read(Operand),
    /// A `#NAME` constant unknown to the compiler, passed through to C.
    Verbatim(String),
    Set(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Scan {
        pred: usize,
        pattern: String,
        args: Vec<ScanArg>,
        /// Cursor variable in the generated C.
        cursor: String,
    },
    /// Negated literal: continue only if no such fact exists.
    Absent { pred: usize, args: Vec<Operand> },
    Check(Check),
    Io { io: usize, args: Vec<IoArg> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeadPlan {
    Insert {
        pred: usize,
        next: bool,
        args: Vec<Operand>,
    },
    Io {
        io: usize,
        args: Vec<IoArg>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub ty: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulePlan {
    pub kind: RuleKind,
    pub steps: Vec<Step>,
    pub head: HeadPlan,
    pub vars: Vec<VarInfo>,
}

pub(crate) struct Planner<'a> {
    pub layout: &'a mut CompileLayout,
    pub io_defs: &'a [IoDefinition],
}

struct RuleCtx {
    vars: Vec<VarInfo>,
    by_name: HashMap<String, usize>,
    cursors: HashMap<String, usize>,
    errors: Vec<Diagnostic>,
}

impl RuleCtx {
    fn lookup(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    fn bind(&mut self, name: &str, ty: ValueType) -> usize {
        let i = self.vars.len();
        self.vars.push(VarInfo {
            name: name.to_string(),
            ty,
        });
        self.by_name.insert(name.to_string(), i);
        i
    }

    fn err(&mut self, pos: Pos, msg: impl Into<String>) {
        self.errors.push(Diagnostic::error(pos, msg));
    }

    /// A bound variable or constant placed in a slot of type `ty`.
    fn slot_operand(&mut self, t: &Term, ty: ValueType, what: &str, pos: Pos) -> Option<Operand> {
        match t {
            Term::Variable(v) => match self.lookup(v) {
                Some(i) => {
                    let vt = self.vars[i].ty;
                    if vt != ty {
                        self.err(
                            pos,
                            format!("variable `{v}` has type {vt} but {what} expects {ty}"),
                        );
                    }
                    Some(Operand::Var(i))
                }
                None => {
                    self.err(
                        pos,
                        format!("variable `{v}` in {what} is not bound by an earlier positive literal"),
                    );
                    None
                }
            },
            Term::Integer(n) => {
                if !ty.can_store(*n) {
                    self.err(pos, format!("constant {n} does not fit {ty} in {what}"));
                }
                Some(Operand::Const(*n))
            }
            Term::Named(c) => match stdlib::constant(c) {
                Some(v) => {
                    if !ty.can_store(v) {
                        self.err(pos, format!("constant #{c} = {v} does not fit {ty} in {what}"));
                    }
                    Some(Operand::Named(c.clone(), v))
                }
                None => {
                    self.err(pos, format!("unknown constant `#{c}`"));
                    None
                }
            },
        }
    }

    fn expr(&mut self, e: &Expr, pos: Pos) -> Option<AExpr> {
        Some(match e {
            Expr::Term(Term::Variable(v)) => match self.lookup(v) {
                Some(i) => AExpr::Var(i),
                None => {
                    self.err(
                        pos,
                        format!("variable `{v}` in comparison is not bound by an earlier positive literal"),
                    );
                    return None;
                }
            },
            Expr::Term(Term::Integer(n)) => AExpr::Const(*n),
            Expr::Term(Term::Named(c)) => match stdlib::constant(c) {
                Some(v) => AExpr::Const(v),
                None => {
                    self.err(pos, format!("unknown constant `#{c}`"));
                    return None;
                }
            },
            Expr::Binary(op, l, r) => {
                let l = self.expr(l, pos);
                let r = self.expr(r, pos);
                AExpr::Bin(*op, Box::new(l?), Box::new(r?))
            }
        })
    }

    fn check(&mut self, c: &Comparison) -> Option<Check> {
        let lhs = self.expr(&c.lhs, c.pos);
        let rhs = self.expr(&c.rhs, c.pos);
        let (lhs, rhs) = (lhs?, rhs?);
        let mut vars = Vec::new();
        lhs.vars(&mut vars);
        rhs.vars(&mut vars);
        let mut consts = Vec::new();
        lhs.constants(&mut consts);
        rhs.constants(&mut consts);
        if let Some(bad) = consts.iter().find(|&&k| k > u32::MAX as i64 || k < i32::MIN as i64) {
            self.err(c.pos, format!("constant {bad} is outside the 32-bit range"));
        }
        let types: Vec<ValueType> = vars.iter().map(|&i| self.vars[i].ty).collect();
        Some(Check {
            lhs,
            op: c.op,
            rhs,
            domain: Domain::for_operands(&types, &consts),
        })
    }

    fn io_read(&mut self, t: &Term, io: &str, param: &str, pos: Pos) -> Option<IoArg> {
        match t {
            Term::Variable(v) => match self.lookup(v) {
                Some(i) => Some(IoArg::Read(Operand::Var(i))),
                None => {
                    self.err(
                        pos,
                        format!(
                            "argument `{v}` of `#{io}` must be bound, because parameter `{param}` is read by the definition"
                        ),
                    );
                    None
                }
            },
            Term::Integer(n) => Some(IoArg::Read(Operand::Const(*n))),
            Term::Named(c) => Some(match stdlib::constant(c) {
                Some(v) => IoArg::Read(Operand::Named(c.clone(), v)),
                None => IoArg::Verbatim(c.clone()),
            }),
        }
    }

    fn cursor(&mut self, pred: &str) -> String {
        let k = self.cursors.entry(pred.to_string()).or_insert(0);
        *k += 1;
        format!("{pred}{k}")
    }
}

impl Planner<'_> {
    fn io_index(&self, name: &str) -> Option<usize> {
        self.io_defs.iter().position(|d| d.name == name)
    }

    /// Builds the plan of a classified rule whose IO bindings are already rewritten.
    pub fn plan(&mut self, r: &Rule) -> Result<RulePlan, Vec<Diagnostic>> {
        let kind = r.kind.expect("rule classified before planning");
        let mut cx = RuleCtx {
            vars: Vec::new(),
            by_name: HashMap::new(),
            cursors: HashMap::new(),
            errors: Vec::new(),
        };
        let mut steps = Vec::new();

        for item in &r.body {
            match item {
                BodyItem::Comparison(c) => {
                    if let Some(chk) = cx.check(c) {
                        steps.push(Step::Check(chk));
                    }
                }
                BodyItem::Literal(l) if l.is_io => {
                    let Some(io) = self.io_index(&l.predicate) else {
                        cx.err(l.pos, format!("undefined IO predicate `#{}`", l.predicate));
                        continue;
                    };
                    let def = &self.io_defs[io];
                    if def.arity() != l.args.len() {
                        cx.err(
                            l.pos,
                            format!(
                                "`#{}` takes {} arguments, found {}",
                                def.name,
                                def.arity(),
                                l.args.len()
                            ),
                        );
                        continue;
                    }
                    let mut args = Vec::new();
                    for (t, p) in l.args.iter().zip(&def.params) {
                        match p.mode {
                            ParamMode::Read => {
                                args.extend(cx.io_read(t, &def.name, &p.name, l.pos));
                            }
                            ParamMode::Set => {
                                let ty = p.set_type.expect("set parameters carry a type");
                                match t {
                                    Term::Variable(v) if cx.lookup(v).is_none() => {
                                        args.push(IoArg::Set(cx.bind(v, ty)));
                                    }
                                    _ => cx.err(
                                        l.pos,
                                        format!("argument `{t}` of `#{}` must be a fresh variable", def.name),
                                    ),
                                }
                            }
                        }
                    }
                    steps.push(Step::Io { io, args });
                }
                BodyItem::Literal(l) => {
                    let Some(pred) = self.layout.index_of(&l.predicate) else {
                        cx.err(l.pos, format!("undeclared predicate `{}`", l.predicate));
                        continue;
                    };
                    let info = self.layout.predicates[pred].clone();
                    if info.arity() != l.args.len() {
                        cx.err(
                            l.pos,
                            format!(
                                "`{}` is declared with {} arguments, found {}",
                                info.name,
                                info.arity(),
                                l.args.len()
                            ),
                        );
                        continue;
                    }
                    let what = format!("argument of `{}`", info.name);
                    if l.negated {
                        let args: Vec<Operand> = l
                            .args
                            .iter()
                            .zip(&info.arg_types)
                            .filter_map(|(t, ty)| cx.slot_operand(t, *ty, &what, l.pos))
                            .collect();
                        if args.len() == info.arity() {
                            steps.push(Step::Absent { pred, args });
                        }
                        continue;
                    }
                    let mut args = Vec::new();
                    let mut bound_here: Vec<&str> = Vec::new();
                    for (t, ty) in l.args.iter().zip(&info.arg_types) {
                        let arg = match t {
                            Term::Variable(v) if bound_here.contains(&v.as_str()) => {
                                ScanArg::Same(cx.lookup(v).unwrap())
                            }
                            Term::Variable(v) if cx.lookup(v).is_none() => {
                                bound_here.push(v);
                                ScanArg::Bind(cx.bind(v, *ty))
                            }
                            _ => match cx.slot_operand(t, *ty, &what, l.pos) {
                                Some(op) => ScanArg::Bound(op),
                                None => continue,
                            },
                        };
                        args.push(arg);
                    }
                    if args.len() != info.arity() {
                        continue;
                    }
                    let pattern = pattern_string(info.arity(), |i| matches!(args[i], ScanArg::Bound(_)));
                    self.layout.register_pattern(pred, pattern.clone());
                    let cursor = cx.cursor(&info.name);
                    steps.push(Step::Scan {
                        pred,
                        pattern,
                        args,
                        cursor,
                    });
                }
            }
        }

        let head = self.plan_head(r, &mut cx);
        match head {
            Some(head) if cx.errors.is_empty() => Ok(RulePlan {
                kind,
                steps,
                head,
                vars: cx.vars,
            }),
            _ => Err(cx.errors),
        }
    }

    fn plan_head(&mut self, r: &Rule, cx: &mut RuleCtx) -> Option<HeadPlan> {
        let h = &r.head;
        if h.is_io {
            let Some(io) = self.io_index(&h.predicate) else {
                cx.err(h.pos, format!("undefined IO predicate `#{}`", h.predicate));
                return None;
            };
            let def = &self.io_defs[io];
            if def.arity() != h.args.len() {
                cx.err(
                    h.pos,
                    format!("`#{}` takes {} arguments, found {}", def.name, def.arity(), h.args.len()),
                );
                return None;
            }
            let mut args = Vec::new();
            for (t, p) in h.args.iter().zip(&def.params) {
                if p.mode == ParamMode::Set {
                    cx.err(
                        h.pos,
                        format!(
                            "parameter `{}` of `#{}` is set by its definition, so `#{}` cannot be used as an output head",
                            p.name, def.name, def.name
                        ),
                    );
                    continue;
                }
                args.extend(cx.io_read(t, &def.name, &p.name, h.pos));
            }
            return (args.len() == def.arity()).then_some(HeadPlan::Io { io, args });
        }

        let Some(pred) = self.layout.index_of(&h.predicate) else {
            cx.err(h.pos, format!("undeclared predicate `{}`", h.predicate));
            return None;
        };
        let info = self.layout.predicates[pred].clone();
        if info.arity() != h.args.len() {
            cx.err(
                h.pos,
                format!(
                    "`{}` is declared with {} arguments, found {}",
                    info.name,
                    info.arity(),
                    h.args.len()
                ),
            );
            return None;
        }
        let what = format!("the head `{}`", info.name);
        let args: Vec<Operand> = h
            .args
            .iter()
            .zip(&info.arg_types)
            .filter_map(|(t, ty)| cx.slot_operand(t, *ty, &what, h.pos))
            .collect();
        (args.len() == info.arity()).then_some(HeadPlan::Insert {
            pred,
            next: r.head_next,
            args,
        })
    }
}

/// Rewrites Set arguments of an input rule's IO literal that are constants or
/// already bound into fresh variables followed by equality guards.
pub fn rewrite_io_binding(r: &Rule, def: &IoDefinition) -> Rule {
    let Some(io_at) = r
        .body
        .iter()
        .position(|b| matches!(b, BodyItem::Literal(l) if l.is_io))
    else {
        return r.clone();
    };
    let mut bound: Vec<String> = Vec::new();
    for item in &r.body[..io_at] {
        if let BodyItem::Literal(l) = item {
            if !l.negated {
                bound.extend(l.variables().map(str::to_string));
            }
        }
    }
    let mut taken = r.variable_names();
    let mut out = r.clone();
    let mut guards = Vec::new();
    let BodyItem::Literal(io) = &mut out.body[io_at] else {
        unreachable!()
    };
    for (t, p) in io.args.iter_mut().zip(&def.params) {
        if p.mode != ParamMode::Set {
            continue;
        }
        let needs_guard = match t {
            Term::Variable(v) => bound.contains(v),
            _ => true,
        };
        if !needs_guard {
            if let Term::Variable(v) = t {
                bound.push(v.clone());
            }
            continue;
        }
        let fresh = (1..)
            .map(|n| format!("{}_{n}", p.name))
            .find(|c| !taken.contains(c))
            .unwrap();
        taken.push(fresh.clone());
        let original = std::mem::replace(t, Term::Variable(fresh.clone()));
        let mut c = Comparison::new(Expr::Term(Term::Variable(fresh)), CmpOp::Eq, Expr::Term(original));
        c.pos = io.pos;
        guards.push(BodyItem::Comparison(c));
    }
    out.body.extend(guards);
    out
}
