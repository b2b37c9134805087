//! Static checks and compile planning.
//!
//! [`analyze`] classifies every rule, checks IO usage, binding and typing,
//! stratifies negation and computes the memory layout. Its result drives
//! both the simulator and the C generator, so the two agree by construction.

mod classify;
mod layout;
mod plan;
mod strata;

use std::collections::HashMap;

use crate::diag::{Diagnostic, Diagnostics};
use crate::model::*;
use crate::{names, stdlib};

pub use classify::classify_rule;
pub use layout::{
    number_predicates, pattern_string, CompileLayout, PredicateInfo, DEFAULT_BUFFER_SIZE,
    MAX_FACT_SIZE, MAX_PREDICATES,
};
pub use plan::{rewrite_io_binding, HeadPlan, IoArg, Operand, RulePlan, ScanArg, Step, VarInfo};
pub use strata::{stratify, Stratification};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub buffer_size: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            buffer_size: DEFAULT_BUFFER_SIZE,
        }
    }
}

/// A timestamp-0 fact resolved against the layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundFact {
    pub pred: usize,
    pub args: Vec<i64>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzedProgram {
    /// The program with rule kinds set and input rules rewritten.
    pub program: Program,
    /// User definitions followed by the standard ones not redefined.
    pub io_definitions: Vec<IoDefinition>,
    pub layout: CompileLayout,
    pub stratification: Stratification,
    /// One plan per rule, parallel to `program.rules`.
    pub plans: Vec<RulePlan>,
    pub facts: Vec<GroundFact>,
    pub warnings: Vec<Diagnostic>,
}

impl AnalyzedProgram {
    /// Indices of the rules of one kind, in program order.
    pub fn rules_of(&self, kind: RuleKind) -> impl Iterator<Item = usize> + '_ {
        self.plans
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.kind == kind)
            .map(|(i, _)| i)
    }

    /// C function name of rule `i`; numbered per kind from 1.
    pub fn rule_function(&self, i: usize) -> String {
        let kind = self.plans[i].kind;
        let n = self.plans[..=i].iter().filter(|p| p.kind == kind).count();
        names::rule_fn(kind, n)
    }
}

pub fn analyze(p: &Program, opts: &AnalyzeOptions) -> Result<AnalyzedProgram, Diagnostics> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    for (r, m) in p.pending_macros() {
        errors.push(Diagnostic::error(
            m.pos,
            format!("macro `{m}` on rule `{}` was not expanded", r.head.predicate),
        ));
    }
    if !(1..=u16::MAX as usize).contains(&opts.buffer_size) {
        errors.push(Diagnostic::error(
            Pos::new(1, 1),
            format!(
                "buffer size {} is out of range (1 to {})",
                opts.buffer_size,
                u16::MAX
            ),
        ));
    }
    let predicates = match number_predicates(p) {
        Ok(preds) => preds,
        Err(d) => {
            errors.extend(d);
            return Err(Diagnostics(errors));
        }
    };
    let mut layout = CompileLayout::new(predicates, opts.buffer_size);

    let io_definitions = merge_io_definitions(p, &mut errors);

    let mut facts = Vec::new();
    for f in &p.facts {
        match ground_fact(f, &layout) {
            Ok(g) => facts.push(g),
            Err(d) => errors.push(d),
        }
    }

    let mut program = p.clone();
    let mut plans = Vec::with_capacity(p.rules.len());
    for r in &mut program.rules {
        let kind = match classify_rule(r) {
            Ok(k) => k,
            Err(d) => {
                errors.extend(d);
                continue;
            }
        };
        r.kind = Some(kind);
        if kind == RuleKind::Input {
            let io = r.literals().find(|l| l.is_io).unwrap();
            if let Some(def) = io_definitions.iter().find(|d| d.name == io.predicate) {
                if def.arity() == io.args.len() {
                    *r = rewrite_io_binding(r, def);
                }
            }
        }
        let mut planner = plan::Planner {
            layout: &mut layout,
            io_defs: &io_definitions,
        };
        match planner.plan(r) {
            Ok(plan) => plans.push(plan),
            Err(d) => errors.extend(d),
        }
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }

    let stratification = stratify(&program)?;
    let analyzed = AnalyzedProgram {
        program,
        io_definitions,
        layout,
        stratification,
        plans,
        facts,
        warnings: std::mem::take(&mut warnings),
    };
    let clashes = symbol_clashes(&analyzed);
    if !clashes.is_empty() {
        return Err(Diagnostics(clashes));
    }
    Ok(analyzed)
}

/// Runs binding and typing checks on one rule in the context of `p`.
pub fn check_safety(r: &Rule, p: &Program) -> Vec<Diagnostic> {
    let mut errors = Vec::new();
    let Ok(preds) = number_predicates(p) else {
        return errors;
    };
    let mut layout = CompileLayout::new(preds, DEFAULT_BUFFER_SIZE);
    let io_defs = merge_io_definitions(p, &mut errors);
    let mut r = r.clone();
    match classify_rule(&r) {
        Ok(k) => r.kind = Some(k),
        Err(d) => return d,
    }
    let io = r.literals().find(|l| l.is_io && r.head_next).cloned();
    if let Some(io) = io {
        if let Some(def) = io_defs.iter().find(|d| d.name == io.predicate) {
            if def.arity() == io.args.len() {
                r = rewrite_io_binding(&r, def);
            }
        }
    }
    let mut planner = plan::Planner {
        layout: &mut layout,
        io_defs: &io_defs,
    };
    if let Err(d) = planner.plan(&r) {
        errors.extend(d);
    }
    errors
}

fn merge_io_definitions(p: &Program, errors: &mut Vec<Diagnostic>) -> Vec<IoDefinition> {
    let mut defs = Vec::new();
    for d in &p.io_definitions {
        if let Some(std) = stdlib::definition(&d.name) {
            if !stdlib::same_definition(d, std) {
                errors.push(Diagnostic::error(
                    d.pos,
                    format!(
                        "`#{}` is a standard IO predicate and may only be redefined identically: {}",
                        d.name, std
                    ),
                ));
            }
        }
        defs.push(d.clone());
    }
    for std in stdlib::definitions() {
        if !defs.iter().any(|d| d.name == std.name) {
            defs.push(std.clone());
        }
    }
    defs
}

fn ground_fact(f: &Fact, layout: &CompileLayout) -> Result<GroundFact, Diagnostic> {
    let Some(pred) = layout.index_of(&f.predicate) else {
        return Err(Diagnostic::error(
            f.pos,
            format!("fact for undeclared predicate `{}`", f.predicate),
        ));
    };
    let info = &layout.predicates[pred];
    if info.arity() != f.args.len() {
        return Err(Diagnostic::error(
            f.pos,
            format!(
                "`{}` is declared with {} arguments, found {}",
                info.name,
                info.arity(),
                f.args.len()
            ),
        ));
    }
    for (v, t) in f.args.iter().zip(&info.arg_types) {
        if !t.can_store(*v) {
            return Err(Diagnostic::error(
                f.pos,
                format!("constant {v} does not fit {t} in fact `{}`", info.name),
            ));
        }
    }
    Ok(GroundFact {
        pred,
        args: f.args.clone(),
        pos: f.pos,
    })
}

/// Generated C identifiers that would collide with each other.
fn symbol_clashes(a: &AnalyzedProgram) -> Vec<Diagnostic> {
    let mut owners: HashMap<String, String> = HashMap::new();
    let mut errors = Vec::new();
    let mut claim = |sym: String, owner: String, pos: Pos, errors: &mut Vec<Diagnostic>| {
        if let Some(prev) = owners.get(&sym) {
            if *prev != owner {
                errors.push(Diagnostic::error(
                    pos,
                    format!("generated C name `{sym}` for {owner} clashes with {prev}"),
                ));
            }
        } else {
            owners.insert(sym, owner);
        }
    };
    for s in names::RUNTIME_SYMBOLS {
        claim(s.to_string(), "the runtime".into(), Pos::default(), &mut errors);
    }
    let decl_pos = |name: &str| a.program.declaration(name).map_or(Pos::default(), |d| d.pos);
    for (i, info) in a.layout.predicates.iter().enumerate() {
        let owner = format!("predicate `{}`", info.name);
        let pos = decl_pos(&info.name);
        for pat in &a.layout.binding_patterns[i] {
            claim(names::finder(&info.name, pat), owner.clone(), pos, &mut errors);
        }
        for k in 0..info.arity() {
            claim(names::reader(&info.name, k), owner.clone(), pos, &mut errors);
        }
        claim(names::inserter(&info.name), owner.clone(), pos, &mut errors);
        claim(names::size_const(&info.name), owner.clone(), pos, &mut errors);
    }
    for i in 0..a.plans.len() {
        let r = &a.program.rules[i];
        claim(a.rule_function(i), format!("rule {}", i + 1), r.pos, &mut errors);
    }
    // Locals of each rule function must not shadow file-scope names or each other.
    for (i, plan) in a.plans.iter().enumerate() {
        let r = &a.program.rules[i];
        let mut locals: Vec<String> = plan.vars.iter().map(|v| names::var(&v.name)).collect();
        for s in &plan.steps {
            if let Step::Scan { cursor, .. } = s {
                locals.push(cursor.clone());
            }
        }
        for (k, l) in locals.iter().enumerate() {
            if let Some(owner) = owners.get(l) {
                errors.push(Diagnostic::error(
                    r.pos,
                    format!("local C name `{l}` in this rule clashes with {owner}"),
                ));
            } else if locals[..k].contains(l) {
                errors.push(Diagnostic::error(
                    r.pos,
                    format!("local C name `{l}` is used twice in this rule"),
                ));
            }
        }
    }
    errors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn run(src: &str) -> Result<AnalyzedProgram, Diagnostics> {
        analyze(&parse_program(src).unwrap(), &AnalyzeOptions::default())
    }

    fn fails(src: &str, needle: &str) {
        match run(src) {
            Ok(_) => panic!("accepted: {src}"),
            Err(e) => assert!(e.mentions(needle), "{src}\n{e}"),
        }
    }

    const TOUCHBLINK: &str = ".decl setup\n.decl pressed\nsetup@0.\n#pinIn(2) :- setup.\n#pinOut(13) :- setup.\npressed@next :- #digitalRead(2, #HIGH).\n#digitalWrite(13, #HIGH) :- pressed.\n#digitalWrite(13, #LOW) :- !pressed.\n";

    #[test]
    fn touchblink_accepted() {
        let a = run(TOUCHBLINK).unwrap();
        let kinds: Vec<RuleKind> = a.plans.iter().map(|p| p.kind).collect();
        use RuleKind::*;
        assert_eq!(kinds, [Output, Output, Input, Output, Output]);
        assert_eq!(
            a.program.rules[2].to_string(),
            "pressed@next :- #digitalRead(2, Val_1), Val_1 == #HIGH."
        );
        assert_eq!(a.layout.predicate_number("pressed"), Some(2));
        assert_eq!(a.rule_function(2), "input_rule_1");
        assert_eq!(a.rule_function(4), "output_rule_4");
        assert_eq!(a.facts.len(), 1);
    }

    #[test]
    fn nested_join_rule_plan() {
        let a = run(".decl p(int)\n.decl q(int)\np(A) :- q(A), p(B), A < B.").unwrap();
        let plan = &a.plans[0];
        assert_eq!(plan.vars.len(), 2);
        let Step::Scan { pattern, cursor, .. } = &plan.steps[0] else { panic!() };
        assert_eq!((pattern.as_str(), cursor.as_str()), ("f", "q1"));
        let Step::Scan { pattern, cursor, .. } = &plan.steps[1] else { panic!() };
        assert_eq!((pattern.as_str(), cursor.as_str()), ("f", "p1"));
        assert!(matches!(plan.steps[2], Step::Check(_)));
        assert!(a.layout.binding_patterns[0].contains("b"));
        assert!(a.layout.binding_patterns[0].contains("f"));
        assert_eq!(a.layout.binding_patterns[1].len(), 2);
    }

    #[test]
    fn safety() {
        assert!(run(".decl p(int)\n.decl q(int, int)\np(X) :- q(X, Y), p(Y).").is_ok());
        fails(".decl p(int)\n.decl q(int)\np(X) :- !q(X).", "`X`");
        fails(".decl p(int)\n.decl q(int)\np(X) :- q(Y).", "not bound");
        fails(".decl p(int)\n.decl q(int)\np(X) :- q(X), Z > X.", "`Z`");
        assert!(run(".decl now(unsigned long)\nnow(T)@next :- #millis(T).").is_ok());
    }

    #[test]
    fn io_binding_errors() {
        fails(".decl x\nx@next :- #digitalRead(P, V).", "must be bound");
        fails(".decl p\n#digitalRead(2, 1) :- p.", "cannot be used as an output head");
        fails(".decl p\n#digitalWrite(X, 1) :- p.", "must be bound");
        fails(".decl x\nx@next :- #nosuch(1).", "undefined IO predicate");
        fails(".decl x\nx@next :- #millis(1, 2).", "takes 1 arguments");
    }

    #[test]
    fn typing() {
        fails(".decl a(byte)\n.decl b(int)\na(X) :- b(X).", "has type int");
        fails(".decl a(byte)\na(300)@0.", "does not fit byte");
        fails(".decl a(byte)\n.decl b\na(256) :- b.", "does not fit byte");
        fails(".decl a(int)\na(-32768)@0.", "does not fit int");
        assert!(run(".decl a(int)\na(-32767)@0.").is_ok());
        fails(".decl a(int)\n.decl b(int)\na(X) :- b(X), X > #NOPE.", "unknown constant");
    }

    #[test]
    fn user_io_and_stdlib_redefinition() {
        assert!(run("#pinOut(P) = {pinMode(#P, OUTPUT);}\n.decl s\n#pinOut(13) :- s.").is_ok());
        fails("#pinOut(P) = {pinMode(#P, INPUT);}", "may only be redefined identically");
        let a = run("#beep(F) = {tone(8, #F);}\n.decl s\n#beep(#NOTE_A4) :- s.").unwrap();
        let HeadPlan::Io { args, .. } = &a.plans[0].head else { panic!() };
        assert_eq!(args[0], IoArg::Verbatim("NOTE_A4".into()));
    }

    #[test]
    fn undeclared_and_arity() {
        fails("p :- q.", "undeclared predicate");
        fails(".decl p(int)\np@0.", "declared with 1 arguments");
        fails("r(1)@0.", "undeclared");
    }

    #[test]
    fn unexpanded_macros_rejected() {
        fails("[setup]#pinOut(13).", "not expanded");
    }

    #[test]
    fn symbol_clash_detected() {
        // `x_arg`'s first cursor is `x_arg1`, which is also `x`'s reader.
        fails(".decl x(int)\n.decl x_arg\n.decl y\ny :- x_arg, x(1).", "clashes");
        // nullary `size_of` searches with `size_of_x`, the size constant of `x`
        fails(".decl x\n.decl size_of", "clashes");
    }

    #[test]
    fn buffer_size_bounds() {
        let p = parse_program("").unwrap();
        assert!(analyze(&p, &AnalyzeOptions { buffer_size: 0 }).is_err());
        assert!(analyze(&p, &AnalyzeOptions { buffer_size: 70000 }).is_err());
        assert!(analyze(&p, &AnalyzeOptions { buffer_size: 65535 }).is_ok());
    }

    #[test]
    fn negation_cycle() {
        fails(".decl p\n.decl q\np :- !q.\nq :- p.", "not stratified");
    }
}
