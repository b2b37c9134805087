//! C code generation.
//!
//! The output is one self-contained translation unit: the fact buffers and
//! their helpers, one finder per registered binding pattern, one function
//! per rule, and `setup()`/`loop()`. Building with `-DDED_HOST` adds the
//! hooks the host harness uses to observe the fact buffers.

mod runtime;

use std::fmt::Write;

use crate::analyzer::{AnalyzedProgram, HeadPlan, IoArg, Operand, PredicateInfo, RulePlan, ScanArg, Step};
use crate::arith::{AExpr, Check, Domain};
use crate::model::{ArithOp, IoDefinition, ParamMode, RuleKind, ValueType};
use crate::names;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CodegenOptions {
    /// Include `"arduino_shim.h"` instead of `<Arduino.h>`.
    pub no_arduino_header: bool,
}

pub fn generate_c(a: &AnalyzedProgram, opts: &CodegenOptions) -> String {
    let mut out = String::new();
    out.push_str("/* Generated by dedalino. */\n");
    if opts.no_arduino_header {
        out.push_str("#include \"arduino_shim.h\"\n");
    } else {
        out.push_str("#include <Arduino.h>\n");
    }
    out.push_str("#include <stdint.h>\n#include <stdbool.h>\n#include <string.h>\n\n");
    writeln!(out, "#define DED_BUFFER_SIZE {}", a.layout.buffer_size).unwrap();
    writeln!(out, "#define DED_PREDICATE_COUNT {}", a.layout.predicates.len()).unwrap();
    out.push_str(&tables(a));
    out.push_str(runtime::RUNTIME);
    for (i, info) in a.layout.predicates.iter().enumerate() {
        out.push('\n');
        out.push_str(&predicate_helpers(info, &a.layout.binding_patterns[i]));
    }
    for (i, plan) in a.plans.iter().enumerate() {
        out.push('\n');
        let mut w = Writer::default();
        rule_function(&mut w, a, i, plan);
        out.push_str(&w.text);
    }
    out.push('\n');
    out.push_str(&setup_function(a));
    out.push('\n');
    out.push_str(&loop_function(a));
    out
}

fn tables(a: &AnalyzedProgram) -> String {
    let preds = &a.layout.predicates;
    let mut sizes = vec!["0".to_string()];
    let mut names_ = vec!["\"\"".to_string()];
    let mut types = vec!["\"\"".to_string()];
    for p in preds {
        sizes.push(p.size.to_string());
        names_.push(format!("\"{}\"", p.name));
        let code: String = p
            .arg_types
            .iter()
            .map(|t| match t {
                ValueType::Byte => 'b',
                ValueType::Int => 'i',
                ValueType::UnsignedLong => 'u',
            })
            .collect();
        types.push(format!("\"{code}\""));
    }
    format!(
        "\nconst uint8_t ded_sizes[DED_PREDICATE_COUNT + 1] = {{{}}};\n\
         #ifdef DED_HOST\n\
         const uint16_t ded_buffer_size = DED_BUFFER_SIZE;\n\
         const char *const ded_names[DED_PREDICATE_COUNT + 1] = {{{}}};\n\
         /* argument types per predicate: b byte, i int, u unsigned long */\n\
         const char *const ded_arg_types[DED_PREDICATE_COUNT + 1] = {{{}}};\n\
         #endif\n",
        sizes.join(", "),
        names_.join(", "),
        types.join(", ")
    )
}

fn reader_fn(t: ValueType) -> &'static str {
    match t {
        ValueType::Byte => "ded_read_byte",
        ValueType::Int => "ded_read_int",
        ValueType::UnsignedLong => "ded_read_ulong",
    }
}

fn writer_fn(t: ValueType) -> &'static str {
    match t {
        ValueType::Byte => "ded_write_byte",
        ValueType::Int => "ded_write_int",
        ValueType::UnsignedLong => "ded_write_ulong",
    }
}

fn params(info: &PredicateInfo, which: impl Fn(usize) -> bool) -> String {
    (0..info.arity())
        .filter(|&i| which(i))
        .map(|i| format!(", {} a{}", info.arg_types[i].c_type(), i + 1))
        .collect()
}

fn predicate_helpers(info: &PredicateInfo, patterns: &std::collections::BTreeSet<String>) -> String {
    let name = &info.name;
    let tag = info.number;
    let mut s = String::new();
    writeln!(s, "/* {name}: tag {tag}, {} bytes per fact */", info.size).unwrap();
    writeln!(s, "#define {} {}", names::size_const(name), info.size).unwrap();
    for (i, t) in info.arg_types.iter().enumerate() {
        writeln!(
            s,
            "static inline {} {}(const uint8_t *f) {{ return {}(f + {}); }}",
            t.c_type(),
            names::reader(name, i),
            reader_fn(*t),
            info.arg_offset(i)
        )
        .unwrap();
    }
    for pat in patterns {
        let bound: Vec<bool> = pat.chars().map(|c| c == 'b').collect();
        let is_bound = |i: usize| bound.get(i).copied().unwrap_or(false);
        writeln!(
            s,
            "static inline uint8_t *{}(uint8_t *from{}) {{",
            names::finder(name, pat),
            params(info, is_bound)
        )
        .unwrap();
        writeln!(s, "    while ((from = ded_find(from, {tag})) != 0) {{").unwrap();
        let conds: Vec<String> = (0..info.arity())
            .filter(|&i| is_bound(i))
            .map(|i| format!("{}(from) == a{}", names::reader(name, i), i + 1))
            .collect();
        if conds.is_empty() {
            s.push_str("        return from;\n");
        } else {
            writeln!(s, "        if ({}) {{", conds.join(" && ")).unwrap();
            s.push_str("            return from;\n        }\n");
            writeln!(s, "        from += {};", names::size_const(name)).unwrap();
        }
        s.push_str("    }\n    return 0;\n}\n");
    }
    writeln!(
        s,
        "static inline void {}(uint8_t *buf{}) {{",
        names::inserter(name),
        params(info, |_| true)
    )
    .unwrap();
    s.push_str("    uint8_t *f;\n");
    for (i, t) in info.arg_types.iter().enumerate() {
        if *t == ValueType::Int {
            writeln!(
                s,
                "    if (a{n} == INT16_MIN) {{\n        ded_fault(DED_FAULT_VALUE, {tag}, (uint32_t)(int32_t)a{n});\n        return;\n    }}",
                n = i + 1
            )
            .unwrap();
        }
    }
    writeln!(s, "    f = ded_reserve(buf, {tag});").unwrap();
    s.push_str("    if (f == 0) {\n        return;\n    }\n");
    for (i, t) in info.arg_types.iter().enumerate() {
        writeln!(s, "    {}(f + {}, a{});", writer_fn(*t), info.arg_offset(i), i + 1).unwrap();
    }
    writeln!(s, "    f[0] = {tag};").unwrap();
    s.push_str("}\n");
    s
}

#[derive(Default)]
struct Writer {
    text: String,
    depth: usize,
}

impl Writer {
    fn line(&mut self, l: impl AsRef<str>) {
        for _ in 0..self.depth {
            self.text.push_str("    ");
        }
        self.text.push_str(l.as_ref());
        self.text.push('\n');
    }

    fn open(&mut self, l: impl AsRef<str>) {
        self.line(l);
        self.depth += 1;
    }

    fn close(&mut self) {
        self.depth -= 1;
        self.line("}");
    }
}

fn var_name(plan: &RulePlan, v: usize) -> String {
    names::var(&plan.vars[v].name)
}

fn c_const(v: i64) -> String {
    if v > i16::MAX as i64 {
        format!("{v}UL")
    } else if v < 0 {
        format!("({v})")
    } else {
        v.to_string()
    }
}

fn operand(plan: &RulePlan, op: &Operand) -> String {
    match op {
        Operand::Var(v) => var_name(plan, *v),
        Operand::Const(c) => c_const(*c),
        Operand::Named(n, _) => n.clone(),
    }
}

/// True if slot `v` is read after being bound.
fn var_used(plan: &RulePlan, v: usize) -> bool {
    let op = |o: &Operand| *o == Operand::Var(v);
    let io = |a: &IoArg| matches!(a, IoArg::Read(o) if op(o));
    let in_steps = plan.steps.iter().any(|s| match s {
        Step::Scan { args, .. } => args.iter().any(|a| match a {
            ScanArg::Bound(o) => op(o),
            ScanArg::Same(x) => *x == v,
            ScanArg::Bind(_) => false,
        }),
        Step::Absent { args, .. } => args.iter().any(op),
        Step::Check(c) => {
            let mut vars = Vec::new();
            c.lhs.vars(&mut vars);
            c.rhs.vars(&mut vars);
            vars.contains(&v)
        }
        Step::Io { args, .. } => args.iter().any(io),
    });
    in_steps
        || match &plan.head {
            HeadPlan::Insert { args, .. } => args.iter().any(op),
            HeadPlan::Io { args, .. } => args.iter().any(io),
        }
}

fn has_arith(e: &AExpr) -> bool {
    matches!(e, AExpr::Bin(..))
}

fn aexpr(plan: &RulePlan, e: &AExpr, d: Domain, plain: bool) -> String {
    match e {
        AExpr::Var(v) => {
            let name = var_name(plan, *v);
            if d == Domain::U32 && plan.vars[*v].ty != ValueType::UnsignedLong {
                format!("(uint32_t){name}")
            } else {
                name
            }
        }
        AExpr::Const(c) => match d {
            Domain::U32 => format!("{}UL", *c as u32),
            Domain::I16 if plain => c_const(*c),
            Domain::I16 => format!("(int16_t)({})", *c as i16),
        },
        AExpr::Bin(op, l, r) => {
            let l = aexpr(plan, l, d, false);
            let r = aexpr(plan, r, d, false);
            match d {
                Domain::I16 => {
                    let f = match op {
                        ArithOp::Add => "ded_add16",
                        ArithOp::Sub => "ded_sub16",
                        ArithOp::Mul => "ded_mul16",
                    };
                    format!("{f}({l}, {r})")
                }
                Domain::U32 => format!("(uint32_t)({l} {} {r})", op.symbol()),
            }
        }
    }
}

fn condition(plan: &RulePlan, c: &Check) -> String {
    let plain = !has_arith(&c.lhs) && !has_arith(&c.rhs);
    format!(
        "{} {} {}",
        aexpr(plan, &c.lhs, c.domain, plain),
        c.op.symbol(),
        aexpr(plan, &c.rhs, c.domain, plain)
    )
}

/// The definition body with every `#Param` of a read parameter replaced.
fn splice_io(def: &IoDefinition, plan: &RulePlan, args: &[IoArg]) -> String {
    let mut body = def.body.clone();
    for (p, a) in def.params.iter().zip(args) {
        if p.mode != ParamMode::Read {
            continue;
        }
        let text = match a {
            IoArg::Read(op) => operand(plan, op),
            IoArg::Verbatim(n) => n.clone(),
            IoArg::Set(_) => continue,
        };
        body = replace_param(&body, &p.name, &text);
    }
    body.trim().to_string()
}

fn replace_param(body: &str, name: &str, text: &str) -> String {
    let needle = format!("#{name}");
    let mut out = String::new();
    let mut rest = body;
    while let Some(at) = rest.find(&needle) {
        let after = &rest[at + needle.len()..];
        let continues = after
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
        out.push_str(&rest[..at]);
        if continues {
            out.push_str(&needle);
        } else {
            out.push_str(text);
        }
        rest = after;
    }
    out.push_str(rest);
    out
}

fn rule_function(w: &mut Writer, a: &AnalyzedProgram, i: usize, plan: &RulePlan) {
    w.line(format!("/* {} */", a.program.rules[i]));
    w.open(format!("bool {}(void) {{", a.rule_function(i)));
    w.line("bool inserted_facts = false;");
    steps(w, a, plan, 0);
    w.line("return inserted_facts;");
    w.close();
}

fn steps(w: &mut Writer, a: &AnalyzedProgram, plan: &RulePlan, at: usize) {
    let Some(step) = plan.steps.get(at) else {
        head(w, a, plan);
        return;
    };
    match step {
        Step::Scan {
            pred,
            pattern,
            args,
            cursor,
        } => {
            let info = &a.layout.predicates[*pred];
            let bound: String = args
                .iter()
                .filter_map(|x| match x {
                    ScanArg::Bound(op) => Some(format!(", {}", operand(plan, op))),
                    _ => None,
                })
                .collect();
            w.line(format!("uint8_t *{cursor} = curr_buff;"));
            w.open(format!(
                "while (({cursor} = {}({cursor}{bound})) != 0) {{",
                names::finder(&info.name, pattern)
            ));
            let mut opened = 0;
            for (i, x) in args.iter().enumerate() {
                let read = format!("{}({cursor})", names::reader(&info.name, i));
                match x {
                    ScanArg::Bind(v) if !var_used(plan, *v) => {}
                    ScanArg::Bind(v) => w.line(format!(
                        "{} {} = {read};",
                        plan.vars[*v].ty.c_type(),
                        var_name(plan, *v)
                    )),
                    ScanArg::Same(v) => {
                        w.open(format!("if ({read} == {}) {{", var_name(plan, *v)));
                        opened += 1;
                    }
                    ScanArg::Bound(_) => {}
                }
            }
            steps(w, a, plan, at + 1);
            for _ in 0..opened {
                w.close();
            }
            w.line(format!("{cursor} += {};", names::size_const(&info.name)));
            w.close();
        }
        Step::Absent { pred, args } => {
            let info = &a.layout.predicates[*pred];
            let vals: String = args.iter().map(|op| format!(", {}", operand(plan, op))).collect();
            w.open(format!(
                "if ({}(curr_buff{vals}) == 0) {{",
                names::finder(&info.name, &info.all_bound())
            ));
            steps(w, a, plan, at + 1);
            w.close();
        }
        Step::Check(c) => {
            w.open(format!("if ({}) {{", condition(plan, c)));
            steps(w, a, plan, at + 1);
            w.close();
        }
        Step::Io { io, args } => {
            let def = &a.io_definitions[*io];
            w.open("{");
            io_body(w, def, plan, args);
            for (p, x) in def.params.iter().zip(args) {
                if let IoArg::Set(v) = x {
                    let ty = plan.vars[*v].ty.c_type();
                    w.line(format!("{ty} {} = ({ty}){};", var_name(plan, *v), p.name));
                    if !var_used(plan, *v) {
                        w.line(format!("(void){};", var_name(plan, *v)));
                    }
                }
            }
            steps(w, a, plan, at + 1);
            w.close();
        }
    }
}

fn io_body(w: &mut Writer, def: &IoDefinition, plan: &RulePlan, args: &[IoArg]) {
    for l in splice_io(def, plan, args).lines() {
        w.line(l.trim_end());
    }
}

fn head(w: &mut Writer, a: &AnalyzedProgram, plan: &RulePlan) {
    match &plan.head {
        HeadPlan::Insert { pred, next, args } => {
            let info = &a.layout.predicates[*pred];
            let buf = if *next { "next_buff" } else { "curr_buff" };
            let vals: String = args.iter().map(|op| format!(", {}", operand(plan, op))).collect();
            w.open(format!(
                "if ({}({buf}{vals}) == 0) {{",
                names::finder(&info.name, &info.all_bound())
            ));
            w.line(format!("{}({buf}{vals});", names::inserter(&info.name)));
            w.line("inserted_facts = true;");
            w.close();
        }
        HeadPlan::Io { io, args } => {
            w.open("{");
            io_body(w, &a.io_definitions[*io], plan, args);
            w.close();
        }
    }
}

fn setup_function(a: &AnalyzedProgram) -> String {
    let mut w = Writer::default();
    w.open("void setup(void) {");
    w.line("curr_buff = ded_buffer_a;");
    w.line("next_buff = ded_buffer_b;");
    w.line("clear_buffer(curr_buff);");
    w.line("clear_buffer(next_buff);");
    for f in &a.facts {
        let info = &a.layout.predicates[f.pred];
        let vals: String = f.args.iter().map(|v| format!(", {}", c_const(*v))).collect();
        w.open(format!(
            "if ({}(curr_buff{vals}) == 0) {{",
            names::finder(&info.name, &info.all_bound())
        ));
        w.line(format!("{}(curr_buff{vals});", names::inserter(&info.name)));
        w.close();
    }
    w.close();
    w.text
}

fn loop_function(a: &AnalyzedProgram) -> String {
    let mut w = Writer::default();
    w.open("void loop(void) {");
    if a.stratification.deductive.iter().any(|s| !s.is_empty()) {
        w.line("bool added_facts;");
    }
    for stratum in &a.stratification.deductive {
        if stratum.is_empty() {
            continue;
        }
        w.open("do {");
        w.line("added_facts = false;");
        for &ri in stratum {
            w.open(format!("if ({}()) {{", a.rule_function(ri)));
            w.line("added_facts = true;");
            w.close();
        }
        w.depth -= 1;
        w.line("} while (added_facts);");
    }
    w.text.push_str("#ifdef DED_HOST\n");
    w.line("ded_host_after_deduction();");
    w.text.push_str("#endif\n");
    for kind in [RuleKind::Output, RuleKind::Inductive, RuleKind::Input] {
        for ri in a.rules_of(kind) {
            w.line(format!("{}();", a.rule_function(ri)));
        }
    }
    w.line("switch_buffers();");
    w.close();
    w.text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile_source;

    fn gen(src: &str) -> String {
        generate_c(&compile_source(src, &Default::default()).unwrap(), &CodegenOptions::default())
    }

    #[test]
    fn nested_scan_shape() {
        let c = gen(".decl p(int)\n.decl q(int)\np(A) :- q(A), p(B), A < B.");
        let expected = "\
/* p(A) :- q(A), p(B), A < B. */
bool deductive_rule_1(void) {
    bool inserted_facts = false;
    uint8_t *q1 = curr_buff;
    while ((q1 = q_f(q1)) != 0) {
        int16_t v_A = q_arg1(q1);
        uint8_t *p1 = curr_buff;
        while ((p1 = p_f(p1)) != 0) {
            int16_t v_B = p_arg1(p1);
            if (v_A < v_B) {
                if (p_b(curr_buff, v_A) == 0) {
                    insert_p(curr_buff, v_A);
                    inserted_facts = true;
                }
            }
            p1 += size_of_p;
        }
        q1 += size_of_q;
    }
    return inserted_facts;
}
";
        assert!(c.contains(expected), "{c}");
    }

    #[test]
    fn io_spliced_with_arguments() {
        let c = gen(".decl pressed\n#digitalWrite(13, #HIGH) :- pressed.\npressed@next :- #digitalRead(2, #HIGH).");
        assert!(c.contains("digitalWrite(13, HIGH);"), "{c}");
        assert!(c.contains("int Val = digitalRead(2);\n        int16_t v_Val_1 = (int16_t)Val;"), "{c}");
        assert!(c.contains("if (v_Val_1 == 1) {"), "{c}");
        assert!(c.contains("if (pressed_x(next_buff) == 0) {"), "{c}");
    }

    #[test]
    fn arithmetic_domains() {
        let c = gen(".decl t(unsigned long)\n.decl k(int)\n.decl r\nr :- t(A), k(B), A + 1000 <= B.");
        assert!(c.contains("if ((uint32_t)(v_A + 1000UL) <= (uint32_t)v_B) {"), "{c}");
        let c = gen(".decl k(int)\n.decl r\nr :- k(A), k(B), A * 2 > B - 1.");
        assert!(c.contains("if (ded_mul16(v_A, (int16_t)(2)) > ded_sub16(v_B, (int16_t)(1))) {"), "{c}");
    }

    #[test]
    fn repeated_variable_filters() {
        let c = gen(".decl e(byte, byte)\n.decl s(byte)\ns(X) :- e(X, X).");
        assert!(c.contains("uint8_t v_X = e_arg1(e1);\n        if (e_arg2(e1) == v_X) {"), "{c}");
    }

    #[test]
    fn loop_order_and_strata() {
        let c = gen(".decl a\n.decl b\n.decl c\na@0.\nb :- a.\nc :- !b.\na@next :- c.\n#pinOut(13) :- c.");
        let loop_at = c.find("void loop(void)").unwrap();
        let body = &c[loop_at..];
        let order: Vec<usize> = ["deductive_rule_1()", "deductive_rule_2()", "ded_host_after_deduction", "output_rule_1();", "inductive_rule_1();", "switch_buffers();"]
            .iter()
            .map(|s| body.find(s).unwrap_or_else(|| panic!("{s}\n{body}")))
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]), "{body}");
        assert_eq!(body.matches("} while (added_facts);").count(), 2);
    }

    #[test]
    fn empty_program_loop() {
        let c = gen("");
        assert!(c.contains("void loop(void) {\n#ifdef DED_HOST\n    ded_host_after_deduction();\n#endif\n    switch_buffers();\n}\n"), "{c}");
    }

    #[test]
    fn header_choice() {
        let a = compile_source("", &Default::default()).unwrap();
        assert!(generate_c(&a, &CodegenOptions::default()).contains("#include <Arduino.h>"));
        let shim = generate_c(&a, &CodegenOptions { no_arduino_header: true });
        assert!(shim.contains("#include \"arduino_shim.h\""));
        assert!(!shim.contains("<Arduino.h>"));
    }

    #[test]
    fn param_replacement_respects_identifiers() {
        assert_eq!(replace_param("f(#P, #PIN, #P)", "P", "v_X"), "f(v_X, #PIN, v_X)");
    }
}
