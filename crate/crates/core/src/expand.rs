//! Rewrites `[setup]` and `[delay:X]` prefixed rules into plain rules.

use crate::diag::{Diagnostic, Diagnostics};
use crate::model::*;

/// Result of macro expansion: the rewritten program plus any warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub program: Program,
    pub warnings: Vec<Diagnostic>,
}

/// Expands every macro prefix in `p`. Programs without macros come back unchanged.
pub fn expand_macros(p: &Program) -> Result<Expansion, Diagnostics> {
    let mut ex = Expander {
        src: p,
        out: Program {
            declarations: p.declarations.clone(),
            io_definitions: p.io_definitions.clone(),
            facts: p.facts.clone(),
            rules: Vec::with_capacity(p.rules.len()),
        },
        generated: Vec::new(),
        errors: Vec::new(),
        warnings: Vec::new(),
        clock_rule_emitted: false,
    };
    for rule in &p.rules {
        if rule.macros.is_empty() {
            ex.out.rules.push(rule.clone());
        } else if let Err(d) = ex.expand_rule(rule) {
            ex.errors.push(d);
        }
    }
    if !ex.errors.is_empty() {
        return Err(Diagnostics(ex.errors));
    }
    ex.out.renumber_rules();
    Ok(Expansion {
        program: ex.out,
        warnings: ex.warnings,
    })
}

struct Expander<'a> {
    src: &'a Program,
    out: Program,
    /// Generated rules emitted so far, for de-duplication.
    generated: Vec<Rule>,
    errors: Vec<Diagnostic>,
    warnings: Vec<Diagnostic>,
    clock_rule_emitted: bool,
}

impl Expander<'_> {
    fn expand_rule(&mut self, rule: &Rule) -> Result<(), Diagnostic> {
        let mut setup = false;
        let mut delay: Option<(u32, Pos)> = None;
        for m in &rule.macros {
            match (m.name.as_str(), &m.arg) {
                ("setup", None) => setup = true,
                ("setup", Some(_)) => {
                    return Err(Diagnostic::error(m.pos, "the setup macro takes no argument"))
                }
                ("delay", arg) => {
                    if delay.is_some() {
                        return Err(Diagnostic::error(m.pos, "more than one delay macro on a rule"));
                    }
                    delay = Some((parse_delay(arg.as_deref()).map_err(|e| Diagnostic::error(m.pos, e))?, m.pos));
                }
                (other, _) => {
                    return Err(Diagnostic::error(m.pos, format!("unknown macro `{other}`")))
                }
            }
        }

        let mut base = rule.clone();
        base.macros.clear();
        if setup {
            self.ensure_setup(rule.pos)?;
            let mut lit = Literal::new("setup", vec![]);
            lit.pos = rule.pos;
            base.body.push(BodyItem::Literal(lit));
        }
        match delay {
            None => {
                self.out.rules.push(base);
                Ok(())
            }
            Some((x, pos)) => self.expand_delay(base, x, pos),
        }
    }

    fn ensure_setup(&mut self, pos: Pos) -> Result<(), Diagnostic> {
        match self.out.declaration("setup") {
            Some(d) if d.arity() != 0 => {
                return Err(Diagnostic::error(
                    pos,
                    "the setup macro needs `setup` to be a nullary predicate, but it is declared with arguments",
                ))
            }
            Some(_) => {}
            None => self.out.declarations.push(Declaration {
                pos,
                ..Declaration::new("setup", vec![])
            }),
        }
        self.ensure_fact(Fact { pos, ..Fact::new("setup", vec![]) });
        Ok(())
    }

    fn ensure_fact(&mut self, fact: Fact) {
        let exists = self
            .out
            .facts
            .iter()
            .any(|f| f.predicate == fact.predicate && f.args == fact.args);
        if !exists {
            self.out.facts.push(fact);
        }
    }

    fn ensure_decl(&mut self, decl: Declaration) -> Result<(), Diagnostic> {
        match self.out.declaration(&decl.name) {
            Some(d) if d.arg_types != decl.arg_types => Err(Diagnostic::error(
                decl.pos,
                format!(
                    "the delay macro needs `{}`, but `{}` is already declared differently",
                    decl, d.name
                ),
            )),
            Some(_) => Ok(()),
            None => {
                self.out.declarations.push(decl);
                Ok(())
            }
        }
    }

    fn expand_delay(&mut self, rule: Rule, x: u32, pos: Pos) -> Result<(), Diagnostic> {
        let head = &rule.head;
        if head.is_io {
            return Err(Diagnostic::error(pos, "the delay macro cannot be applied to an IO head"));
        }
        if rule.head_next {
            return Err(Diagnostic::error(pos, "the delay macro cannot be combined with @next"));
        }
        let Some(decl) = self.src.declaration(&head.predicate).cloned() else {
            return Err(Diagnostic::error(
                pos,
                format!("delayed head `{}` is not declared", head.predicate),
            ));
        };

        let delayed = format!("delayed_{}", head.predicate);
        let mut types = decl.arg_types.clone();
        types.push(ValueType::UnsignedLong);
        self.ensure_decl(Declaration { pos, ..Declaration::new("now", vec![ValueType::UnsignedLong]) })?;
        self.ensure_decl(Declaration { pos, ..Declaration::new(delayed.clone(), types) })?;
        self.ensure_fact(Fact { pos, ..Fact::new("now", vec![0]) });

        let taken = rule.variable_names();
        let curr = fresh_var("Curr", &taken);
        let await_ = fresh_var("Await", &taken);
        let lit = |name: &str, args: Vec<Term>| {
            let mut l = Literal::new(name, args);
            l.pos = pos;
            BodyItem::Literal(l)
        };
        let with = |extra: &str| {
            let mut a = head.args.clone();
            a.push(Term::var(extra));
            a
        };
        let deadline = |op: CmpOp| {
            let mut c = Comparison::new(
                Expr::binary(
                    ArithOp::Add,
                    Expr::Term(Term::var(&await_)),
                    Expr::Term(Term::Integer(x as i64)),
                ),
                op,
                Expr::Term(Term::var(&curr)),
            );
            c.pos = pos;
            BodyItem::Comparison(c)
        };
        let rule_at = |head: Literal, body: Vec<BodyItem>| {
            let mut r = Rule::new(Literal { pos, ..head }, body);
            r.pos = pos;
            r.generated = true;
            r
        };

        let mut out = Vec::new();
        if !self.clock_rule_emitted {
            self.clock_rule_emitted = true;
            out.push(
                rule_at(
                    Literal::new("now", vec![Term::var("T")]),
                    vec![BodyItem::Literal(Literal {
                        pos,
                        ..Literal::io("millis", vec![Term::var("T")])
                    })],
                )
                .next(),
            );
        }
        let mut body = rule.body.clone();
        body.push(lit("now", vec![Term::var(&curr)]));
        out.push(rule_at(Literal::new(delayed.clone(), with(&curr)), body));
        out.push(rule_at(
            head.clone(),
            vec![
                lit(&delayed, with(&await_)),
                lit("now", vec![Term::var(&curr)]),
                deadline(CmpOp::Le),
            ],
        ));
        out.push(
            rule_at(
                Literal::new(delayed.clone(), with(&await_)),
                vec![
                    lit(&delayed, with(&await_)),
                    lit("now", vec![Term::var(&curr)]),
                    deadline(CmpOp::Gt),
                ],
            )
            .next(),
        );

        for r in out {
            self.push_generated(r);
        }
        Ok(())
    }

    fn push_generated(&mut self, r: Rule) {
        if self.generated.iter().any(|g| same_rule(g, &r)) {
            return;
        }
        if self.src.rules.iter().any(|u| u.macros.is_empty() && same_rule(u, &r)) {
            self.warnings.push(Diagnostic::warning(
                r.pos,
                format!("macro-generated rule `{r}` duplicates a rule written in the program"),
            ));
        }
        self.generated.push(r.clone());
        self.out.rules.push(r);
    }
}

fn parse_delay(arg: Option<&str>) -> Result<u32, String> {
    let Some(text) = arg else {
        return Err("the delay macro needs an argument, as in [delay:1000]".into());
    };
    let text = text.trim();
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("delay argument `{text}` must be a positive integer"));
    }
    match text.parse::<u64>() {
        Ok(0) => Err("delay argument must be positive".into()),
        Ok(n) if n <= u32::MAX as u64 => Ok(n as u32),
        _ => Err(format!("delay argument `{text}` is too large")),
    }
}

fn fresh_var(base: &str, taken: &[String]) -> String {
    if !taken.iter().any(|t| t == base) {
        return base.to_string();
    }
    (1..)
        .map(|n| format!("{base}_{n}"))
        .find(|c| !taken.iter().any(|t| t == c))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn expand(src: &str) -> Expansion {
        expand_macros(&parse_program(src).unwrap()).unwrap()
    }

    fn facts(p: &Program) -> Vec<String> {
        p.facts.iter().map(ToString::to_string).collect()
    }

    fn rules(p: &Program) -> Vec<String> {
        p.rules.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn setup_bodiless() {
        let e = expand("[setup]#pinOut(13).");
        assert_eq!(rules(&e.program), ["#pinOut(13) :- setup."]);
        assert_eq!(facts(&e.program), ["setup@0."]);
        assert_eq!(e.program.declarations.len(), 1);
        assert_eq!(e.program.declarations[0].to_string(), ".decl setup");
    }

    #[test]
    fn setup_with_body_appends_last() {
        let e = expand(".decl a\n.decl b\n[setup]a :- b.");
        assert_eq!(rules(&e.program), ["a :- b, setup."]);
    }

    #[test]
    fn setup_once_per_program() {
        let e = expand(".decl setup\nsetup@0.\n[setup]#pinOut(13).\n[setup]#pinIn(2).");
        assert_eq!(e.program.facts.len(), 1);
        assert_eq!(e.program.declarations.len(), 1);
    }

    #[test]
    fn setup_with_arity_rejected() {
        let err = expand_macros(&parse_program(".decl setup(int)\n[setup]a.").unwrap()).unwrap_err();
        assert!(err.mentions("nullary"));
    }

    #[test]
    fn delay_rewrite() {
        let e = expand(".decl turn_on\n.decl turn_off\n[delay:1000]turn_on :- turn_off.");
        assert_eq!(
            rules(&e.program),
            [
                "now(T)@next :- #millis(T).",
                "delayed_turn_on(Curr) :- turn_off, now(Curr).",
                "turn_on :- delayed_turn_on(Await), now(Curr), Await + 1000 <= Curr.",
                "delayed_turn_on(Await)@next :- delayed_turn_on(Await), now(Curr), Await + 1000 > Curr.",
            ]
        );
        let decls: Vec<String> = e.program.declarations.iter().map(ToString::to_string).collect();
        assert_eq!(
            decls,
            [
                ".decl turn_on",
                ".decl turn_off",
                ".decl now(unsigned long)",
                ".decl delayed_turn_on(unsigned long)"
            ]
        );
        assert_eq!(facts(&e.program), ["now(0)@0."]);
        assert!(e.program.rules.iter().all(|r| r.generated));
    }

    #[test]
    fn delay_keeps_arguments_and_avoids_capture() {
        let e = expand(".decl p(int)\n.decl q(int, int)\n[delay:5]p(Curr) :- q(Curr, Await).");
        assert_eq!(
            rules(&e.program)[1],
            "delayed_p(Curr, Curr_1) :- q(Curr, Await), now(Curr_1)."
        );
        assert_eq!(
            e.program.declaration("delayed_p").unwrap().arg_types,
            vec![ValueType::Int, ValueType::UnsignedLong]
        );
    }

    #[test]
    fn clock_machinery_emitted_once() {
        let e = expand(".decl a\n.decl b\n.decl c\n[delay:10]a :- c.\n[delay:20]b :- c.");
        let clock = rules(&e.program)
            .iter()
            .filter(|r| r.starts_with("now(T)@next"))
            .count();
        assert_eq!(clock, 1);
        assert_eq!(e.program.rules.len(), 7);
        assert_eq!(e.program.facts.len(), 1);
    }

    #[test]
    fn concise_blink_expansion() {
        let src = ".decl turn_on\n.decl turn_off\n\
            [setup]#pinOut(13).\n[delay:1000]turn_on :- turn_off.\n#digitalWrite(13, #HIGH) :- turn_on.\n\
            [setup]turn_off.\n[delay:1000]turn_off :- turn_on.\n#digitalWrite(13, #LOW) :- turn_off.";
        let e = expand(src);
        assert!(e.warnings.is_empty());
        assert_eq!(e.program.pending_macros().count(), 0);
        assert_eq!(e.program.rules.len(), 11);
        assert_eq!(rules(&e.program)[0], "#pinOut(13) :- setup.");
        assert_eq!(rules(&e.program)[6], "turn_off :- setup.");
    }

    #[test]
    fn user_copy_of_clock_rule_warns() {
        let e = expand(
            ".decl a\n.decl b\n.decl now(unsigned long)\nnow(T)@next :- #millis(T).\n[delay:3]a :- b.",
        );
        assert_eq!(e.warnings.len(), 1);
        assert_eq!(e.program.rules.len(), 5);
    }

    #[test]
    fn delay_errors() {
        let bad = [
            (".decl a\n[delay:0]a.", "positive"),
            (".decl a\n[delay:-3]a.", "positive integer"),
            (".decl a\n[delay:1.5]a.", "positive integer"),
            (".decl a\n[delay]a.", "needs an argument"),
            (".decl a\n[delay:99999999999]a.", "too large"),
            (".decl a\n[delay:5]a@next :- a.", "@next"),
            ("[delay:5]#pinOut(13).", "IO head"),
            ("[delay:5]a.", "not declared"),
            (".decl a\n.decl now(int)\n[delay:5]a.", "declared differently"),
            ("[repeat]a.", "unknown macro"),
        ];
        for (src, needle) in bad {
            let err = expand_macros(&parse_program(src).unwrap()).unwrap_err();
            assert!(err.mentions(needle), "{src}: {err}");
        }
    }

    #[test]
    fn macro_free_is_identity() {
        let p = parse_program(".decl a\na@0.\na@next :- a.").unwrap();
        assert_eq!(expand_macros(&p).unwrap().program, p);
    }

    #[test]
    fn expansion_is_idempotent() {
        let e = expand(".decl a\n.decl b\n[setup][delay:7]a :- b.");
        let twice = expand_macros(&e.program).unwrap();
        assert_eq!(twice.program, e.program);
        assert_eq!(
            rules(&e.program)[1],
            "delayed_a(Curr) :- b, setup, now(Curr)."
        );
    }
}
