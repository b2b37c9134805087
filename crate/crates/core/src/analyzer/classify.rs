use crate::diag::Diagnostic;
use crate::model::{BodyItem, Rule, RuleKind};

/// Assigns the rule its kind, or explains why it has none.
pub fn classify_rule(r: &Rule) -> Result<RuleKind, Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let io_count = r.io_literals().count();
    if io_count > 1 {
        errors.push(Diagnostic::error(
            r.pos,
            "a rule may contain at most one IO literal",
        ));
    }
    if r.head.is_io && r.head_next {
        errors.push(Diagnostic::error(
            r.head.pos,
            format!("IO head `#{}` cannot carry @next", r.head.predicate),
        ));
    }
    let last = r.body.len().saturating_sub(1);
    for (i, item) in r.body.iter().enumerate() {
        let BodyItem::Literal(l) = item else { continue };
        if !l.is_io {
            continue;
        }
        if l.negated {
            errors.push(Diagnostic::error(
                l.pos,
                format!("IO literal `#{}` cannot be negated", l.predicate),
            ));
        }
        if r.head.is_io {
            continue;
        }
        if !r.head_next {
            errors.push(Diagnostic::error(
                l.pos,
                format!(
                    "IO literal `#{}` in the body of a deductive rule; IO facts are not part of the model, so only @next heads may read IO",
                    l.predicate
                ),
            ));
        } else if i != last {
            errors.push(Diagnostic::error(
                l.pos,
                format!(
                    "IO literal `#{}` must be the last subgoal of an input rule",
                    l.predicate
                ),
            ));
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(if r.head.is_io {
        RuleKind::Output
    } else if io_count == 1 {
        RuleKind::Input
    } else if r.head_next {
        RuleKind::Inductive
    } else {
        RuleKind::Deductive
    })
}
