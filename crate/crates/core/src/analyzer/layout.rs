use std::collections::BTreeSet;

use crate::diag::{Diagnostic, Diagnostics};
use crate::model::{fact_size, Program, ValueType};

pub const DEFAULT_BUFFER_SIZE: usize = 400;
pub const MAX_PREDICATES: usize = 255;
pub const MAX_FACT_SIZE: usize = 255;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateInfo {
    pub name: String,
    /// Tag byte stored in front of every fact, from 1.
    pub number: u8,
    pub arg_types: Vec<ValueType>,
    /// Bytes per fact including the tag.
    pub size: usize,
}

impl PredicateInfo {
    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }

    /// Byte offset of argument `i` within a fact.
    pub fn arg_offset(&self, i: usize) -> usize {
        1 + self.arg_types[..i].iter().map(|t| t.width()).sum::<usize>()
    }

    /// Pattern with every argument bound (`x` for nullary predicates).
    pub fn all_bound(&self) -> String {
        pattern_string(self.arity(), |_| true)
    }
}

pub fn pattern_string(arity: usize, bound: impl Fn(usize) -> bool) -> String {
    if arity == 0 {
        return "x".into();
    }
    (0..arity).map(|i| if bound(i) { 'b' } else { 'f' }).collect()
}

/// Everything the fact store and the code generator need to know about memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileLayout {
    /// Indexed by `number - 1`.
    pub predicates: Vec<PredicateInfo>,
    /// Registered search patterns, parallel to `predicates`.
    pub binding_patterns: Vec<BTreeSet<String>>,
    pub buffer_size: usize,
}

impl CompileLayout {
    pub fn new(predicates: Vec<PredicateInfo>, buffer_size: usize) -> Self {
        let binding_patterns = predicates
            .iter()
            .map(|p| BTreeSet::from([p.all_bound()]))
            .collect();
        CompileLayout {
            predicates,
            binding_patterns,
            buffer_size,
        }
    }

    /// Layout straight from the declarations, with only all-bound patterns.
    pub fn from_program(p: &Program, buffer_size: usize) -> Result<Self, Diagnostics> {
        Ok(CompileLayout::new(number_predicates(p)?, buffer_size))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateInfo> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn by_number(&self, tag: u8) -> Option<&PredicateInfo> {
        (tag as usize)
            .checked_sub(1)
            .and_then(|i| self.predicates.get(i))
    }

    pub fn predicate_number(&self, name: &str) -> Option<u8> {
        self.predicate(name).map(|p| p.number)
    }

    pub fn fact_size(&self, name: &str) -> Option<usize> {
        self.predicate(name).map(|p| p.size)
    }

    pub fn register_pattern(&mut self, pred: usize, pattern: String) {
        self.binding_patterns[pred].insert(pattern);
    }
}

/// Numbers declared predicates from 1 in declaration order.
pub fn number_predicates(p: &Program) -> Result<Vec<PredicateInfo>, Diagnostics> {
    let mut errors = Vec::new();
    let mut out: Vec<PredicateInfo> = Vec::with_capacity(p.declarations.len());
    for d in &p.declarations {
        if out.iter().any(|o| o.name == d.name) {
            errors.push(Diagnostic::error(
                d.pos,
                format!("predicate `{}` is declared more than once", d.name),
            ));
            continue;
        }
        let size = fact_size(d);
        if size > MAX_FACT_SIZE {
            errors.push(Diagnostic::error(
                d.pos,
                format!(
                    "facts of `{}` would take {size} bytes; at most {MAX_FACT_SIZE} are supported",
                    d.name
                ),
            ));
        }
        if out.len() == MAX_PREDICATES {
            errors.push(Diagnostic::error(
                d.pos,
                format!(
                    "too many predicates: at most {MAX_PREDICATES} can be declared, `{}` would be number {}",
                    d.name,
                    out.len() + 1
                ),
            ));
            break;
        }
        out.push(PredicateInfo {
            name: d.name.clone(),
            number: (out.len() + 1) as u8,
            arg_types: d.arg_types.clone(),
            size,
        });
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Diagnostics(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    #[test]
    fn declaration_order_from_one() {
        let p = parse_program(".decl p(int)\n.decl q(byte, int)").unwrap();
        let n = number_predicates(&p).unwrap();
        assert_eq!((n[0].name.as_str(), n[0].number, n[0].size), ("p", 1, 3));
        assert_eq!((n[1].name.as_str(), n[1].number, n[1].size), ("q", 2, 4));
        assert_eq!(n[1].arg_offset(1), 2);
    }

    #[test]
    fn empty_and_overfull() {
        assert!(number_predicates(&Program::default()).unwrap().is_empty());
        let src: String = (0..256).map(|i| format!(".decl p{i}\n")).collect();
        let e = number_predicates(&parse_program(&src).unwrap()).unwrap_err();
        assert!(e.mentions("too many predicates"));
        let src: String = (0..255).map(|i| format!(".decl p{i}\n")).collect();
        assert_eq!(number_predicates(&parse_program(&src).unwrap()).unwrap().len(), 255);
    }

    #[test]
    fn duplicate_and_oversized() {
        let e = number_predicates(&parse_program(".decl a\n.decl a").unwrap()).unwrap_err();
        assert!(e.mentions("more than once"));
        let args = vec!["unsigned long"; 64].join(", ");
        let e = number_predicates(&parse_program(&format!(".decl big({args})")).unwrap()).unwrap_err();
        assert!(e.mentions("257 bytes"));
    }

    #[test]
    fn patterns() {
        assert_eq!(pattern_string(0, |_| true), "x");
        assert_eq!(pattern_string(3, |i| i != 1), "bfb");
        let p = parse_program(".decl s\n.decl q(byte, int)").unwrap();
        let l = CompileLayout::from_program(&p, 400).unwrap();
        assert!(l.binding_patterns[0].contains("x"));
        assert!(l.binding_patterns[1].contains("bb"));
        assert_eq!(l.by_number(2).unwrap().name, "q");
        assert!(l.by_number(0).is_none());
    }
}
