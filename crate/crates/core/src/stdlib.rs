//! Built-in IO predicates and the named constants of the Arduino core.

use std::sync::OnceLock;

use crate::model::IoDefinition;
use crate::parser::parse_program;

pub const STDLIB_SOURCE: &str = "\
#pinIn(P)  = {pinMode(#P, INPUT);}
#pinOut(P) = {pinMode(#P, OUTPUT);}
#digitalWrite(P, Val) = {digitalWrite(#P, #Val);}
#digitalRead(P, Val) = {int Val = digitalRead(#P);}
#millis(T) = {unsigned long T = millis();}
";

/// The standard IO definitions, parsed once.
pub fn definitions() -> &'static [IoDefinition] {
    static DEFS: OnceLock<Vec<IoDefinition>> = OnceLock::new();
    DEFS.get_or_init(|| {
        parse_program(STDLIB_SOURCE)
            .expect("standard library parses")
            .io_definitions
    })
}

pub fn definition(name: &str) -> Option<&'static IoDefinition> {
    definitions().iter().find(|d| d.name == name)
}

/// True if `a` and `b` are the same definition up to whitespace.
pub fn same_definition(a: &IoDefinition, b: &IoDefinition) -> bool {
    let squash = |s: &str| s.split_whitespace().collect::<String>();
    a.name == b.name
        && a.params.len() == b.params.len()
        && a.params.iter().zip(&b.params).all(|(x, y)| x.name == y.name)
        && squash(&a.body) == squash(&b.body)
}

pub const HIGH: i64 = 1;
pub const LOW: i64 = 0;
pub const INPUT: i64 = 0;
pub const OUTPUT: i64 = 1;
pub const INPUT_PULLUP: i64 = 2;

/// Value of a `#NAME` constant as the Arduino core defines it.
pub fn constant(name: &str) -> Option<i64> {
    Some(match name {
        "HIGH" => HIGH,
        "LOW" => LOW,
        "INPUT" => INPUT,
        "OUTPUT" => OUTPUT,
        "INPUT_PULLUP" => INPUT_PULLUP,
        "LED_BUILTIN" => 13,
        "A0" => 14,
        "A1" => 15,
        "A2" => 16,
        "A3" => 17,
        "A4" => 18,
        "A5" => 19,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ParamMode, ValueType};

    #[test]
    fn five_definitions() {
        let names: Vec<&str> = definitions().iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["pinIn", "pinOut", "digitalWrite", "digitalRead", "millis"]);
        let dw = definition("digitalWrite").unwrap();
        assert!(dw.params.iter().all(|p| p.mode == ParamMode::Read));
        let m = definition("millis").unwrap();
        assert_eq!(m.params[0].set_type, Some(ValueType::UnsignedLong));
    }

    #[test]
    fn whitespace_insensitive_identity() {
        let a = &parse_program("#pinOut(P) = {  pinMode( #P, OUTPUT ); }").unwrap().io_definitions[0];
        assert!(same_definition(a, definition("pinOut").unwrap()));
        let b = &parse_program("#pinOut(P) = {pinMode(#P, INPUT);}").unwrap().io_definitions[0];
        assert!(!same_definition(b, definition("pinOut").unwrap()));
    }
}
