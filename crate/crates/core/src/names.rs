//! Identifiers used in generated C.

use crate::model::RuleKind;

/// File-scope names the runtime part of the generated file defines or uses.
pub const RUNTIME_SYMBOLS: &[&str] = &[
    "DED_BUFFER_SIZE",
    "DED_PREDICATE_COUNT",
    "DED_FAULT_OVERFLOW",
    "DED_FAULT_VALUE",
    "ded_buffer_a",
    "ded_buffer_b",
    "curr_buff",
    "next_buff",
    "ded_sizes",
    "ded_names",
    "ded_arg_types",
    "ded_buffer_size",
    "ded_fact_cmp",
    "ded_fault",
    "ded_as_s16",
    "ded_add16",
    "ded_sub16",
    "ded_mul16",
    "ded_read_byte",
    "ded_read_int",
    "ded_read_ulong",
    "ded_write_byte",
    "ded_write_int",
    "ded_write_ulong",
    "ded_find",
    "ded_used",
    "ded_reserve",
    "ded_host_after_deduction",
    "ded_dump_buffer",
    "clear_buffer",
    "switch_buffers",
    "setup",
    "loop",
    "inserted_facts",
    "added_facts",
];

pub fn finder(pred: &str, pattern: &str) -> String {
    format!("{pred}_{pattern}")
}

/// Reader for argument `i` (0-based); the C name counts from 1.
pub fn reader(pred: &str, i: usize) -> String {
    format!("{pred}_arg{}", i + 1)
}

pub fn inserter(pred: &str) -> String {
    format!("insert_{pred}")
}

pub fn size_const(pred: &str) -> String {
    format!("size_of_{pred}")
}

pub fn rule_fn(kind: RuleKind, n: usize) -> String {
    format!("{kind}_rule_{n}")
}

pub fn var(name: &str) -> String {
    format!("v_{name}")
}
