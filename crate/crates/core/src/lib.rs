//! Compiler and reference simulator for a temporal Datalog dialect with IO
//! predicates, targeting Arduino-class microcontrollers.
//!
//! The pipeline is [`parse_program`] → [`expand_macros`] → [`analyze`], whose
//! result feeds either [`generate_c`] or the [`sim::Simulator`].

pub mod analyzer;
pub mod arith;
pub mod batch;
pub mod cli;
pub mod codegen;
pub mod diag;
pub mod expand;
pub mod model;
pub mod names;
pub mod parser;
pub mod print;
pub mod sim;
pub mod stdlib;
pub mod store;

pub use analyzer::{analyze, AnalyzeOptions, AnalyzedProgram};
pub use codegen::{generate_c, CodegenOptions};
pub use diag::{Diagnostic, Diagnostics, Severity};
pub use expand::{expand_macros, Expansion};
pub use parser::parse_program;

pub type CompileOptions = AnalyzeOptions;

/// Parses, expands and analyzes `source`. Expansion warnings are added to
/// the result's warnings.
pub fn compile_source(source: &str, opts: &CompileOptions) -> Result<AnalyzedProgram, Diagnostics> {
    let parsed = parse_program(source)?;
    let expanded = expand_macros(&parsed)?;
    let mut analyzed = analyze(&expanded.program, opts)?;
    let mut warnings = expanded.warnings;
    warnings.append(&mut analyzed.warnings);
    analyzed.warnings = warnings;
    Ok(analyzed)
}
