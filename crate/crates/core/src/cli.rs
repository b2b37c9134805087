//! The `dedalino` command line.
//!
//! Exit codes: 0 on success, 1 when the program has errors or the run
//! faults, 2 on usage errors and unreadable files.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analyzer::DEFAULT_BUFFER_SIZE;
use crate::sim::{SimOptions, Simulator, TraceScript};
use crate::{compile_source, expand_macros, generate_c, parse_program, CodegenOptions, CompileOptions, Diagnostic};

#[derive(Debug, Parser)]
#[command(name = "dedalino", version, about = "Compile and simulate temporal Datalog programs for Arduino")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, expand and analyze a program, printing diagnostics.
    Check { file: PathBuf },
    /// Print the program with all macros expanded.
    Expand { file: PathBuf },
    /// Generate C for the Arduino toolchain.
    Compile {
        file: PathBuf,
        /// Output file; standard output if omitted.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[command(flatten)]
        buffer: BufferArg,
        /// Include "arduino_shim.h" instead of <Arduino.h>, for host builds.
        #[arg(long)]
        no_arduino_header: bool,
    },
    /// Simulate a program against a scripted trace.
    Run {
        file: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        buffer: BufferArg,
        /// Stop after this many loop iterations.
        #[arg(long)]
        max_steps: Option<u64>,
        /// Print the facts of every step to standard error.
        #[arg(long)]
        dump_facts: bool,
    },
}

#[derive(Debug, Args)]
struct BufferArg {
    /// Bytes per fact buffer.
    #[arg(long, default_value_t = DEFAULT_BUFFER_SIZE)]
    buffer_size: usize,
}

enum Failure {
    Program,
    Usage,
}

type Outcome = Result<(), Failure>;

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { file } => check(&file, err),
        Command::Expand { file } => expand(&file, out, err),
        Command::Compile {
            file,
            output,
            buffer,
            no_arduino_header,
        } => compile(&file, output.as_deref(), buffer.buffer_size, no_arduino_header, out, err),
        Command::Run {
            file,
            trace,
            buffer,
            max_steps,
            dump_facts,
        } => run(&file, &trace, buffer.buffer_size, max_steps, dump_facts, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Program) => 1,
        Err(Failure::Usage) => 2,
    }
}

fn read(path: &Path, err: &mut dyn Write) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
        Failure::Usage
    })
}

fn report(diags: &[Diagnostic], file: &Path, err: &mut dyn Write) {
    let name = file.display().to_string();
    for d in diags {
        let _ = writeln!(err, "{}", d.render(&name));
    }
}

fn compile_file(
    file: &Path,
    buffer_size: usize,
    err: &mut dyn Write,
) -> Result<crate::AnalyzedProgram, Failure> {
    let source = read(file, err)?;
    match compile_source(&source, &CompileOptions { buffer_size }) {
        Ok(a) => {
            report(&a.warnings, file, err);
            Ok(a)
        }
        Err(d) => {
            report(&d.0, file, err);
            Err(Failure::Program)
        }
    }
}

fn check(file: &Path, err: &mut dyn Write) -> Outcome {
    compile_file(file, DEFAULT_BUFFER_SIZE, err).map(|_| ())
}

fn expand(file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let source = read(file, err)?;
    let expanded = parse_program(&source)
        .and_then(|p| expand_macros(&p))
        .map_err(|d| {
            report(&d.0, file, err);
            Failure::Program
        })?;
    report(&expanded.warnings, file, err);
    let _ = write!(out, "{}", expanded.program);
    Ok(())
}

fn compile(
    file: &Path,
    output: Option<&Path>,
    buffer_size: usize,
    no_arduino_header: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let analyzed = compile_file(file, buffer_size, err)?;
    let c = generate_c(&analyzed, &CodegenOptions { no_arduino_header });
    match output {
        Some(path) => std::fs::write(path, c).map_err(|e| {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            Failure::Usage
        }),
        None => {
            let _ = out.write_all(c.as_bytes());
            Ok(())
        }
    }
}

fn run(
    file: &Path,
    trace_path: &Path,
    buffer_size: usize,
    max_steps: Option<u64>,
    dump_facts: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let trace_text = read(trace_path, err)?;
    let trace = TraceScript::parse(&trace_text).map_err(|e| {
        let _ = writeln!(err, "{}:{}: error: {}", trace_path.display(), e.line, e.message);
        Failure::Usage
    })?;
    let analyzed = compile_file(file, buffer_size, err)?;
    let opts = SimOptions {
        max_steps,
        tick_ms: None,
        dump_facts,
    };
    let outcome = Simulator::new(&analyzed, &trace, &opts).run(&trace, &opts);
    let _ = write!(out, "{}", outcome.log);
    for line in &outcome.dumps {
        let _ = writeln!(err, "{line}");
    }
    if outcome.faulted {
        Err(Failure::Program)
    } else {
        Ok(())
    }
}
