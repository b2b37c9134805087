#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus(name: &str) -> PathBuf {
    crate_dir().join("tests/corpus").join(name)
}

pub fn read_corpus(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).unwrap()
}

pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut all = vec!["dedalino"];
    all.extend_from_slice(args);
    let code = dedalino::cli::run_cli(all, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Compares `actual` with the file under `tests/golden`, rewriting the file
/// instead when `DEDALINO_BLESS` is set.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = crate_dir().join("tests/golden").join(name);
    if std::env::var_os("DEDALINO_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path)
        .map_err(|e| format!("{}: {e} (set DEDALINO_BLESS=1 to create)", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!(
            "{} differs from generated output:\n--- expected\n{expected}\n--- actual\n{actual}",
            path.display()
        ))
    }
}

// ---------------------------------------------------------------------------
// Random IO-free, negation-free programs and a brute-force fixpoint oracle.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Byte,
    Int,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum T {
    Var(usize),
    Const(i64),
}

#[derive(Debug, Clone)]
pub struct Atom {
    pub pred: usize,
    pub args: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct Cmp {
    /// `vars[a] + offset OP vars[b]`
    pub a: usize,
    pub offset: i64,
    pub op: &'static str,
    pub b: usize,
}

#[derive(Debug, Clone)]
pub struct OracleRule {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub cmp: Option<Cmp>,
    pub nvars: usize,
}

#[derive(Debug, Clone)]
pub struct OracleProgram {
    pub preds: Vec<Vec<Ty>>,
    pub facts: Vec<(usize, Vec<i64>)>,
    pub rules: Vec<OracleRule>,
}

pub const DOMAIN: std::ops::RangeInclusive<i64> = 0..=4;

fn pred_name(i: usize) -> String {
    format!("r{i}")
}

fn term(t: &T) -> String {
    match t {
        T::Var(v) => format!("V{v}"),
        T::Const(c) => c.to_string(),
    }
}

fn atom(a: &Atom) -> String {
    if a.args.is_empty() {
        pred_name(a.pred)
    } else {
        let args: Vec<String> = a.args.iter().map(term).collect();
        format!("{}({})", pred_name(a.pred), args.join(", "))
    }
}

impl OracleProgram {
    pub fn random(rng: &mut ChaCha8Rng) -> OracleProgram {
        let npreds = rng.gen_range(1..=4);
        let preds: Vec<Vec<Ty>> = (0..npreds)
            .map(|_| {
                let arity = rng.gen_range(0..=2);
                (0..arity)
                    .map(|_| if rng.gen_bool(0.5) { Ty::Byte } else { Ty::Int })
                    .collect()
            })
            .collect();
        let mut facts = Vec::new();
        for _ in 0..rng.gen_range(2..=8) {
            let p = rng.gen_range(0..npreds);
            let args = preds[p].iter().map(|_| rng.gen_range(DOMAIN)).collect();
            facts.push((p, args));
        }
        let mut rules = Vec::new();
        for _ in 0..rng.gen_range(1..=6) {
            rules.push(random_rule(rng, &preds));
        }
        OracleProgram { preds, facts, rules }
    }

    pub fn source(&self) -> String {
        let mut s = String::new();
        for (i, tys) in self.preds.iter().enumerate() {
            let tys: Vec<&str> = tys
                .iter()
                .map(|t| match t {
                    Ty::Byte => "byte",
                    Ty::Int => "int",
                })
                .collect();
            if tys.is_empty() {
                writeln!(s, ".decl {}", pred_name(i)).unwrap();
            } else {
                writeln!(s, ".decl {}({})", pred_name(i), tys.join(", ")).unwrap();
            }
        }
        for (p, args) in &self.facts {
            let a = Atom {
                pred: *p,
                args: args.iter().map(|v| T::Const(*v)).collect(),
            };
            writeln!(s, "{}@0.", atom(&a)).unwrap();
        }
        for r in &self.rules {
            let mut body: Vec<String> = r.body.iter().map(atom).collect();
            if let Some(c) = &r.cmp {
                let lhs = if c.offset == 0 {
                    format!("V{}", c.a)
                } else {
                    format!("V{} + {}", c.a, c.offset)
                };
                body.push(format!("{lhs} {} V{}", c.op, c.b));
            }
            writeln!(s, "{} :- {}.", atom(&r.head), body.join(", ")).unwrap();
        }
        s
    }

    /// Least model by naive iteration, enumerating every variable assignment.
    pub fn least_model(&self) -> BTreeSet<(usize, Vec<i64>)> {
        let mut model: BTreeSet<(usize, Vec<i64>)> = self.facts.iter().cloned().collect();
        loop {
            let mut added = false;
            for r in &self.rules {
                let mut vals = vec![*DOMAIN.start(); r.nvars];
                loop {
                    if self.fires(r, &vals, &model) {
                        let head = (r.head.pred, ground(&r.head, &vals));
                        if !model.contains(&head) {
                            model.insert(head);
                            added = true;
                        }
                    }
                    if !next_assignment(&mut vals) {
                        break;
                    }
                }
            }
            if !added {
                return model;
            }
        }
    }

    fn fires(&self, r: &OracleRule, vals: &[i64], model: &BTreeSet<(usize, Vec<i64>)>) -> bool {
        let body_ok = r
            .body
            .iter()
            .all(|a| model.contains(&(a.pred, ground(a, vals))));
        body_ok
            && r.cmp.as_ref().map_or(true, |c| {
                let l = vals[c.a] + c.offset;
                let rv = vals[c.b];
                match c.op {
                    "<" => l < rv,
                    "<=" => l <= rv,
                    ">" => l > rv,
                    ">=" => l >= rv,
                    "==" => l == rv,
                    _ => l != rv,
                }
            })
    }

    /// The model in the simulator's dump format.
    pub fn render(&self, model: &BTreeSet<(usize, Vec<i64>)>) -> String {
        let parts: Vec<String> = model
            .iter()
            .map(|(p, args)| {
                if args.is_empty() {
                    pred_name(*p)
                } else {
                    let a: Vec<String> = args.iter().map(ToString::to_string).collect();
                    format!("{}({})", pred_name(*p), a.join(","))
                }
            })
            .collect();
        parts.join(", ")
    }
}

fn ground(a: &Atom, vals: &[i64]) -> Vec<i64> {
    a.args
        .iter()
        .map(|t| match t {
            T::Var(v) => vals[*v],
            T::Const(c) => *c,
        })
        .collect()
}

fn next_assignment(vals: &mut [i64]) -> bool {
    for v in vals.iter_mut() {
        if *v < *DOMAIN.end() {
            *v += 1;
            return true;
        }
        *v = *DOMAIN.start();
    }
    false
}

fn random_rule(rng: &mut ChaCha8Rng, preds: &[Vec<Ty>]) -> OracleRule {
    let mut var_types: Vec<Ty> = Vec::new();
    let mut body = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let pred = rng.gen_range(0..preds.len());
        let mut args = Vec::new();
        for ty in &preds[pred] {
            let same: Vec<usize> = (0..var_types.len()).filter(|&v| var_types[v] == *ty).collect();
            let choice = rng.gen_range(0..10);
            if choice < 1 {
                args.push(T::Const(rng.gen_range(DOMAIN)));
            } else if choice < 6 && !same.is_empty() {
                args.push(T::Var(*same.choose(rng).unwrap()));
            } else {
                var_types.push(*ty);
                args.push(T::Var(var_types.len() - 1));
            }
        }
        body.push(Atom { pred, args });
    }
    let pred = rng.gen_range(0..preds.len());
    let head_args = preds[pred]
        .iter()
        .map(|ty| {
            let same: Vec<usize> = (0..var_types.len()).filter(|&v| var_types[v] == *ty).collect();
            if same.is_empty() || rng.gen_bool(0.15) {
                T::Const(rng.gen_range(DOMAIN))
            } else {
                T::Var(*same.choose(rng).unwrap())
            }
        })
        .collect();
    let cmp = (var_types.len() >= 2 && rng.gen_bool(0.4)).then(|| {
        let a = rng.gen_range(0..var_types.len());
        let b = rng.gen_range(0..var_types.len());
        Cmp {
            a,
            offset: rng.gen_range(0..=2),
            op: ["<", "<=", ">", ">=", "==", "!="][rng.gen_range(0..6)],
            b,
        }
    });
    OracleRule {
        head: Atom {
            pred,
            args: head_args,
        },
        body,
        cmp,
        nvars: var_types.len(),
    }
}

pub fn oracle_programs(seed: u64, n: usize) -> Vec<OracleProgram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| OracleProgram::random(&mut rng)).collect()
}

// ---------------------------------------------------------------------------
// Random programs over the standard IO library, for differential runs.

/// A stratified program touching pins 2-5 (inputs) and 10-13 (outputs).
pub fn random_io_program(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::from(
        ".decl setup\n.decl now(unsigned long)\n.decl seen(byte, int)\n.decl a(byte)\n.decl b(byte)\n.decl c(byte)\n.decl since(unsigned long)\n\nsetup@0.\nnow(0)@0.\nsince(0)@0.\n",
    );
    for p in 2..=5 {
        if rng.gen_bool(0.8) {
            writeln!(s, "#pinIn({p}) :- setup.").unwrap();
        }
    }
    for p in 10..=13 {
        if rng.gen_bool(0.8) {
            writeln!(s, "#pinOut({p}) :- setup.").unwrap();
        }
    }
    s.push_str("now(T)@next :- #millis(T).\n");
    for p in 2..=5 {
        match rng.gen_range(0..3) {
            0 => writeln!(s, "a({p})@next :- #digitalRead({p}, #HIGH).").unwrap(),
            1 => writeln!(s, "seen({p}, V)@next :- #digitalRead({p}, V).").unwrap(),
            _ => writeln!(s, "b({p})@next :- a({}), #digitalRead({p}, #LOW).", rng.gen_range(2..=5)).unwrap(),
        }
    }
    let k = rng.gen_range(100..600);
    let deductive = [
        "a(P) :- seen(P, V), V == 1.".to_string(),
        "b(P) :- a(P), !c(P).".to_string(),
        format!("c(P) :- seen(P, V), V != 1, since(S), now(T), S + {k} < T."),
        "c(3) :- !a(2).".to_string(),
        "b(Q) :- a(P), seen(Q, V), P < Q.".to_string(),
    ];
    for r in &deductive {
        if rng.gen_bool(0.7) {
            writeln!(s, "{r}").unwrap();
        }
    }
    writeln!(s, "since(T)@next :- c(4), now(T).").unwrap();
    writeln!(s, "since(S)@next :- !c(4), since(S).").unwrap();
    for p in 10..=13 {
        let src = ["a", "b", "c"][rng.gen_range(0..3)];
        let q = rng.gen_range(2..=5);
        writeln!(s, "#digitalWrite({p}, #HIGH) :- {src}({q}).").unwrap();
        writeln!(s, "#digitalWrite({p}, #LOW) :- !{src}({q}).").unwrap();
    }
    if rng.gen_bool(0.3) {
        // write to an input pin to exercise warnings
        s.push_str("#digitalWrite(2, #HIGH) :- a(3).\n");
    }
    s
}

pub fn random_trace(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::from("tick 10\n");
    let mut t = 0;
    for _ in 0..rng.gen_range(3..15) {
        t += rng.gen_range(5..400);
        let pin = rng.gen_range(2..=5);
        let level = if rng.gen_bool(0.5) { "high" } else { "low" };
        writeln!(s, "at {t} pin {pin} {level}").unwrap();
    }
    writeln!(s, "end {}", t + 500).unwrap();
    s
}

// ---------------------------------------------------------------------------
// Host compilation of generated C.

pub fn c_compiler() -> Option<String> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Some(cc.to_string());
        }
    }
    None
}

/// Compiles generated C with the test shim; returns the binary path.
pub fn build_host(cc: &str, c_source: &str, dir: &Path, name: &str) -> Result<PathBuf, String> {
    let c = dir.join(format!("{name}.c"));
    let bin = dir.join(name);
    std::fs::write(&c, c_source).unwrap();
    let support = crate_dir().join("tests/support");
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-DDED_HOST", "-I"])
        .arg(&support)
        .arg("-o")
        .arg(&bin)
        .arg(&c)
        .arg(support.join("arduino_shim.c"))
        .output()
        .unwrap();
    if out.status.success() {
        Ok(bin)
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

/// Runs a host binary on a trace file; returns (stdout, stderr).
pub fn run_host(bin: &Path, trace: &Path, dump: bool) -> (String, String) {
    let mut cmd = Command::new(bin);
    cmd.arg(trace);
    if dump {
        cmd.env("DED_DUMP", "1");
    }
    let out = cmd.output().unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}
