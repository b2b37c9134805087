//! Reference interpreter.
//!
//! Each loop iteration runs deduction to a fixpoint stratum by stratum,
//! then the output rules, the inductive rules and the input rules, each in
//! program order, and finally switches buffers. Rule bodies are evaluated
//! with the same nested scans over the live buffer that the generated C
//! performs, so fact order in memory and the order of IO calls match it.

mod board;
mod log;
mod trace;

use std::collections::HashMap;

use crate::analyzer::{AnalyzedProgram, HeadPlan, IoArg, RulePlan, ScanArg, Step};
use crate::model::{IoDefinition, ParamMode, RuleKind};
use crate::store::{Buffer, FactStore};

pub use board::{VirtualBoard, DEFAULT_TICK_MS};
pub use log::{mode_name, Event, EventLog};
pub use trace::{PinEvent, TraceError, TraceScript};

/// Steps run when the trace has no `end` and no step limit is given.
pub const DEFAULT_STEPS_WITHOUT_END: u64 = 1000;

/// Handler for a user-defined IO predicate. Receives the virtual time and
/// the argument values (0 in Set positions); returns one value per Set
/// parameter, in parameter order.
pub type IoHandler = Box<dyn FnMut(u32, &[i64]) -> Result<Vec<i64>, String> + Send>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub max_steps: Option<u64>,
    pub tick_ms: Option<u32>,
    pub dump_facts: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepReport {
    pub step: u64,
    /// Facts added to the current state by deduction.
    pub derived: usize,
    /// Log entries appended during the step, step marker excluded.
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub log: EventLog,
    /// `step <n>: ...` lines, when requested.
    pub dumps: Vec<String>,
    pub steps: u64,
    pub faulted: bool,
}

pub struct Simulator<'a> {
    program: &'a AnalyzedProgram,
    store: FactStore,
    board: VirtualBoard,
    log: EventLog,
    step: u64,
    handlers: HashMap<String, IoHandler>,
    dumps: Option<Vec<String>>,
    halted: bool,
    started: bool,
}

type Fault = String;

impl<'a> Simulator<'a> {
    pub fn new(program: &'a AnalyzedProgram, trace: &TraceScript, opts: &SimOptions) -> Self {
        Simulator {
            program,
            store: FactStore::new(program.layout.clone()),
            board: VirtualBoard::new(trace, opts.tick_ms),
            log: EventLog::default(),
            step: 0,
            handlers: HashMap::new(),
            dumps: opts.dump_facts.then(Vec::new),
            halted: false,
            started: false,
        }
    }

    /// Supplies the behavior of a user-defined IO predicate.
    pub fn bind_io(&mut self, name: &str, handler: IoHandler) {
        self.handlers.insert(name.to_string(), handler);
    }

    pub fn store(&self) -> &FactStore {
        &self.store
    }

    pub fn board(&self) -> &VirtualBoard {
        &self.board
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    fn fault(&mut self, text: String) {
        self.log.push(Event::Fault {
            t: self.board.clock_ms,
            text,
        });
        self.halted = true;
    }

    /// Loads the timestamp-0 facts; done implicitly by the first step.
    pub fn start(&mut self) {
        if self.started {
            return;
        }
        self.started = true;
        if let Err(f) = self.check_bindings() {
            self.fault(f);
            return;
        }
        for f in &self.program.facts {
            if let Err(e) = self.store.insert(Buffer::Current, f.pred, &f.args) {
                self.fault(e.to_string());
                return;
            }
        }
    }

    fn check_bindings(&self) -> Result<(), Fault> {
        let mut used: Vec<usize> = Vec::new();
        for plan in &self.program.plans {
            if let HeadPlan::Io { io, .. } = &plan.head {
                used.push(*io);
            }
            for s in &plan.steps {
                if let Step::Io { io, .. } = s {
                    used.push(*io);
                }
            }
        }
        for io in used {
            let name = &self.program.io_definitions[io].name;
            if !self.handlers.contains_key(name) && crate::stdlib::definition(name).is_none() {
                return Err(format!("no simulation binding for IO predicate #{name}"));
            }
        }
        Ok(())
    }

    /// Runs one loop iteration. Returns `None` once the run has faulted.
    pub fn step(&mut self) -> Option<StepReport> {
        self.start();
        if self.halted {
            return None;
        }
        let step = self.step;
        self.board.enter_step(step);
        self.log.push(Event::StepMarker {
            step,
            t: self.board.clock_ms,
        });
        let before_events = self.log.events.len();
        let before_used = self.store.offsets(Buffer::Current).len();
        match self.run_phases() {
            Ok(()) => {}
            Err(f) => {
                self.fault(f);
                return None;
            }
        }
        let derived = self.store.offsets(Buffer::Current).len() - before_used;
        self.store.switch_buffers();
        self.step += 1;
        Some(StepReport {
            step,
            derived,
            events: self.log.events.len() - before_events,
        })
    }

    fn run_phases(&mut self) -> Result<(), Fault> {
        self.run_deduction_phase()?;
        if let Some(d) = &mut self.dumps {
            let facts = self.store.dump(Buffer::Current).to_string();
            let line = if facts.is_empty() {
                format!("step {}:", self.step)
            } else {
                format!("step {}: {facts}", self.step)
            };
            d.push(line);
        }
        self.run_output_phase()?;
        self.run_induction_phase()?;
        self.run_input_phase()
    }

    pub fn run_deduction_phase(&mut self) -> Result<(), Fault> {
        let program = self.program;
        for stratum in &program.stratification.deductive {
            loop {
                let mut added = false;
                for &ri in stratum {
                    added |= self.eval_rule(ri)?;
                }
                if !added {
                    break;
                }
            }
        }
        Ok(())
    }

    fn run_kind(&mut self, kind: RuleKind) -> Result<(), Fault> {
        let program = self.program;
        for ri in program.rules_of(kind) {
            self.eval_rule(ri)?;
        }
        Ok(())
    }

    pub fn run_output_phase(&mut self) -> Result<(), Fault> {
        self.run_kind(RuleKind::Output)
    }

    pub fn run_induction_phase(&mut self) -> Result<(), Fault> {
        self.run_kind(RuleKind::Inductive)
    }

    pub fn run_input_phase(&mut self) -> Result<(), Fault> {
        self.run_kind(RuleKind::Input)
    }

    /// Evaluates rule `ri` once; true if it inserted a fact.
    fn eval_rule(&mut self, ri: usize) -> Result<bool, Fault> {
        let plan = &self.program.plans[ri];
        let mut vars = vec![0i64; plan.vars.len()];
        let mut inserted = false;
        self.exec(plan, 0, &mut vars, &mut inserted)?;
        Ok(inserted)
    }

    fn exec(
        &mut self,
        plan: &'a RulePlan,
        at: usize,
        vars: &mut [i64],
        inserted: &mut bool,
    ) -> Result<(), Fault> {
        let Some(step) = plan.steps.get(at) else {
            return self.fire_head(plan, vars, inserted);
        };
        match step {
            Step::Scan { pred, args, .. } => {
                let size = self.store.layout().predicates[*pred].size;
                let bound: Vec<Option<i64>> = args
                    .iter()
                    .map(|a| match a {
                        ScanArg::Bound(op) => Some(op.value(vars)),
                        _ => None,
                    })
                    .collect();
                let mut pos = 0;
                while let Some(found) = self.store.find(Buffer::Current, *pred, &bound, pos) {
                    let mut same = true;
                    for (i, a) in args.iter().enumerate() {
                        match a {
                            ScanArg::Bind(v) => vars[*v] = self.store.read_arg(Buffer::Current, found, i),
                            ScanArg::Same(v) => {
                                same &= self.store.read_arg(Buffer::Current, found, i) == vars[*v]
                            }
                            ScanArg::Bound(_) => {}
                        }
                    }
                    if same {
                        self.exec(plan, at + 1, vars, inserted)?;
                    }
                    pos = found + size;
                }
                Ok(())
            }
            Step::Absent { pred, args } => {
                let bound: Vec<Option<i64>> = args.iter().map(|a| Some(a.value(vars))).collect();
                if self.store.find(Buffer::Current, *pred, &bound, 0).is_none() {
                    self.exec(plan, at + 1, vars, inserted)?;
                }
                Ok(())
            }
            Step::Check(c) => {
                if c.holds(vars) {
                    self.exec(plan, at + 1, vars, inserted)?;
                }
                Ok(())
            }
            Step::Io { io, args } => {
                let sets = self.call_io(*io, args, vars)?;
                let def = &self.program.io_definitions[*io];
                let mut results = sets.into_iter();
                for (a, p) in args.iter().zip(&def.params) {
                    if let IoArg::Set(v) = a {
                        let ty = p.set_type.expect("set parameters carry a type");
                        vars[*v] = ty.wrap(results.next().unwrap_or(0));
                    }
                }
                self.exec(plan, at + 1, vars, inserted)
            }
        }
    }

    fn fire_head(&mut self, plan: &RulePlan, vars: &[i64], inserted: &mut bool) -> Result<(), Fault> {
        match &plan.head {
            HeadPlan::Insert { pred, next, args } => {
                let values: Vec<i64> = args.iter().map(|a| a.value(vars)).collect();
                let buf = if *next { Buffer::Next } else { Buffer::Current };
                *inserted |= self
                    .store
                    .insert(buf, *pred, &values)
                    .map_err(|e| e.to_string())?;
                Ok(())
            }
            HeadPlan::Io { io, args } => self.call_io(*io, args, vars).map(|_| ()),
        }
    }

    /// Performs an IO action; returns the values of its Set parameters.
    fn call_io(&mut self, io: usize, args: &[IoArg], vars: &[i64]) -> Result<Vec<i64>, Fault> {
        let def: &IoDefinition = &self.program.io_definitions[io];
        let mut values = Vec::with_capacity(args.len());
        for a in args {
            values.push(match a {
                IoArg::Read(op) => op.value(vars),
                IoArg::Set(_) => 0,
                IoArg::Verbatim(name) => {
                    return Err(format!(
                        "constant #{name} passed to #{} has no simulated value",
                        def.name
                    ))
                }
            });
        }
        if let Some(h) = self.handlers.get_mut(&def.name) {
            let out = h(self.board.clock_ms, &values)
                .map_err(|e| format!("#{}: {e}", def.name))?;
            let n_set = def.params.iter().filter(|p| p.mode == ParamMode::Set).count();
            if out.len() != n_set {
                return Err(format!(
                    "#{} binding returned {} values for {} set parameters",
                    def.name,
                    out.len(),
                    n_set
                ));
            }
            return Ok(out);
        }
        let log = &mut self.log;
        Ok(match def.name.as_str() {
            "pinIn" => {
                self.board.pin_mode(values[0], crate::stdlib::INPUT, log);
                vec![]
            }
            "pinOut" => {
                self.board.pin_mode(values[0], crate::stdlib::OUTPUT, log);
                vec![]
            }
            "digitalWrite" => {
                self.board.digital_write(values[0], values[1], log);
                vec![]
            }
            "digitalRead" => vec![self.board.digital_read(values[0], log)],
            "millis" => vec![self.board.millis() as i64],
            other => return Err(format!("no simulation binding for IO predicate #{other}")),
        })
    }

    /// Steps until the trace end, the step limit, or a fault.
    pub fn run(mut self, trace: &TraceScript, opts: &SimOptions) -> SimOutcome {
        let limit = match (trace.end_ms, opts.max_steps) {
            (_, Some(k)) => k,
            (Some(_), None) => u64::MAX,
            (None, None) => DEFAULT_STEPS_WITHOUT_END,
        };
        self.start();
        while !self.halted && self.step < limit {
            if let Some(end) = trace.end_ms {
                if self.board.step_time(self.step) > end as u64 {
                    break;
                }
            }
            self.step();
        }
        SimOutcome {
            steps: self.step,
            faulted: self.halted,
            log: self.log,
            dumps: self.dumps.unwrap_or_default(),
        }
    }
}

/// Simulates `program` against `trace` with the standard IO bindings only.
pub fn run_trace(program: &AnalyzedProgram, trace: &TraceScript, opts: &SimOptions) -> SimOutcome {
    Simulator::new(program, trace, opts).run(trace, opts)
}
