//! Many independent simulation runs at once.
//!
//! With the `parallel` feature (on by default) [`run_batch`] spreads jobs
//! over the rayon thread pool; without it the jobs run one after another.
//! Each job is deterministic, so both give identical results in job order.

use crate::sim::{run_trace, SimOptions, SimOutcome, TraceScript};
use crate::{compile_source, CompileOptions, Diagnostics};

#[derive(Debug, Clone, Default)]
pub struct BatchJob {
    pub source: String,
    pub trace: TraceScript,
    pub compile: CompileOptions,
    pub sim: SimOptions,
}

pub type BatchResult = Result<SimOutcome, Diagnostics>;

pub fn run_job(job: &BatchJob) -> BatchResult {
    let program = compile_source(&job.source, &job.compile)?;
    Ok(run_trace(&program, &job.trace, &job.sim))
}

pub fn run_batch_sequential(jobs: &[BatchJob]) -> Vec<BatchResult> {
    jobs.iter().map(run_job).collect()
}

#[cfg(feature = "parallel")]
pub fn run_batch_parallel(jobs: &[BatchJob]) -> Vec<BatchResult> {
    use rayon::prelude::*;
    jobs.par_iter().map(run_job).collect()
}

pub fn run_batch(jobs: &[BatchJob]) -> Vec<BatchResult> {
    #[cfg(feature = "parallel")]
    {
        run_batch_parallel(jobs)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_batch_sequential(jobs)
    }
}
