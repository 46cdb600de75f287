//! Shared iteration driver: stopping test, callbacks, trace recording and
//! per-step timing for every algorithm in the crate.

use std::fmt;
use std::time::{Duration, Instant};

use crate::diagnostics::{kkt_residual, RunMetadata, RunTrace, TraceRecorder};
use crate::error::Error;
use crate::model::LccpProblem;
use crate::solver::{Iterate, SolverParams};
use crate::Scalar;

/// Per-iteration hook. A returned error aborts the run.
pub trait Callback<T> {
    fn on_step(&mut self, state: &Iterate<T>) -> crate::Result<()>;
}

impl<T, F> Callback<T> for F
where
    F: FnMut(&Iterate<T>) -> crate::Result<()>,
{
    fn on_step(&mut self, state: &Iterate<T>) -> crate::Result<()> {
        self(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIter,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxIter => "max_iter",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome<T> {
    pub trace: RunTrace<T>,
    pub state: Iterate<T>,
    pub stop: StopReason,
    /// Wall time of every iteration step, in seconds.
    pub step_seconds: Vec<f64>,
}

impl<T> RunOutcome<T> {
    pub fn iterations(&self) -> usize {
        self.step_seconds.len()
    }

    /// Mean step time with the top and bottom 1% dropped.
    pub fn mean_step_seconds(&self) -> f64 {
        trimmed_mean(&self.step_seconds, 0.01)
    }
}

/// A run aborted by a step or callback error, with what was recorded.
#[derive(Debug)]
pub struct RunFailure<T> {
    pub error: Error,
    pub trace: RunTrace<T>,
    pub state: Iterate<T>,
}

impl<T> fmt::Display for RunFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted after {} recorded points: {}",
            self.trace.records.len(),
            self.error
        )
    }
}

impl<T: fmt::Debug> std::error::Error for RunFailure<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl<T> From<RunFailure<T>> for Error {
    fn from(f: RunFailure<T>) -> Self {
        f.error
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Budget<T> {
    pub max_iter: usize,
    pub tol_kkt: T,
    pub kkt_every: usize,
}

impl<T: Scalar> Budget<T> {
    pub fn from_params(params: &SolverParams<T>) -> Self {
        Self {
            max_iter: params.max_iter,
            tol_kkt: params.tol_kkt,
            kkt_every: params.kkt_every.max(1),
        }
    }
}

pub(crate) fn drive<T, S>(
    problem: &LccpProblem<T>,
    init: Iterate<T>,
    budget: Budget<T>,
    mut recorder: TraceRecorder<'_, T>,
    metadata: RunMetadata,
    callbacks: &mut [&mut dyn Callback<T>],
    mut step: S,
) -> Result<RunOutcome<T>, RunFailure<T>>
where
    T: Scalar,
    S: FnMut(&mut Iterate<T>) -> crate::Result<()>,
{
    let mut state = init;
    let mut step_seconds = Vec::with_capacity(budget.max_iter.min(1 << 20));
    let mut elapsed = Duration::ZERO;
    let check = budget.tol_kkt > T::zero();
    let mut stop = StopReason::MaxIter;

    recorder.record(&state, elapsed);
    for it in 0..budget.max_iter {
        if check
            && it % budget.kkt_every == 0
            && kkt_residual(problem, &state) <= budget.tol_kkt
        {
            stop = StopReason::Converged;
            break;
        }
        let t0 = Instant::now();
        let stepped = step(&mut state);
        let dt = t0.elapsed();
        let failed = stepped.err().or_else(|| {
            callbacks
                .iter_mut()
                .find_map(|cb| cb.on_step(&state).err())
        });
        if let Some(error) = failed {
            recorder.record(&state, elapsed);
            return Err(RunFailure {
                error,
                trace: recorder.finish(metadata),
                state,
            });
        }
        elapsed += dt;
        step_seconds.push(dt.as_secs_f64());
        if recorder.wants(state.k()) {
            recorder.record(&state, elapsed);
        }
    }
    if stop == StopReason::MaxIter
        && check
        && kkt_residual(problem, &state) <= budget.tol_kkt
    {
        stop = StopReason::Converged;
    }
    recorder.record_final(&state, elapsed);
    let mut meta = metadata;
    meta.iterations = state.k();
    meta.stop_reason = stop.to_string();
    meta.mean_step_us = trimmed_mean(&step_seconds, 0.01) * 1e6;
    Ok(RunOutcome {
        trace: recorder.finish(meta),
        state,
        stop,
        step_seconds,
    })
}

/// Mean after dropping `frac` of the samples at each end.
pub fn trimmed_mean(values: &[f64], frac: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let cut = ((v.len() as f64) * frac).floor() as usize;
    let kept = &v[cut..v.len() - cut];
    if kept.is_empty() {
        return v[v.len() / 2];
    }
    kept.iter().sum::<f64>() / kept.len() as f64
}
