use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::kkt::kkt_residual;
use super::lyapunov::{lyapunov_lambda, lyapunov_phi};
use super::oracle::SaddleReference;
use crate::model::{CoreFunction, LccpProblem};
use crate::solver::{Iterate, SolverParams};
use crate::Scalar;

/// Column order of the trace CSV.
pub const TRACE_HEADER: [&str; 8] = [
    "iter", "dist_w", "subopt", "feas", "kkt", "lambda", "phi", "time_ms",
];

/// One recorded iteration. Saddle-dependent columns are NaN when no saddle
/// reference was supplied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord<T> {
    pub iter: usize,
    /// `‖w^k − w*‖`
    pub dist_w: T,
    /// `F(u^k) − F*`
    pub subopt: T,
    /// `‖Au^k − b‖`
    pub feas: T,
    pub kkt: T,
    pub lambda: T,
    pub phi: T,
    /// Cumulative time spent inside iteration steps.
    pub time_ms: T,
}

/// Run description written next to a trace.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub algorithm: String,
    pub problem: String,
    pub problem_hash: String,
    pub n: usize,
    pub m: usize,
    pub blocks: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub rho: f64,
    pub seed: Option<u64>,
    pub max_iter: usize,
    pub tol_kkt: f64,
    pub jitter: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub stop_reason: String,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default)]
    pub mean_step_us: f64,
}

impl RunMetadata {
    pub fn for_problem<T: Scalar>(problem: &LccpProblem<T>, algorithm: &str) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            problem: problem.name().to_string(),
            problem_hash: problem.hash(),
            n: problem.dim_primal(),
            m: problem.dim_dual(),
            blocks: problem.num_blocks(),
            jitter: problem.meta().jitter,
            warnings: problem.meta().warnings.clone(),
            ..Self::default()
        }
    }

    pub fn with_params<T: Scalar>(mut self, params: &SolverParams<T>, seed: Option<u64>) -> Self {
        self.epsilon = params.epsilon.to_f64_lossy();
        self.gamma = params.gamma.to_f64_lossy();
        self.rho = params.rho.to_f64_lossy();
        self.seed = seed;
        self.max_iter = params.max_iter;
        self.tol_kkt = params.tol_kkt.to_f64_lossy();
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace<T> {
    pub records: Vec<TraceRecord<T>>,
    pub metadata: RunMetadata,
}

impl<T> Default for RunTrace<T> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
            metadata: RunMetadata::default(),
        }
    }
}

impl<T: Scalar> RunTrace<T> {
    pub fn last(&self) -> Option<&TraceRecord<T>> {
        self.records.last()
    }

    pub fn iters(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.iter).collect()
    }

    pub fn column(&self, f: impl Fn(&TraceRecord<T>) -> T) -> Vec<T> {
        self.records.iter().map(f).collect()
    }

    /// `iter` strictly increasing and `time_ms` non-decreasing.
    pub fn is_well_ordered(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[0].iter < w[1].iter && !(w[1].time_ms < w[0].time_ms))
    }
}

/// Which columns a recorder evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metrics {
    /// Every column.
    Full,
    /// Only `subopt` and `feas` (no KKT residual or Lyapunov values).
    Objective,
}

/// Evaluates trace columns for selected iterations of a run.
pub struct TraceRecorder<'a, T: Scalar> {
    problem: &'a LccpProblem<T>,
    saddle: Option<&'a SaddleReference<T>>,
    lyapunov: Option<(&'a CoreFunction<T>, SolverParams<T>)>,
    stride: usize,
    metrics: Metrics,
    records: Vec<TraceRecord<T>>,
}

impl<'a, T: Scalar> TraceRecorder<'a, T> {
    /// Records every iteration with all columns.
    pub fn new(problem: &'a LccpProblem<T>) -> Self {
        Self {
            problem,
            saddle: None,
            lyapunov: None,
            stride: 1,
            metrics: Metrics::Full,
            records: Vec::new(),
        }
    }

    pub fn with_saddle(mut self, saddle: &'a SaddleReference<T>) -> Self {
        self.saddle = Some(saddle);
        self
    }

    /// Enables `Λ` and `φ` columns (requires a saddle as well).
    pub fn with_lyapunov(mut self, core: &'a CoreFunction<T>, params: SolverParams<T>) -> Self {
        self.lyapunov = Some((core, params));
        self
    }

    /// Record every `stride` iterations; `0` keeps only the first and last.
    pub fn every(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn metrics(mut self, metrics: Metrics) -> Self {
        self.metrics = metrics;
        self
    }

    pub fn wants(&self, k: usize) -> bool {
        self.stride > 0 && k.is_multiple_of(self.stride)
    }

    pub fn record(&mut self, state: &Iterate<T>, elapsed: Duration) {
        if self.records.last().is_some_and(|r| r.iter >= state.k()) {
            return;
        }
        let rec = self.evaluate(state, elapsed);
        self.records.push(rec);
    }

    pub(crate) fn record_final(&mut self, state: &Iterate<T>, elapsed: Duration) {
        self.record(state, elapsed);
    }

    pub fn evaluate(&self, state: &Iterate<T>, elapsed: Duration) -> TraceRecord<T> {
        let nan = T::nan();
        let problem = self.problem;
        let feas = {
            let r = state.residual();
            r.dot(&r).sqrt()
        };
        let objective = problem.objective(state.u());
        let full = self.metrics == Metrics::Full;
        let (dist_w, subopt) = match self.saddle {
            Some(s) => (
                if full {
                    state.distance_to(s.u_star.view(), s.p_star.view())
                } else {
                    nan
                },
                objective - s.f_star,
            ),
            None => (nan, nan),
        };
        let kkt = if full {
            kkt_residual(problem, state)
        } else {
            nan
        };
        let (lambda, phi) = match (self.saddle, self.lyapunov.as_ref(), full) {
            (Some(s), Some((core, params)), true) => (
                lyapunov_lambda(problem, core, params, state, s, s),
                lyapunov_phi(problem, core, params, state, s),
            ),
            _ => (nan, nan),
        };
        TraceRecord {
            iter: state.k(),
            dist_w,
            subopt,
            feas,
            kkt,
            lambda,
            phi,
            time_ms: T::lit(elapsed.as_secs_f64() * 1e3),
        }
    }

    pub fn finish(self, metadata: RunMetadata) -> RunTrace<T> {
        RunTrace {
            records: self.records,
            metadata,
        }
    }
}
