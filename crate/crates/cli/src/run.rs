//! One (algorithm, N, seed) cell: parameter resolution, the run itself and
//! its trace file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use ndarray::Array1;

use rpdc::dataio::write_trace_csv;
use rpdc::{
    auto_params, kkt_residual, validate_params, AppAl, Core, Params, Problem, Rcd, RcdParams, Rpdc,
    RunFailure, RunOutcome, Saddle, State, Trace, TraceRecorder,
};

use crate::config::{Algorithm, ExperimentConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub blocks: usize,
    pub seed: u64,
}

impl Cell {
    pub fn file_name(&self, problem: &str) -> String {
        format!("{problem}_{}_N{}_seed{}.csv", self.algorithm, self.blocks, self.seed)
    }
}

/// Cells in output order: blocks, then algorithm, then seed. Deterministic
/// algorithms get one cell per `N`, under the first seed.
pub fn cells(cfg: &ExperimentConfig, algorithms: &[Algorithm], seed_offset: u64) -> Vec<Cell> {
    let seeds: Vec<u64> = cfg.seeds.iter().map(|s| s + seed_offset).collect();
    let first = seeds.first().copied().unwrap_or(seed_offset);
    let mut out = Vec::new();
    for &blocks in &cfg.blocks {
        for &algorithm in algorithms {
            let seeds = if algorithm.is_randomized() { &seeds[..] } else { std::slice::from_ref(&first) };
            out.extend(seeds.iter().map(|&seed| Cell { algorithm, blocks, seed }));
        }
    }
    out
}

/// Explicit `(ε, ρ)` are validated against the convergence window; otherwise
/// the window is scaled by `theta`.
pub fn resolve_params(problem: &Problem, core: &Core, cfg: &ExperimentConfig, cell: &Cell) -> Result<Params> {
    let p = &cfg.params;
    let params = match (p.epsilon, p.rho) {
        (Some(eps), Some(rho)) => {
            let params = Params::new(eps, p.gamma, rho);
            if cell.algorithm == Algorithm::Rpdc {
                validate_params(problem, core, &params).map_err(|r| anyhow!("{r}"))?;
            }
            params
        }
        _ => auto_params(problem, core, p.gamma, p.theta)?,
    };
    Ok(params
        .with_seed(cell.seed)
        .with_max_iter(cfg.max_iter)
        .with_tol(cfg.tol)
        .with_kkt_every(cfg.kkt_every))
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub trace: Trace,
    pub path: PathBuf,
    pub objective: f64,
    pub feas: f64,
    pub kkt: f64,
    pub iterations: usize,
    pub mean_step_us: f64,
}

pub fn run_cell(
    problem: &Problem,
    label: &str,
    saddle: Option<&Saddle>,
    cfg: &ExperimentConfig,
    cell: Cell,
    out_dir: &Path,
) -> Result<CellResult> {
    let core = Core::half_squared_norm();
    let mut recorder = TraceRecorder::new(problem).every(cfg.stride());
    if let Some(s) = saddle {
        recorder = recorder.with_saddle(s);
    }
    let path = out_dir.join(cell.file_name(label));
    let outcome = match cell.algorithm {
        Algorithm::Rpdc | Algorithm::Appal => {
            let params = resolve_params(problem, &core, cfg, &cell)?;
            if saddle.is_some() {
                recorder = recorder.with_lyapunov(&core, params);
            }
            let init = State::initial(problem, params.gamma)?;
            if cell.algorithm == Algorithm::Rpdc {
                Rpdc::new(problem, &core, params)?.run(init, recorder, &mut [])
            } else {
                AppAl::new(problem, &core, params)?.run(init, recorder, &mut [])
            }
        }
        Algorithm::Rcd => {
            let rcd = Rcd::new(problem, RcdParams { seed: cell.seed, max_iter: cfg.max_iter })?;
            rcd.run(Array1::zeros(problem.dim_primal()), recorder, &mut [])
        }
    };
    let outcome = finish(outcome, &path)?;
    let state = &outcome.state;
    let r = state.residual();
    Ok(CellResult {
        cell,
        objective: problem.objective(state.u()),
        feas: r.dot(&r).sqrt(),
        kkt: kkt_residual(problem, state),
        iterations: outcome.iterations(),
        mean_step_us: outcome.mean_step_seconds() * 1e6,
        trace: outcome.trace,
        path,
    })
}

/// Writes the trace; an aborted run still leaves its partial trace behind.
fn finish(outcome: Result<RunOutcome<f64>, RunFailure<f64>>, path: &Path) -> Result<RunOutcome<f64>> {
    match outcome {
        Ok(o) => {
            write_trace_csv(&o.trace, path)?;
            Ok(o)
        }
        Err(f) => {
            write_trace_csv(&f.trace, path)?;
            Err(anyhow!("{f} (partial trace in {})", path.display()))
        }
    }
}
