//! Pairwise random coordinate descent for
//! `min ½uᵀHu + ⟨l, u⟩  s.t.  aᵀu = b, lo ≤ u ≤ hi`.
//!
//! Each step draws an unordered coordinate pair `(i, j)` uniformly and
//! moves along `d = e_i − (a_i/a_j) e_j`, which keeps `aᵀu` fixed, by exact
//! line search clipped to the box. This is a reconstruction of the
//! pairwise-feasible-direction idea for a comparison baseline; it makes no
//! claim to match any particular published variant.

use ndarray::{Array1, ArrayView1};
use rand::Rng;

use crate::diagnostics::{RunMetadata, TraceRecorder};
use crate::error::{invalid, Error, Result};
use crate::model::{LccpProblem, QuadraticTerm};
use crate::proximal::clip;
use crate::runner::{drive, Budget, Callback, RunFailure, RunOutcome};
use crate::solver::{solver_rng, Iterate};
use crate::Scalar;

const FEASIBILITY_TOL: f64 = 1e-10;
const GRADIENT_REFRESH: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RcdParams {
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for RcdParams {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iter: 100_000,
        }
    }
}

pub struct Rcd<'a, T: Scalar> {
    problem: &'a LccpProblem<T>,
    quad: &'a QuadraticTerm<T>,
    a: ArrayView1<'a, T>,
    lo: T,
    hi: T,
    params: RcdParams,
}

impl<'a, T: Scalar> Rcd<'a, T> {
    /// Requires one equality row, a quadratic `G`, `J = 0` and a box `U`.
    pub fn new(problem: &'a LccpProblem<T>, params: RcdParams) -> Result<Self> {
        if problem.dim_dual() != 1 {
            return invalid(format!(
                "pairwise coordinate descent needs exactly one constraint, got {}",
                problem.dim_dual()
            ));
        }
        if problem.dim_primal() < 2 {
            return invalid("pairwise coordinate descent needs at least two variables");
        }
        let quad = problem
            .smooth()
            .as_quadratic()
            .ok_or_else(|| Error::Unsupported("pairwise coordinate descent needs a quadratic objective".into()))?;
        let (lo, hi) = problem
            .nonsmooth()
            .box_bounds()
            .ok_or_else(|| Error::Unsupported("pairwise coordinate descent needs J = 0 with box constraints".into()))?;
        Ok(Self {
            problem,
            quad,
            a: problem.a().row(0),
            lo,
            hi,
            params,
        })
    }

    pub fn metadata(&self) -> RunMetadata {
        let mut meta = RunMetadata::for_problem(self.problem, "rcd");
        meta.seed = Some(self.params.seed);
        meta.max_iter = self.params.max_iter;
        meta
    }

    /// Runs from a feasible `u0` for `max_iter` pair steps. The multiplier
    /// in the reported state is held at zero.
    pub fn run(
        &self,
        u0: Array1<T>,
        recorder: TraceRecorder<'_, T>,
        callbacks: &mut [&mut dyn Callback<T>],
    ) -> std::result::Result<RunOutcome<T>, RunFailure<T>> {
        let blank = |error| RunFailure {
            error,
            trace: Default::default(),
            state: Iterate {
                u: Array1::zeros(0),
                p: Array1::zeros(0),
                q: Array1::zeros(0),
                residual: Array1::zeros(0),
                k: 0,
            },
        };
        let init = Iterate::new(self.problem, u0, Array1::zeros(1), T::zero()).map_err(blank)?;
        if init.residual[0].abs() > T::lit(FEASIBILITY_TOL) {
            return Err(blank(Error::InvalidArgument(format!(
                "start point violates a^T u = b by {:e}",
                init.residual[0]
            ))));
        }
        if !init.u.iter().all(|&x| self.lo <= x && x <= self.hi) {
            return Err(blank(Error::InvalidArgument("start point lies outside the box".into())));
        }

        let mut rng = solver_rng(self.params.seed);
        let mut grad = self.quad.gradient_of(init.u.view());
        let budget = Budget {
            max_iter: self.params.max_iter,
            tol_kkt: T::zero(),
            kkt_every: 1,
        };
        drive(self.problem, init, budget, recorder, self.metadata(), callbacks, |state| {
            self.pair_step(state, &mut grad, &mut rng);
            if state.k % GRADIENT_REFRESH == 0 {
                grad = self.quad.gradient_of(state.u.view());
            }
            Ok(())
        })
    }

    fn draw_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let n = self.a.len();
        loop {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            if self.a[j] != T::zero() {
                return (i, j);
            }
        }
    }

    fn pair_step<R: Rng + ?Sized>(&self, state: &mut Iterate<T>, grad: &mut Array1<T>, rng: &mut R) {
        let (i, j) = self.draw_pair(rng);
        let h = self.quad.hessian();
        let ratio = self.a[i] / self.a[j];
        let slope = grad[i] - ratio * grad[j];
        let curv = h[[i, i]] - T::lit(2.0) * ratio * h[[i, j]] + ratio * ratio * h[[j, j]];
        let (ui, uj) = (state.u[i], state.u[j]);

        // t keeps u_i + t and u_j − ratio·t inside [lo, hi]
        let mut t_min = self.lo - ui;
        let mut t_max = self.hi - ui;
        if ratio > T::zero() {
            t_min = t_min.max((uj - self.hi) / ratio);
            t_max = t_max.min((uj - self.lo) / ratio);
        } else if ratio < T::zero() {
            t_min = t_min.max((uj - self.lo) / ratio);
            t_max = t_max.min((uj - self.hi) / ratio);
        }
        let t_star = if curv > T::zero() {
            -slope / curv
        } else if slope < T::zero() {
            t_max
        } else if slope > T::zero() {
            t_min
        } else {
            T::zero()
        };
        let t = clip(t_star, t_min.min(T::zero()), t_max.max(T::zero()));
        if t != T::zero() && t.is_finite() {
            state.u[i] = clip(ui + t, self.lo, self.hi);
            state.u[j] = clip(uj - ratio * t, self.lo, self.hi);
            let di = state.u[i] - ui;
            let dj = state.u[j] - uj;
            grad.scaled_add(di, &h.column(i));
            grad.scaled_add(dj, &h.column(j));
        }
        state.residual = self.problem.constraint_residual(state.u.view());
        state.k += 1;
    }
}

impl<T: Scalar> QuadraticTerm<T> {
    pub(crate) fn gradient_of(&self, u: ArrayView1<'_, T>) -> Array1<T> {
        self.hessian().dot(&u) + self.linear()
    }
}
