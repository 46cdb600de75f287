use ndarray::{Array1, ArrayView1};

use crate::error::{invalid, Result};
use crate::model::LccpProblem;
use crate::Scalar;

/// Primal-dual state `w = (u, p)` with the cached constraint residual
/// `Au − b` and shifted multiplier `q = p + γ(Au − b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate<T> {
    pub(crate) u: Array1<T>,
    pub(crate) p: Array1<T>,
    pub(crate) q: Array1<T>,
    pub(crate) residual: Array1<T>,
    pub(crate) k: usize,
}

impl<T: Scalar> Iterate<T> {
    pub fn new(problem: &LccpProblem<T>, u: Array1<T>, p: Array1<T>, gamma: T) -> Result<Self> {
        if u.len() != problem.dim_primal() || p.len() != problem.dim_dual() {
            return invalid(format!(
                "state dimensions ({}, {}) do not match problem ({}, {})",
                u.len(),
                p.len(),
                problem.dim_primal(),
                problem.dim_dual()
            ));
        }
        let residual = problem.constraint_residual(u.view());
        let q = &p + &(&residual * gamma);
        Ok(Self {
            u,
            p,
            q,
            residual,
            k: 0,
        })
    }

    /// `u⁰ = prox(0)` (the projection of the origin onto `U` for the shipped
    /// problems) and `p⁰ = 0`.
    pub fn initial(problem: &LccpProblem<T>, gamma: T) -> Result<Self> {
        let u = problem.prox_all(Array1::zeros(problem.dim_primal()).view(), T::one())?;
        Self::new(problem, u, Array1::zeros(problem.dim_dual()), gamma)
    }

    pub fn u(&self) -> ArrayView1<'_, T> {
        self.u.view()
    }

    pub fn p(&self) -> ArrayView1<'_, T> {
        self.p.view()
    }

    pub fn q(&self) -> ArrayView1<'_, T> {
        self.q.view()
    }

    /// Cached `Au − b`.
    pub fn residual(&self) -> ArrayView1<'_, T> {
        self.residual.view()
    }

    /// Iteration counter.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn into_parts(self) -> (Array1<T>, Array1<T>) {
        (self.u, self.p)
    }

    /// Sets `u`, recomputes the residual, takes the dual step
    /// `p ← p + step·(Au − b)` and refreshes `q`.
    pub(crate) fn advance(
        &mut self,
        problem: &LccpProblem<T>,
        u: Array1<T>,
        dual_step: T,
        gamma: T,
    ) {
        self.u = u;
        self.residual = problem.constraint_residual(self.u.view());
        self.p.scaled_add(dual_step, &self.residual);
        self.q = &self.p + &(&self.residual * gamma);
        self.k += 1;
    }

    /// `‖w − w'‖` over the stacked `(u, p)`.
    pub fn distance_to(&self, u: ArrayView1<'_, T>, p: ArrayView1<'_, T>) -> T {
        let du = &self.u - &u;
        let dp = &self.p - &p;
        (du.dot(&du) + dp.dot(&dp)).sqrt()
    }
}
