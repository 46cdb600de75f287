use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{SaddleReference, SaddleSource};
use crate::error::{invalid, Result};
use crate::model::{BlockPartition, LccpProblem, QuadraticTerm};
use crate::proximal::SeparableTerm;
use crate::solver::solver_rng;
use crate::Scalar;

/// Recipe for a random box-constrained QP with a planted saddle point.
///
/// `G(u) = ½uᵀQu + cᵀu` with `Q = MᵀM/n + shift·I`, `U = [lo, hi]ⁿ` and a
/// random `A`. The plant `(u*, p*)` is drawn (or taken from the spec) and
/// then `b = Au*`, `c = −Qu* − Aᵀp*`, so the KKT conditions hold exactly
/// whenever `u*` is interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub blocks: usize,
    pub lo: f64,
    pub hi: f64,
    /// Strong convexity floor of `Q`.
    pub shift: f64,
    pub planted_u: Option<Vec<f64>>,
    pub planted_p: Option<Vec<f64>>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 100,
            m: 5,
            blocks: 5,
            lo: -1.0,
            hi: 1.0,
            shift: 1.0,
            planted_u: None,
            planted_p: None,
        }
    }
}

impl SyntheticSpec {
    pub fn new(seed: u64, n: usize, m: usize, blocks: usize) -> Self {
        Self {
            seed,
            n,
            m,
            blocks,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return invalid("synthetic instance needs n >= 1 and m >= 1");
        }
        if self.m > self.n {
            return invalid(format!("synthetic instance needs n >= m, got n={} m={}", self.n, self.m));
        }
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return invalid(format!("box [{}, {}] is empty or unbounded", self.lo, self.hi));
        }
        if !(self.shift > 0.0) {
            return invalid("shift must be positive");
        }
        if let Some(u) = &self.planted_u {
            if u.len() != self.n {
                return invalid(format!("planted u has length {}, expected {}", u.len(), self.n));
            }
            if u.iter().any(|&x| !(self.lo < x && x < self.hi)) {
                return invalid("planted u must lie strictly inside the box");
            }
        }
        if let Some(p) = &self.planted_p {
            if p.len() != self.m {
                return invalid(format!("planted p has length {}, expected {}", p.len(), self.m));
            }
        }
        Ok(())
    }
}

pub fn build_synthetic<T: Scalar>(spec: &SyntheticSpec) -> Result<(LccpProblem<T>, SaddleReference<T>)> {
    spec.validate()?;
    let (n, m) = (spec.n, spec.m);
    let mut rng = solver_rng(spec.seed);
    let mut unit = |rows: usize, cols: usize| {
        Array2::from_shape_fn((rows, cols), |_| T::lit(rng.random_range(-1.0..1.0)))
    };
    let mfac = unit(n, n);
    let mut q = mfac.t().dot(&mfac) / T::from_usize_lossy(n);
    q.diag_mut().mapv_inplace(|d| d + T::lit(spec.shift));
    let a = unit(m, n) / T::from_usize_lossy(n).sqrt();

    let width = spec.hi - spec.lo;
    let u_star: Array1<T> = match &spec.planted_u {
        Some(u) => u.iter().map(|&x| T::lit(x)).collect(),
        None => (0..n)
            .map(|_| T::lit(spec.lo + width * rng.random_range(0.25..0.75)))
            .collect(),
    };
    let p_star: Array1<T> = match &spec.planted_p {
        Some(p) => p.iter().map(|&x| T::lit(x)).collect(),
        None => (0..m).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect(),
    };
    let b = a.dot(&u_star);
    let linear = -(q.dot(&u_star) + a.t().dot(&p_star));

    let problem = LccpProblem::new(
        format!("synthetic{}", spec.seed),
        a,
        b,
        BlockPartition::even(n, spec.blocks)?,
        Arc::new(QuadraticTerm::new(q, linear)?),
        Arc::new(SeparableTerm::Box {
            lo: T::lit(spec.lo),
            hi: T::lit(spec.hi),
        }),
    )?
    .with_planted(u_star.clone(), p_star.clone())?;
    let saddle = SaddleReference::new(&problem, u_star, p_star, SaddleSource::Planted)?;
    Ok((problem, saddle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::kkt_residual;
    use ndarray::array;

    #[test]
    fn planted_toy_is_exact() {
        let spec = SyntheticSpec {
            n: 2,
            m: 1,
            blocks: 2,
            planted_u: Some(vec![0.5, 0.5]),
            planted_p: Some(vec![0.0]),
            ..SyntheticSpec::default()
        };
        let (problem, saddle) = build_synthetic::<f64>(&spec).unwrap();
        assert_eq!(saddle.u_star, array![0.5, 0.5]);
        assert!(kkt_residual(&problem, &saddle) <= 1e-12);
        let r = problem.constraint_residual(saddle.u_star.view());
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn seeds_give_distinct_exact_instances() {
        let mut hashes = Vec::new();
        for seed in 0..5 {
            let (problem, saddle) = build_synthetic::<f64>(&SyntheticSpec::new(seed, 30, 3, 3)).unwrap();
            assert!(kkt_residual(&problem, &saddle) <= 1e-12);
            let r = problem.constraint_residual(saddle.u_star.view());
            assert!(r.iter().all(|v| v.abs() <= 1e-12));
            hashes.push(problem.hash());
        }
        hashes.sort();
        hashes.dedup();
        assert_eq!(hashes.len(), 5);
    }

    #[test]
    fn infeasible_specs_rejected() {
        let bad_plant = SyntheticSpec {
            n: 2,
            m: 1,
            blocks: 1,
            planted_u: Some(vec![2.0, 0.0]),
            ..SyntheticSpec::default()
        };
        assert!(build_synthetic::<f64>(&bad_plant).is_err());
        assert!(build_synthetic::<f64>(&SyntheticSpec::new(0, 2, 3, 1)).is_err());
    }
}
