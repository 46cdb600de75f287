use std::sync::Arc;

use ndarray::{stack, Array1, Array2, Axis};

use super::{check_symmetric, regularize};
use crate::error::{invalid, Result};
use crate::model::{BlockPartition, LccpProblem, ProblemMeta, QuadraticTerm};
use crate::proximal::SeparableTerm;
use crate::Scalar;

/// Mean-variance portfolio with an ℓ1 penalty:
/// `min ½uᵀΣu + λ‖u‖₁  s.t.  μᵀu = target, 1ᵀu = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpInstance<T> {
    pub sigma: Array2<T>,
    pub mu: Array1<T>,
    pub target: T,
    pub lambda: T,
}

impl<T: Scalar> MlpInstance<T> {
    pub fn validate(&self) -> Result<()> {
        check_symmetric(&self.sigma, "covariance")?;
        if self.mu.len() != self.sigma.nrows() {
            return invalid(format!(
                "{} expected returns for {} assets",
                self.mu.len(),
                self.sigma.nrows()
            ));
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return invalid(format!("l1 weight must be finite and >= 0, got {}", self.lambda));
        }
        if !self.target.is_finite() || self.mu.iter().any(|v| !v.is_finite()) {
            return invalid("returns and target must be finite");
        }
        Ok(())
    }
}

/// `G(u) = ½uᵀΣu`, `J = λ‖u‖₁`, `A = [μᵀ; 1ᵀ]`, `b = (target, 1)`, split
/// evenly into `blocks` blocks. A constant `μ` makes the two rows parallel;
/// this is reported as a warning rather than an error.
pub fn build_mlp<T: Scalar>(instance: &MlpInstance<T>, blocks: usize) -> Result<LccpProblem<T>> {
    instance.validate()?;
    let n = instance.mu.len();
    let mut meta = ProblemMeta::default();
    let first = instance.mu[0];
    if instance.mu.iter().all(|&v| v == first) {
        let msg = "expected returns are all equal; the constraint rows are parallel and multipliers are not unique".to_string();
        log::warn!("{msg}");
        meta.warnings.push(msg);
    }
    let sigma = regularize(instance.sigma.clone(), &mut meta);
    let smooth = QuadraticTerm::new(sigma, Array1::zeros(n))?;
    let ones = Array1::<T>::ones(n);
    let a = stack(Axis(0), &[instance.mu.view(), ones.view()]).expect("rows share length");
    let problem = LccpProblem::new(
        "mlp",
        a,
        ndarray::array![instance.target, T::one()],
        BlockPartition::even(n, blocks)?,
        Arc::new(smooth),
        Arc::new(SeparableTerm::L1 {
            weight: instance.lambda,
        }),
    )?;
    Ok(problem.with_meta(meta))
}
