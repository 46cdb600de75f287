use std::sync::Arc;

use ndarray::{Array1, Array2};

use super::{check_symmetric, regularize};
use crate::error::{invalid, Result};
use crate::model::{BlockPartition, LccpProblem, ProblemMeta, QuadraticTerm};
use crate::proximal::SeparableTerm;
use crate::Scalar;

/// Dual soft-margin SVM data: `min ½uᵀQu − 1ᵀu  s.t.  yᵀu = 0, 0 ≤ u ≤ c`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmInstance<T> {
    pub q: Array2<T>,
    pub y: Array1<T>,
    pub c: T,
}

impl<T: Scalar> SvmInstance<T> {
    pub fn validate(&self) -> Result<()> {
        check_symmetric(&self.q, "Q")?;
        if self.y.len() != self.q.nrows() {
            return invalid(format!(
                "{} labels for a {}x{} Q",
                self.y.len(),
                self.q.nrows(),
                self.q.nrows()
            ));
        }
        if let Some(i) = self.y.iter().position(|&v| v != T::one() && v != -T::one()) {
            return invalid(format!("label {i} is {}, expected +1 or -1", self.y[i]));
        }
        if !(self.c > T::zero()) || !self.c.is_finite() {
            return invalid(format!("box bound c must be positive and finite, got {}", self.c));
        }
        Ok(())
    }
}

/// `G(u) = ½uᵀQu − 1ᵀu`, `U = [0, c]ⁿ`, `A = yᵀ`, `b = 0`, split evenly into
/// `blocks` blocks. `Q` is jittered when not numerically positive definite.
pub fn build_svm<T: Scalar>(instance: &SvmInstance<T>, blocks: usize) -> Result<LccpProblem<T>> {
    instance.validate()?;
    let n = instance.y.len();
    let mut meta = ProblemMeta::default();
    let q = regularize(instance.q.clone(), &mut meta);
    let smooth = QuadraticTerm::new(q, Array1::from_elem(n, -T::one()))?;
    let a = instance.y.clone().insert_axis(ndarray::Axis(0));
    let problem = LccpProblem::new(
        "svm",
        a,
        Array1::zeros(1),
        BlockPartition::even(n, blocks)?,
        Arc::new(smooth),
        Arc::new(SeparableTerm::Box {
            lo: T::zero(),
            hi: instance.c,
        }),
    )?;
    Ok(problem.with_meta(meta))
}
