use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView1};
use sha2::{Digest, Sha256};

use super::partition::BlockPartition;
use super::spectral::{estimate_spectral_norm, largest_eigenvalue_sym, SAFETY_FACTOR};
use crate::error::{invalid, Error, Result};
use crate::Scalar;

/// Smooth convex part `G` of the objective.
pub trait SmoothTerm<T: Scalar>: Send + Sync {
    fn value(&self, u: ArrayView1<'_, T>) -> T;

    fn gradient(&self, u: ArrayView1<'_, T>) -> Array1<T>;

    /// Entries `range` of `∇G(u)`. Override when the block can be computed
    /// without the full gradient.
    fn block_gradient(&self, range: Range<usize>, u: ArrayView1<'_, T>) -> Array1<T> {
        self.gradient(u).slice(s![range]).to_owned()
    }

    /// Lipschitz constant `B_G` of `∇G`.
    fn lipschitz(&self) -> T;

    fn as_quadratic(&self) -> Option<&QuadraticTerm<T>> {
        None
    }
}

/// `G(u) = ½ uᵀHu + ⟨l, u⟩` with `H` symmetric PSD.
#[derive(Clone, Debug)]
pub struct QuadraticTerm<T> {
    hessian: Array2<T>,
    linear: Array1<T>,
    lipschitz: T,
}

impl<T: Scalar> QuadraticTerm<T> {
    /// `B_G` is taken as `λ_max(H)`.
    pub fn new(hessian: Array2<T>, linear: Array1<T>) -> Result<Self> {
        let n = hessian.nrows();
        if hessian.ncols() != n || linear.len() != n {
            return invalid(format!(
                "quadratic term with hessian {:?} and linear term of length {}",
                hessian.dim(),
                linear.len()
            ));
        }
        let lipschitz = largest_eigenvalue_sym(&hessian).value.max(T::zero());
        Ok(Self {
            hessian,
            linear,
            lipschitz,
        })
    }

    pub fn hessian(&self) -> &Array2<T> {
        &self.hessian
    }

    pub fn linear(&self) -> &Array1<T> {
        &self.linear
    }
}

impl<T: Scalar> SmoothTerm<T> for QuadraticTerm<T> {
    fn value(&self, u: ArrayView1<'_, T>) -> T {
        T::lit(0.5) * u.dot(&self.hessian.dot(&u)) + self.linear.dot(&u)
    }

    fn gradient(&self, u: ArrayView1<'_, T>) -> Array1<T> {
        self.hessian.dot(&u) + &self.linear
    }

    fn block_gradient(&self, range: Range<usize>, u: ArrayView1<'_, T>) -> Array1<T> {
        self.hessian.slice(s![range.clone(), ..]).dot(&u) + self.linear.slice(s![range])
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }

    fn as_quadratic(&self) -> Option<&QuadraticTerm<T>> {
        Some(self)
    }
}

/// Block-separable nonsmooth part `J = Σ J_i` together with the feasible
/// sets `U_i`, accessed through its proximal map.
pub trait BlockProx<T: Scalar>: Send + Sync {
    /// `J_i(u_i)`, ignoring the indicator of `U_i`.
    fn block_value(&self, block: usize, u: ArrayView1<'_, T>) -> T;

    /// `argmin_{x ∈ U_i} J_i(x) + ‖x − v‖² / (2 step)`.
    fn block_prox(&self, block: usize, v: ArrayView1<'_, T>, step: T) -> Result<Array1<T>>;

    /// Same subproblem with a per-coordinate step (diagonal metric).
    fn block_prox_scaled(
        &self,
        block: usize,
        v: ArrayView1<'_, T>,
        steps: ArrayView1<'_, T>,
    ) -> Result<Array1<T>> {
        match steps.first() {
            Some(&s0) if steps.iter().all(|&s| s == s0) => self.block_prox(block, v, s0),
            None => Ok(v.to_owned()),
            _ => Err(Error::Unsupported(
                "prox with a non-uniform diagonal metric".into(),
            )),
        }
    }

    fn block_contains(&self, block: usize, u: ArrayView1<'_, T>) -> bool;

    /// Common bounds `[lo, hi]` when `J = 0` and `U` is a box (possibly
    /// unbounded).
    fn box_bounds(&self) -> Option<(T, T)> {
        None
    }

    fn describe(&self) -> String;
}

/// Build annotations (PD jitter, input warnings) carried for trace metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemMeta {
    pub jitter: Option<f64>,
    pub warnings: Vec<String>,
}

/// Linearly constrained convex program
/// `min G(u) + J(u)  s.t.  Au = b, u ∈ U_1 × … × U_N`.
#[derive(Clone)]
pub struct LccpProblem<T: Scalar> {
    name: String,
    a: Array2<T>,
    b: Array1<T>,
    partition: BlockPartition,
    smooth: Arc<dyn SmoothTerm<T>>,
    nonsmooth: Arc<dyn BlockProx<T>>,
    lambda_ata: T,
    meta: ProblemMeta,
    planted: Option<(Array1<T>, Array1<T>)>,
}

impl<T: Scalar> fmt::Debug for LccpProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LccpProblem")
            .field("name", &self.name)
            .field("n", &self.dim_primal())
            .field("m", &self.dim_dual())
            .field("blocks", &self.partition.sizes())
            .field("nonsmooth", &self.nonsmooth.describe())
            .finish()
    }
}

impl<T: Scalar> LccpProblem<T> {
    pub fn new(
        name: impl Into<String>,
        a: Array2<T>,
        b: Array1<T>,
        partition: BlockPartition,
        smooth: Arc<dyn SmoothTerm<T>>,
        nonsmooth: Arc<dyn BlockProx<T>>,
    ) -> Result<Self> {
        let (m, n) = a.dim();
        if b.len() != m {
            return invalid(format!("A has {m} rows but b has length {}", b.len()));
        }
        if partition.dim() != n {
            return invalid(format!(
                "A has {n} columns but the partition covers {}",
                partition.dim()
            ));
        }
        let lambda_ata = estimate_spectral_norm(&a).value;
        Ok(Self {
            name: name.into(),
            a,
            b,
            partition,
            smooth,
            nonsmooth,
            lambda_ata,
            meta: ProblemMeta::default(),
            planted: None,
        })
    }

    pub fn with_meta(mut self, meta: ProblemMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Attaches a known saddle point `(u*, p*)`.
    pub fn with_planted(mut self, u: Array1<T>, p: Array1<T>) -> Result<Self> {
        if u.len() != self.dim_primal() || p.len() != self.dim_dual() {
            return invalid("planted saddle has wrong dimensions");
        }
        self.planted = Some((u, p));
        Ok(self)
    }

    /// Same instance with a different block partition.
    pub fn reblock(&self, partition: BlockPartition) -> Result<Self> {
        if partition.dim() != self.dim_primal() {
            return invalid("partition dimension does not match the problem");
        }
        let mut out = self.clone();
        out.partition = partition;
        Ok(out)
    }

    /// Same instance split evenly into `blocks` blocks.
    pub fn with_blocks(&self, blocks: usize) -> Result<Self> {
        self.reblock(BlockPartition::even(self.dim_primal(), blocks)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_primal(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim_dual(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Array2<T> {
        &self.a
    }

    pub fn b(&self) -> &Array1<T> {
        &self.b
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }

    pub fn smooth(&self) -> &dyn SmoothTerm<T> {
        self.smooth.as_ref()
    }

    pub fn nonsmooth(&self) -> &dyn BlockProx<T> {
        self.nonsmooth.as_ref()
    }

    pub fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    pub fn planted(&self) -> Option<(&Array1<T>, &Array1<T>)> {
        self.planted.as_ref().map(|(u, p)| (u, p))
    }

    pub fn lipschitz_g(&self) -> T {
        self.smooth.lipschitz()
    }

    /// Power-iteration estimate of `λ_max(AᵀA)`.
    pub fn lambda_max_ata(&self) -> T {
        self.lambda_ata
    }

    /// `λ_max(AᵀA)` inflated by [`SAFETY_FACTOR`], for strict bounds.
    pub fn lambda_max_ata_bound(&self) -> T {
        self.lambda_ata * T::lit(SAFETY_FACTOR)
    }

    pub fn smooth_value(&self, u: ArrayView1<'_, T>) -> T {
        self.smooth.value(u)
    }

    pub fn gradient(&self, u: ArrayView1<'_, T>) -> Array1<T> {
        self.smooth.gradient(u)
    }

    pub fn block_gradient(&self, block: usize, u: ArrayView1<'_, T>) -> Result<Array1<T>> {
        let r = self.partition.range(block)?;
        Ok(self.smooth.block_gradient(r, u))
    }

    /// `J(u) = Σ_i J_i(u_i)`.
    pub fn nonsmooth_value(&self, u: ArrayView1<'_, T>) -> T {
        self.partition
            .ranges()
            .enumerate()
            .map(|(i, r)| self.nonsmooth.block_value(i, u.slice(s![r])))
            .sum()
    }

    /// `F(u) = G(u) + J(u)`.
    pub fn objective(&self, u: ArrayView1<'_, T>) -> T {
        self.smooth_value(u) + self.nonsmooth_value(u)
    }

    pub fn block_prox(&self, block: usize, v: ArrayView1<'_, T>, step: T) -> Result<Array1<T>> {
        if !(step > T::zero()) {
            return invalid("prox step must be positive");
        }
        let r = self.partition.range(block)?;
        if v.len() != r.len() {
            return invalid(format!(
                "block {block} prox input has length {}, expected {}",
                v.len(),
                r.len()
            ));
        }
        self.nonsmooth.block_prox(block, v, step)
    }

    /// Applies the block prox to every block of `v`.
    pub fn prox_all(&self, v: ArrayView1<'_, T>, step: T) -> Result<Array1<T>> {
        if v.len() != self.dim_primal() {
            return invalid("prox input has wrong length");
        }
        let mut out = Array1::zeros(v.len());
        for (i, r) in self.partition.ranges().enumerate() {
            let x = self.block_prox(i, v.slice(s![r.clone()]), step)?;
            out.slice_mut(s![r]).assign(&x);
        }
        Ok(out)
    }

    pub fn contains(&self, u: ArrayView1<'_, T>) -> bool {
        u.len() == self.dim_primal()
            && self
                .partition
                .ranges()
                .enumerate()
                .all(|(i, r)| self.nonsmooth.block_contains(i, u.slice(s![r])))
    }

    /// `Au − b`.
    pub fn constraint_residual(&self, u: ArrayView1<'_, T>) -> Array1<T> {
        self.a.dot(&u) - &self.b
    }

    /// Content hash of the instance data (A, b, objective description and
    /// partition), hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        h.update(self.nonsmooth.describe().as_bytes());
        for &s in self.partition.sizes() {
            h.update((s as u64).to_le_bytes());
        }
        for x in self.a.iter().chain(self.b.iter()) {
            h.update(x.to_f64_lossy().to_le_bytes());
        }
        if let Some(q) = self.smooth.as_quadratic() {
            for x in q.hessian().iter().chain(q.linear().iter()) {
                h.update(x.to_f64_lossy().to_le_bytes());
            }
        }
        h.finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proximal::SeparableTerm;
    use ndarray::array;

    fn toy() -> LccpProblem<f64> {
        let q = QuadraticTerm::new(Array2::eye(2), array![-1.0, -1.0]).unwrap();
        LccpProblem::new(
            "toy",
            array![[1.0, -1.0]],
            array![0.0],
            BlockPartition::even(2, 2).unwrap(),
            Arc::new(q),
            Arc::new(SeparableTerm::Box { lo: 0.0, hi: 1.0 }),
        )
        .unwrap()
    }

    #[test]
    fn dimensions_are_checked() {
        let q = QuadraticTerm::new(Array2::<f64>::eye(2), array![0.0, 0.0]).unwrap();
        let err = LccpProblem::new(
            "bad",
            array![[1.0, -1.0]],
            array![0.0, 1.0],
            BlockPartition::even(2, 1).unwrap(),
            Arc::new(q),
            Arc::new(SeparableTerm::Free),
        );
        assert!(err.is_err());
    }

    #[test]
    fn block_gradient_matches_full_gradient() {
        let p = toy();
        let u = array![0.3, 0.9];
        let g = p.gradient(u.view());
        assert_eq!(p.block_gradient(1, u.view()).unwrap(), array![g[1]]);
        assert!((p.lipschitz_g() - 1.0).abs() < 1e-12);
        assert!((p.lambda_max_ata() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn hash_depends_on_data() {
        let p = toy();
        let q = p.with_blocks(1).unwrap();
        assert_ne!(p.hash(), q.hash());
        assert_eq!(p.hash(), toy().hash());
    }
}
