use super::PrimalDual;
use crate::model::LccpProblem;
use crate::Scalar;

/// Prox natural residual
/// `‖(u − prox_{J+ι_U}(u − ∇G(u) − Aᵀp), Au − b)‖`,
/// which vanishes exactly at saddle points.
pub fn kkt_residual<T: Scalar>(problem: &LccpProblem<T>, w: &impl PrimalDual<T>) -> T {
    let u = w.primal();
    let p = w.dual();
    let g = problem.gradient(u) + problem.a().t().dot(&p);
    let primal = match problem.prox_all((&u - &g).view(), T::one()) {
        Ok(x) => &u - &x,
        Err(_) => return T::nan(),
    };
    let feas = problem.constraint_residual(u);
    (primal.dot(&primal) + feas.dot(&feas)).sqrt()
}

/// `L(u, p) = F(u) + ⟨p, Au − b⟩`.
pub fn lagrangian<T: Scalar>(problem: &LccpProblem<T>, w: &impl PrimalDual<T>) -> T {
    let u = w.primal();
    problem.objective(u) + w.dual().dot(&problem.constraint_residual(u))
}

/// `L_γ(u, p) = L(u, p) + (γ/2)‖Au − b‖²`.
pub fn lagrangian_aug<T: Scalar>(problem: &LccpProblem<T>, gamma: T, w: &impl PrimalDual<T>) -> T {
    let u = w.primal();
    let r = problem.constraint_residual(u);
    problem.objective(u) + w.dual().dot(&r) + T::lit(0.5) * gamma * r.dot(&r)
}
