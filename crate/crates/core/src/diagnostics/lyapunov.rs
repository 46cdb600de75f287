use ndarray::Array1;
use rand::Rng;

use super::kkt::lagrangian;
use super::{sq_dist, sq_distance, PrimalDual, SaddleReference};
use crate::baselines::AppAl;
use crate::error::Result;
use crate::model::{CoreFunction, LccpProblem};
use crate::solver::{solver_rng, Iterate, Rpdc, SolverParams};
use crate::Scalar;

/// Closed-form constants of the Lyapunov bounds and the variance estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovConstants<T> {
    /// Lower sandwich constant: `Λ(w, w*) ≥ d1‖w − w*‖²`.
    pub d1: T,
    /// Upper sandwich constant.
    pub d2: T,
    /// `Λ(w, w') ≥ −d3‖p − p*‖²`; only meaningful for `N > 2`.
    pub d3: T,
    /// Expected decrease per step is at least `d4‖w − T(w)‖²`.
    pub d4: T,
    pub valid_d3: bool,
}

pub fn constants<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
) -> LyapunovConstants<T> {
    let nb = T::from_usize_lossy(problem.num_blocks());
    let lam = problem.lambda_max_ata_bound();
    let (eps, gamma, rho) = (params.epsilon, params.gamma, params.rho);
    let (beta, big_b) = (core.beta(), core.lipschitz());
    let c = T::lit;

    let d1 = ((nb * beta - eps * gamma * lam) / (c(2.0) * nb)).min(eps / (c(4.0) * nb * gamma));
    let d2 = ((c(4.0) * nb - c(3.0)) * eps / ((c(4.0) * nb - c(2.0)) * nb * rho))
        .max((nb * big_b + eps * (c(2.0) * nb - c(3.0)) * gamma * lam) / (c(2.0) * nb));
    let d3 = eps * (nb - T::one()).powi(2) / (c(2.0) * gamma * nb * (nb - c(2.0)));
    let num = ((beta - eps * (problem.lipschitz_g() + gamma * lam)) / c(2.0))
        .min(eps * (c(2.0) * gamma - (c(2.0) * nb - T::one()) * rho) / (c(2.0) * nb));
    let den = (nb * nb + c(2.0) * gamma * gamma * (nb * nb + c(2.0)) * lam)
        .max(c(4.0) * gamma * gamma);
    LyapunovConstants {
        d1,
        d2,
        d3,
        d4: num / den,
        valid_d3: problem.num_blocks() > 2,
    }
}

/// `Λ(w, w') = D(u', u) + ε/(2Nρ)‖p − p'‖² + ε(N−1)/N [L(u, p) − L(u*, p*)]
///            + ε(N−2)γ/(2N) ‖Au − b‖²`.
pub fn lyapunov_lambda<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
    w: &impl PrimalDual<T>,
    w_ref: &impl PrimalDual<T>,
    saddle: &SaddleReference<T>,
) -> T {
    let nb = T::from_usize_lossy(problem.num_blocks());
    let (eps, gamma, rho) = (params.epsilon, params.gamma, params.rho);
    let two = T::lit(2.0);
    let bregman = core
        .distance(w_ref.primal(), w.primal())
        .unwrap_or_else(|_| T::nan());
    let dual = eps / (two * nb * rho) * sq_dist(w.dual(), w_ref.dual());
    let lag = eps * (nb - T::one()) / nb * (lagrangian(problem, w) - saddle.lagrangian_value());
    let r = problem.constraint_residual(w.primal());
    let aug = eps * (nb - two) * gamma / (two * nb) * r.dot(&r);
    bregman + dual + lag + aug
}

/// `φ(w, w*) = Λ(w, w*) + (ε/N)[L(u, p*) − L(u*, p*)]`.
pub fn lyapunov_phi<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
    w: &impl PrimalDual<T>,
    saddle: &SaddleReference<T>,
) -> T {
    let nb = T::from_usize_lossy(problem.num_blocks());
    lyapunov_lambda(problem, core, params, w, saddle, saddle)
        + params.epsilon / nb * primal_gap(problem, w, saddle)
}

// L(u, p*) − L(u*, p*) ≥ 0
fn primal_gap<T: Scalar>(
    problem: &LccpProblem<T>,
    w: &impl PrimalDual<T>,
    saddle: &SaddleReference<T>,
) -> T {
    let at_pstar = (w.primal().to_owned(), saddle.p_star.clone());
    lagrangian(problem, &at_pstar) - saddle.lagrangian_value()
}

/// Margin of the expected descent inequality
/// `φ(w) − E φ(w⁺) − d4‖w − T(w)‖² − (ε/N)[L(u, p*) − L(u*, p*)]`,
/// with the expectation enumerated exactly over blocks. Nonnegative under
/// the step-size window, up to rounding.
pub fn lemma2_descent_check<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
    state: &Iterate<T>,
    saddle: &SaddleReference<T>,
) -> Result<T> {
    let nb = T::from_usize_lossy(problem.num_blocks());
    let expectation = Rpdc::unchecked(problem, core, *params).expectation(state)?;
    let mean_next = expectation
        .candidates
        .iter()
        .map(|c| lyapunov_phi(problem, core, params, c, saddle))
        .sum::<T>()
        / nb;
    let mapped = AppAl::unchecked(problem, core, *params).apply(state)?;
    let d4 = constants(problem, core, params).d4;
    Ok(lyapunov_phi(problem, core, params, state, saddle)
        - mean_next
        - d4 * sq_distance(state, &mapped)
        - params.epsilon / nb * primal_gap(problem, state, saddle))
}

/// Sampled estimate of `d5 = sup_{‖p‖<M} h(w⁰, (u*, p))` with
/// `h(w, w') = Λ(w, w') + (d3/d1)Λ(w, w*)`, sampling `p` on the sphere of
/// radius `M = 2(‖p*‖ + 1)`. Report-only; `None` when `d3` is undefined.
pub fn estimate_d5<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
    w0: &impl PrimalDual<T>,
    saddle: &SaddleReference<T>,
    samples: usize,
    seed: u64,
) -> Option<T> {
    let k = constants(problem, core, params);
    if !k.valid_d3 || !(k.d1 > T::zero()) {
        return None;
    }
    let radius = T::lit(2.0) * (saddle.p_star.dot(&saddle.p_star).sqrt() + T::one());
    let base = k.d3 / k.d1 * lyapunov_lambda(problem, core, params, w0, saddle, saddle);
    let mut rng = solver_rng(seed);
    let m = problem.dim_dual();
    let mut best = T::neg_infinity();
    for _ in 0..samples.max(1) {
        let z = Array1::from_iter((0..m).map(|_| T::lit(gaussian(&mut rng))));
        let norm = z.dot(&z).sqrt();
        if !(norm > T::zero()) {
            continue;
        }
        let reference = (saddle.u_star.clone(), z * (radius / norm));
        let h = lyapunov_lambda(problem, core, params, w0, &reference, saddle) + base;
        best = best.max(h);
    }
    Some(best)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::oracle_saddle;
    use crate::solver::auto_params;
    use crate::testkit::{random_vec, toy_mlp, toy_svm};

    #[test]
    fn toy_constants_match_hand_values() {
        let p = toy_svm(2);
        let core = CoreFunction::half_squared_norm();
        let params = SolverParams::new(0.2, 1.0, 0.5);
        let k = constants(&p, &core, &params);
        assert!((k.d1 - 0.025).abs() < 1e-12);
        assert!((k.d4 * 28.0 - 0.025).abs() < 1e-6);
        assert!(!k.valid_d3);
        assert!(k.d1 > 0.0 && k.d4 > 0.0);
    }

    #[test]
    fn lambda_vanishes_at_saddle() {
        for p in [toy_svm(2), toy_mlp(0.0, 2), toy_mlp(0.2, 1)] {
            let core = CoreFunction::half_squared_norm();
            let params = auto_params(&p, &core, 1.0, 0.9).unwrap();
            let s = oracle_saddle(&p).unwrap();
            assert!(lyapunov_lambda(&p, &core, &params, &s, &s, &s).abs() <= 1e-12);
            assert!(lyapunov_phi(&p, &core, &params, &s, &s).abs() <= 1e-12);
            let state = Iterate::new(&p, s.u_star.clone(), s.p_star.clone(), 1.0).unwrap();
            assert!(lemma2_descent_check(&p, &core, &params, &state, &s).unwrap().abs() <= 1e-10);
        }
    }

    fn sample_state(p: &LccpProblem<f64>, rng: &mut crate::SolverRng, gamma: f64) -> Iterate<f64> {
        let u = random_vec(rng, p.dim_primal(), -2.0, 2.0);
        let q = random_vec(rng, p.dim_dual(), -2.0, 2.0);
        Iterate::new(p, u, q, gamma).unwrap()
    }

    #[test]
    fn sandwich_and_descent_on_two_block_toys() {
        for p in [toy_svm(2), toy_mlp(0.1, 2), toy_mlp(0.0, 2)] {
            let core = CoreFunction::half_squared_norm();
            let s = oracle_saddle(&p).unwrap();
            for gamma in [0.3, 1.0, 3.0] {
                let params = auto_params(&p, &core, gamma, 0.9).unwrap();
                let k = constants(&p, &core, &params);
                let mut rng = solver_rng(gamma.to_bits());
                for _ in 0..200 {
                    let w = sample_state(&p, &mut rng, gamma);
                    let lam = lyapunov_lambda(&p, &core, &params, &w, &s, &s);
                    let d = sq_distance(&w, &s);
                    let gap = primal_gap(&p, &w, &s);
                    assert!(lam >= k.d1 * d - 1e-9);
                    assert!(lam <= k.d2 * d + params.epsilon / 2.0 * gap + 1e-9);
                    let phi = lyapunov_phi(&p, &core, &params, &w, &s);
                    assert!(phi >= k.d1 * d - 1e-9);
                    assert!(phi <= k.d2 * d + params.epsilon * gap + 1e-9);
                    assert!(lemma2_descent_check(&p, &core, &params, &w, &s).unwrap() >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn two_block_augmentation_weight_vanishes() {
        // at N = 2 the ‖Au − b‖² coefficient is zero, so Λ does not depend on γ
        // beyond ε and ρ
        let p = toy_svm(2);
        let core = CoreFunction::half_squared_norm();
        let s = oracle_saddle(&p).unwrap();
        let a = SolverParams::new(0.1, 1.0, 0.2);
        let b = SolverParams::new(0.1, 2.0, 0.2);
        let w = (ndarray::array![0.3, -0.4], ndarray::array![0.7]);
        assert_eq!(
            lyapunov_lambda(&p, &core, &a, &w, &s, &s),
            lyapunov_lambda(&p, &core, &b, &w, &s, &s)
        );
    }

    #[test]
    fn d5_estimate_is_report_only() {
        let (p, s) = crate::problems::build_synthetic::<f64>(&crate::SyntheticSpec::new(0, 12, 2, 3)).unwrap();
        let core = CoreFunction::half_squared_norm();
        let params = auto_params(&p, &core, 1.0, 0.9).unwrap();
        let w0 = Iterate::initial(&p, 1.0).unwrap();
        let d5 = estimate_d5(&p, &core, &params, &w0, &s, 64, 0).unwrap();
        assert!(d5.is_finite());
        let toy = toy_svm(2);
        let ts = oracle_saddle(&toy).unwrap();
        let tw = Iterate::initial(&toy, 1.0).unwrap();
        assert!(estimate_d5(&toy, &core, &params, &tw, &ts, 64, 0).is_none());
    }
}
