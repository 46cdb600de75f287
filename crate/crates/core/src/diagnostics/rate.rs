use super::trace::RunTrace;
use crate::error::{invalid, Result};
use crate::Scalar;

/// Values at or below this are treated as numerically converged and left
/// out of rate fits.
pub const PHI_FLOOR: f64 = 1e-14;

const MIN_POINTS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("line fit needs at least two paired points");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return invalid("line fit needs distinct abscissae");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 0.0 };
    Ok(LineFit {
        intercept,
        slope,
        r_squared,
    })
}

/// Empirical linear rate `α̂` from `log φ_k ≈ c + k log α̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub alpha: f64,
    pub slope: f64,
    pub r_squared: f64,
    /// Number of points in the fitted tail.
    pub points: usize,
    /// Set when the tail does not decrease (`α̂ ≥ 1`).
    pub failed: bool,
}

/// Fits `log φ` against the iteration index over the tail half of the
/// points with `φ > PHI_FLOOR`.
pub fn fit_linear_rate<T: Scalar>(iters: &[usize], phi: &[T]) -> Result<RateFit> {
    if iters.len() != phi.len() {
        return invalid("iteration and value columns differ in length");
    }
    let pts: Vec<(f64, f64)> = iters
        .iter()
        .zip(phi)
        .map(|(&k, &v)| (k as f64, v.to_f64_lossy()))
        .filter(|&(_, v)| v.is_finite() && v > PHI_FLOOR)
        .collect();
    if pts.len() < MIN_POINTS {
        return invalid(format!(
            "rate fit needs at least {MIN_POINTS} values above {PHI_FLOOR:e}, got {}",
            pts.len()
        ));
    }
    let tail = &pts[pts.len() / 2..];
    let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let fit = least_squares_line(&xs, &ys)?;
    let alpha = fit.slope.exp();
    Ok(RateFit {
        alpha,
        slope: fit.slope,
        r_squared: fit.r_squared,
        points: tail.len(),
        failed: !(alpha < 1.0),
    })
}

/// [`fit_linear_rate`] on the `phi` column of a trace.
pub fn fit_trace_rate<T: Scalar>(trace: &RunTrace<T>) -> Result<RateFit> {
    fit_linear_rate(&trace.iters(), &trace.column(|r| r.phi))
}

/// Slope of `log y` against `log t` over the points with `t > 0, y > 0`.
pub fn fit_power_law(ts: &[f64], ys: &[f64]) -> Result<LineFit> {
    let (xs, ls): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(ys)
        .filter(|(&t, &y)| t > 0.0 && y > 0.0 && y.is_finite())
        .map(|(&t, &y)| (t.ln(), y.ln()))
        .unzip();
    least_squares_line(&xs, &ls)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sequence_recovers_ratio() {
        let iters: Vec<usize> = (0..200).collect();
        let phi: Vec<f64> = iters.iter().map(|&k| 0.9f64.powi(k as i32)).collect();
        let fit = fit_linear_rate(&iters, &phi).unwrap();
        assert!((fit.alpha - 0.9).abs() < 1e-6);
        assert!(fit.r_squared > 0.999_999);
        assert!(!fit.failed);
    }

    #[test]
    fn flat_sequence_fails() {
        let iters: Vec<usize> = (0..100).collect();
        let phi = vec![1.0f64; 100];
        let fit = fit_linear_rate(&iters, &phi).unwrap();
        assert!(fit.failed);
        assert!(fit.alpha >= 1.0);
    }

    #[test]
    fn too_short_is_an_error() {
        let iters: Vec<usize> = (0..10).collect();
        let phi = vec![1.0f64; 10];
        assert!(fit_linear_rate(&iters, &phi).is_err());
    }

    #[test]
    fn power_law_slope() {
        let ts: Vec<f64> = (1..=100).map(f64::from).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 / t).collect();
        let fit = fit_power_law(&ts, &ys).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
    }
}
