use ndarray::{Array1, ArrayView1};

use crate::error::{invalid, Result};
use crate::runner::Callback;
use crate::solver::Iterate;
use crate::Scalar;

/// Running means `ū_t = Σ_{k≤t} u^{k+1}/(t+1)` and `p̄_t = Σ_{k≤t} q^k/(t+1)`.
/// The dual average is over the shifted multipliers `q^k`, not `p^k`.
#[derive(Clone, Debug)]
pub struct IterateAverager<T> {
    sum_u: Array1<T>,
    sum_q: Array1<T>,
    count: usize,
}

impl<T: Scalar> IterateAverager<T> {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            sum_u: Array1::zeros(n),
            sum_q: Array1::zeros(m),
            count: 0,
        }
    }

    pub fn push(&mut self, u_next: ArrayView1<'_, T>, q_prev: ArrayView1<'_, T>) {
        self.sum_u += &u_next;
        self.sum_q += &q_prev;
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Option<(Array1<T>, Array1<T>)> {
        (self.count > 0).then(|| {
            let c = T::from_usize_lossy(self.count);
            (&self.sum_u / c, &self.sum_q / c)
        })
    }
}

/// `(ū_t, p̄_t)` from stored `u^{k+1}` and `q^k`, `k = 0..=t`.
pub fn averaged_iterates<T: Scalar>(
    u_next: &[Array1<T>],
    q: &[Array1<T>],
    t: usize,
) -> Result<(Array1<T>, Array1<T>)> {
    if u_next.len() <= t || q.len() <= t {
        return invalid(format!(
            "averages up to t = {t} need {} stored iterates",
            t + 1
        ));
    }
    let mut avg = IterateAverager::new(u_next[0].len(), q[0].len());
    for k in 0..=t {
        avg.push(u_next[k].view(), q[k].view());
    }
    Ok(avg.mean().expect("at least one point"))
}

/// Callback tracking `‖Aū_t − b‖` for every `t`, using
/// `Aū_t − b = Σ_{k≤t}(Au^{k+1} − b)/(t+1)`.
#[derive(Clone, Debug)]
pub struct AverageFeasibility<T> {
    sum: Array1<T>,
    /// `values[t] = ‖Aū_t − b‖`
    pub values: Vec<T>,
}

impl<T: Scalar> AverageFeasibility<T> {
    pub fn new(m: usize) -> Self {
        Self {
            sum: Array1::zeros(m),
            values: Vec::new(),
        }
    }
}

impl<T: Scalar> Callback<T> for AverageFeasibility<T> {
    fn on_step(&mut self, state: &Iterate<T>) -> Result<()> {
        self.sum += &state.residual();
        let t1 = T::from_usize_lossy(self.values.len() + 1);
        self.values.push(self.sum.dot(&self.sum).sqrt() / t1);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn first_average_is_first_pair() {
        let u = vec![array![1.0, 2.0], array![3.0, 4.0]];
        let q = vec![array![5.0], array![7.0]];
        let (ub, pb) = averaged_iterates(&u, &q, 0).unwrap();
        assert_eq!(ub, u[0]);
        assert_eq!(pb, q[0]);
        let (ub, pb) = averaged_iterates(&u, &q, 1).unwrap();
        assert_eq!(ub, array![2.0, 3.0]);
        assert_eq!(pb, array![6.0]);
    }

    #[test]
    fn constant_sequence_is_fixed() {
        let u = vec![array![0.25, -1.0]; 7];
        let q = vec![array![2.0]; 7];
        let (ub, pb) = averaged_iterates(&u, &q, 6).unwrap();
        assert_eq!(ub, u[0]);
        assert_eq!(pb, q[0]);
        assert!(averaged_iterates(&u, &q, 7).is_err());
    }
}
