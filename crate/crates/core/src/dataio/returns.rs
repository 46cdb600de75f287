use std::io::Read;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::solver::solver_rng;
use crate::Scalar;

/// Per-period asset returns, one row per period.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnsTable<T> {
    pub names: Vec<String>,
    pub returns: Array2<T>,
}

impl<T: Scalar> ReturnsTable<T> {
    pub fn new(names: Vec<String>, returns: Array2<T>) -> Result<Self> {
        if names.len() != returns.ncols() {
            return invalid(format!("{} names for {} columns", names.len(), returns.ncols()));
        }
        if returns.nrows() < 2 {
            return invalid("a returns table needs at least two periods");
        }
        if returns.iter().any(|v| !v.is_finite()) {
            return invalid("returns must be finite");
        }
        Ok(Self { names, returns })
    }

    pub fn periods(&self) -> usize {
        self.returns.nrows()
    }

    pub fn assets(&self) -> usize {
        self.returns.ncols()
    }
}

/// CSV with a header row of asset names and one row of decimal returns per
/// period. Empty or non-numeric cells are rejected.
pub fn parse_returns<T: Scalar, R: Read>(reader: R) -> Result<ReturnsTable<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() {
        return invalid("returns table has no columns");
    }
    let mut cells = Vec::new();
    let mut periods = 0;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != names.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} cells, got {}", names.len(), rec.len()),
            });
        }
        for (col, cell) in rec.iter().enumerate() {
            let v: T = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad value `{cell}` for {}", names[col]),
            })?;
            cells.push(v);
        }
        periods += 1;
    }
    let returns = Array2::from_shape_vec((periods, names.len()), cells).expect("row-major fill");
    ReturnsTable::new(names, returns)
}

pub fn load_returns<T: Scalar>(path: impl AsRef<Path>) -> Result<ReturnsTable<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_returns(file)
}

/// Sample covariance (divided by `T − 1`) and column means.
pub fn estimate_moments<T: Scalar>(table: &ReturnsTable<T>) -> Result<(Array2<T>, Array1<T>)> {
    let t = table.periods();
    if t < 2 {
        return invalid("need at least two periods to estimate a covariance");
    }
    // second pass removes the rounding error of the first mean, so that
    // constant columns centre to exact zeros
    let rough = table.returns.mean_axis(Axis(0)).expect("t >= 2");
    let mu = &rough + &(&table.returns - &rough).mean_axis(Axis(0)).expect("t >= 2");
    let centered = &table.returns - &mu;
    let mut sigma = centered.t().dot(&centered) / T::from_usize_lossy(t - 1);
    let n = sigma.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = sigma[[i, j]];
            sigma[[j, i]] = v;
        }
    }
    Ok((sigma, mu))
}

/// Returns from a one-factor model `r_t = β f_t + e_t` with a per-asset
/// drift, standing in for proprietary return panels of a given shape.
pub fn synthetic_returns<T: Scalar>(seed: u64, periods: usize, assets: usize) -> Result<ReturnsTable<T>> {
    if assets == 0 {
        return invalid("need at least one asset");
    }
    let mut rng = solver_rng(seed);
    let drift: Vec<f64> = (0..assets).map(|_| rng.random_range(0.0..0.02)).collect();
    let beta: Vec<f64> = (0..assets).map(|_| rng.random_range(0.5..1.5)).collect();
    let mut cells = Vec::with_capacity(periods * assets);
    for _ in 0..periods {
        let factor = rng.random_range(-0.05..0.05);
        for j in 0..assets {
            let noise = rng.random_range(-0.03..0.03);
            cells.push(T::lit(drift[j] + beta[j] * factor + noise));
        }
    }
    let returns = Array2::from_shape_vec((periods, assets), cells).expect("row-major fill");
    let names = (0..assets).map(|j| format!("a{j}")).collect();
    ReturnsTable::new(names, returns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::smallest_eigenvalue_sym;
    use ndarray::array;

    #[test]
    fn two_period_moments() {
        let table = parse_returns::<f64, _>("x,y\n0,0\n2,2\n".as_bytes()).unwrap();
        let (sigma, mu) = estimate_moments(&table).unwrap();
        assert_eq!(mu, array![1.0, 1.0]);
        assert_eq!(sigma, array![[2.0, 2.0], [2.0, 2.0]]);
    }

    #[test]
    fn single_asset_variance() {
        let table = parse_returns::<f64, _>("only\n1\n3\n".as_bytes()).unwrap();
        let (sigma, mu) = estimate_moments(&table).unwrap();
        assert_eq!(mu, array![2.0]);
        assert_eq!(sigma, array![[2.0]]);
    }

    #[test]
    fn identical_rows_give_zero_covariance() {
        let table = parse_returns::<f64, _>("a,b\n0.1,0.2\n0.1,0.2\n0.1,0.2\n".as_bytes()).unwrap();
        let (sigma, _) = estimate_moments(&table).unwrap();
        assert!(sigma.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn malformed_tables_rejected() {
        assert!(parse_returns::<f64, _>("a,b\n0.1\n".as_bytes()).is_err());
        assert!(parse_returns::<f64, _>("a,b\n0.1,x\n0.2,0.3\n".as_bytes()).is_err());
        assert!(parse_returns::<f64, _>("a,b\n0.1,\n0.2,0.3\n".as_bytes()).is_err());
        assert!(parse_returns::<f64, _>("a,b\n0.1,0.2\n".as_bytes()).is_err());
    }

    #[test]
    fn synthetic_covariance_is_psd_and_symmetric() {
        let table = synthetic_returns::<f64>(3, 60, 20).unwrap();
        let (sigma, _) = estimate_moments(&table).unwrap();
        assert_eq!(sigma, sigma.t());
        assert!(smallest_eigenvalue_sym(&sigma).value >= -1e-10);
    }
}
