use std::path::{Path, PathBuf};

use ndarray::Array1;

use super::write_atomic;
use crate::diagnostics::{SaddleReference, SaddleSource};
use crate::error::{Error, Result};
use crate::model::LccpProblem;
use crate::Scalar;

/// `dir/saddle_{hash}.csv`
pub fn saddle_cache_path<T: Scalar>(dir: impl AsRef<Path>, problem: &LccpProblem<T>) -> PathBuf {
    dir.as_ref().join(format!("saddle_{}.csv", problem.hash()))
}

/// Rows `kind,index,value` with kind `u`, `p` or `f` (the objective value).
pub fn write_saddle_csv<T: Scalar>(saddle: &SaddleReference<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        let rows = std::iter::once(("f", 0, saddle.f_star))
            .chain(saddle.u_star.iter().enumerate().map(|(i, &v)| ("u", i, v)))
            .chain(saddle.p_star.iter().enumerate().map(|(i, &v)| ("p", i, v)));
        let err = |e: csv::Error| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        };
        w.write_record(["kind", "index", "value"]).map_err(err)?;
        for (kind, i, v) in rows {
            w.write_record([kind.to_string(), i.to_string(), v.to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    })
}

/// Loads a cached saddle and re-verifies it against `problem`.
pub fn read_saddle_csv<T: Scalar>(problem: &LccpProblem<T>, path: impl AsRef<Path>) -> Result<SaddleReference<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut u = Array1::from_elem(problem.dim_primal(), T::nan());
    let mut p = Array1::from_elem(problem.dim_dual(), T::nan());
    for (line, rec) in rdr.records().enumerate().map(|(i, r)| (i + 2, r)) {
        let bad = |message: String| Error::Parse { line, message };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 cells, got {}", rec.len())));
        }
        let i: usize = rec[1].parse().map_err(|_| bad(format!("bad index `{}`", &rec[1])))?;
        let v: T = rec[2].parse().map_err(|_| bad(format!("bad value `{}`", &rec[2])))?;
        let slot = match &rec[0] {
            "u" => u.get_mut(i),
            "p" => p.get_mut(i),
            "f" => continue,
            other => return Err(bad(format!("unknown kind `{other}`"))),
        };
        *slot.ok_or_else(|| bad(format!("index {i} out of range")))? = v;
    }
    if u.iter().chain(p.iter()).any(|v| v.is_nan()) {
        return Err(Error::Schema(format!("{}: incomplete saddle point", path.display())));
    }
    SaddleReference::new(problem, u, p, SaddleSource::OracleRun)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{build_synthetic, SyntheticSpec};

    #[test]
    fn cache_round_trip() {
        let (problem, saddle) = build_synthetic::<f64>(&SyntheticSpec::new(1, 12, 2, 3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = saddle_cache_path(dir.path(), &problem);
        assert!(path.file_name().unwrap().to_string_lossy().contains(&problem.hash()));
        write_saddle_csv(&saddle, &path).unwrap();
        let back = read_saddle_csv(&problem, &path).unwrap();
        assert_eq!(back.u_star, saddle.u_star);
        assert_eq!(back.p_star, saddle.p_star);
    }

    #[test]
    fn incomplete_cache_rejected() {
        let (problem, _) = build_synthetic::<f64>(&SyntheticSpec::new(1, 4, 1, 2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "kind,index,value\nu,0,0.1\n").unwrap();
        assert!(matches!(read_saddle_csv(&problem, &path), Err(Error::Schema(_))));
    }
}
