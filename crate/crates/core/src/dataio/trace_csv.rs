use std::path::{Path, PathBuf};

use super::write_atomic;
use crate::diagnostics::{RunMetadata, RunTrace, TraceRecord, TRACE_HEADER};
use crate::error::{Error, Result};
use crate::Scalar;

/// Sidecar holding the run metadata as TOML: `x.csv` → `x.meta.toml`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.toml")
}

/// Writes the trace with header [`TRACE_HEADER`] plus a metadata sidecar.
/// Floats use the shortest representation that parses back to the same
/// value, so a round trip is exact.
pub fn write_trace_csv<T: Scalar>(trace: &RunTrace<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        };
        w.write_record(TRACE_HEADER).map_err(csv_err)?;
        for r in &trace.records {
            w.write_record([
                r.iter.to_string(),
                float(r.dist_w),
                float(r.subopt),
                float(r.feas),
                float(r.kkt),
                float(r.lambda),
                float(r.phi),
                float(r.time_ms),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    })?;
    let meta = toml::to_string(&trace.metadata)
        .map_err(|e| Error::Schema(format!("cannot serialize metadata: {e}")))?;
    let side = meta_path(path);
    write_atomic(&side, |out| out.write_all(meta.as_bytes()).map_err(|e| Error::io(&side, e)))
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
fn float<T: Scalar>(x: T) -> String {
    let a = x.abs().to_f64_lossy();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Reads a trace CSV. Columns are matched by name; the metadata sidecar is
/// optional.
pub fn read_trace_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<RunTrace<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut idx = [0usize; TRACE_HEADER.len()];
    for (slot, name) in idx.iter_mut().zip(TRACE_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("{}: missing column `{name}`", path.display())))?;
    }

    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let cell = |c: usize| -> Result<&str> {
            rec.get(idx[c]).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing value for `{}`", TRACE_HEADER[c]),
            })
        };
        let num = |c: usize| -> Result<T> {
            let s = cell(c)?;
            s.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad value `{s}` for `{}`", TRACE_HEADER[c]),
            })
        };
        let iter_s = cell(0)?;
        records.push(TraceRecord {
            iter: iter_s.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad iteration `{iter_s}`"),
            })?,
            dist_w: num(1)?,
            subopt: num(2)?,
            feas: num(3)?,
            kkt: num(4)?,
            lambda: num(5)?,
            phi: num(6)?,
            time_ms: num(7)?,
        });
    }

    let side = meta_path(path);
    let metadata = match std::fs::read_to_string(&side) {
        Ok(text) => toml::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", side.display())))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => RunMetadata::default(),
        Err(e) => return Err(Error::io(side, e)),
    };
    Ok(RunTrace { records, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(k: usize, x: f64) -> TraceRecord<f64> {
        TraceRecord {
            iter: k,
            dist_w: x,
            subopt: -x / 3.0,
            feas: x * 1e-17,
            kkt: f64::NAN,
            lambda: 0.1 + x,
            phi: std::f64::consts::PI * x,
            time_ms: 1e300 * x,
        }
    }

    fn same(a: &TraceRecord<f64>, b: &TraceRecord<f64>) -> bool {
        let eq = |x: f64, y: f64| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan());
        a.iter == b.iter
            && eq(a.dist_w, b.dist_w)
            && eq(a.subopt, b.subopt)
            && eq(a.feas, b.feas)
            && eq(a.kkt, b.kkt)
            && eq(a.lambda, b.lambda)
            && eq(a.phi, b.phi)
            && eq(a.time_ms, b.time_ms)
    }

    #[test]
    fn header_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace_csv(&RunTrace::<f64>::default(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "iter,dist_w,subopt,feas,kkt,lambda,phi,time_ms");
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "iter,dist_w,subopt,feas,lambda,phi,time_ms\n0,1,1,1,1,1,0\n").unwrap();
        match read_trace_csv::<f64>(&path) {
            Err(Error::Schema(m)) => assert!(m.contains("`kkt`"), "{m}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = read_trace_csv::<f64>("/nonexistent/dir/t.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/t.csv"));
    }

    #[test]
    fn metadata_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut trace = RunTrace::<f64>::default();
        trace.metadata.algorithm = "rpdc".into();
        trace.metadata.seed = Some(4);
        trace.metadata.jitter = Some(1e-6);
        trace.metadata.warnings = vec!["w".into()];
        trace.records.push(record(0, 1.0));
        write_trace_csv(&trace, &path).unwrap();
        let back = read_trace_csv::<f64>(&path).unwrap();
        assert_eq!(back.metadata, trace.metadata);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(xs in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("t.csv");
            let trace = RunTrace {
                records: xs.iter().enumerate().map(|(k, &x)| record(k, x)).collect(),
                metadata: RunMetadata::default(),
            };
            write_trace_csv(&trace, &path).unwrap();
            let back = read_trace_csv::<f64>(&path).unwrap();
            prop_assert_eq!(back.records.len(), trace.records.len());
            for (a, b) in trace.records.iter().zip(&back.records) {
                prop_assert!(same(a, b));
            }
        }
    }
}
