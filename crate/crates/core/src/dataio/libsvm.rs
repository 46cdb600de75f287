use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::index::sample;

use crate::error::{invalid, Error, Result};
use crate::solver::solver_rng;
use crate::Scalar;

/// Largest accepted feature index; guards the dense expansion.
pub const MAX_FEATURE_INDEX: usize = 1 << 20;
const MAX_DENSE_CELLS: usize = 1 << 27;

/// Binary classification data with labels mapped to ±1.
#[derive(Clone, Debug, PartialEq)]
pub struct LibsvmDataset<T> {
    pub name: String,
    pub labels: Array1<T>,
    pub features: Array2<T>,
}

impl<T: Scalar> LibsvmDataset<T> {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            return invalid(format!("row {bad} out of range for {} samples", self.n()));
        }
        Ok(Self {
            name: format!("{}[{}]", self.name, indices.len()),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            features: self.features.select(ndarray::Axis(0), indices),
        })
    }

    /// `k` distinct rows drawn uniformly with a seeded generator, sorted.
    pub fn sample_rows(&self, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > self.n() {
            return invalid(format!("cannot draw {k} of {} samples", self.n()));
        }
        let mut idx = sample(&mut solver_rng(seed), self.n(), k).into_vec();
        idx.sort_unstable();
        self.subset(&idx)
    }
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

/// Parses `label idx:val idx:val …` lines (1-based indices, blank lines
/// skipped). Absent features are zero; `d` is the largest index seen.
/// Two distinct raw labels map to −1 and +1 in sorted order; a single
/// label maps to +1 if positive, else −1.
pub fn parse_libsvm<T: Scalar, R: Read>(mut reader: R, name: &str) -> Result<LibsvmDataset<T>> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(name, e))?;
    let text = match std::str::from_utf8(&bytes) {
        Ok(t) => t,
        Err(e) => {
            let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
            return parse_err(line, "input is not valid UTF-8");
        }
    };

    let mut raw_labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut d = 0usize;
    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        let mut tokens = line.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label: f64 = match label_tok.parse() {
            Ok(v) if f64::is_finite(v) => v,
            _ => return parse_err(lineno, format!("bad label `{label_tok}`")),
        };
        let mut row = Vec::new();
        for tok in tokens {
            let Some((idx, val)) = tok.split_once(':') else {
                return parse_err(lineno, format!("expected idx:val, got `{tok}`"));
            };
            let idx: usize = match idx.parse() {
                Ok(i) if (1..=MAX_FEATURE_INDEX).contains(&i) => i,
                _ => return parse_err(lineno, format!("bad feature index `{idx}`")),
            };
            let val: f64 = match val.parse() {
                Ok(v) if f64::is_finite(v) => v,
                _ => return parse_err(lineno, format!("bad feature value `{val}`")),
            };
            if row.iter().any(|&(j, _)| j == idx) {
                return parse_err(lineno, format!("feature index {idx} repeated"));
            }
            d = d.max(idx);
            row.push((idx, val));
        }
        raw_labels.push((lineno, label));
        rows.push(row);
    }
    if rows.is_empty() {
        return invalid("no samples");
    }
    if rows.len().saturating_mul(d.max(1)) > MAX_DENSE_CELLS {
        return invalid(format!("{} x {d} dense features exceed the size cap", rows.len()));
    }

    let mut distinct: BTreeMap<u64, f64> = BTreeMap::new();
    for &(lineno, v) in &raw_labels {
        distinct.insert(v.to_bits(), v);
        if distinct.len() > 2 {
            return Err(Error::Unsupported(format!(
                "more than two distinct labels (line {lineno}); only binary data is supported"
            )));
        }
    }
    let mut values: Vec<f64> = distinct.into_values().collect();
    values.sort_by(f64::total_cmp);
    let map = |v: f64| -> T {
        let positive = if values.len() == 2 { v == values[1] } else { v > 0.0 };
        if positive {
            T::one()
        } else {
            -T::one()
        }
    };

    let labels = raw_labels.iter().map(|&(_, v)| map(v)).collect();
    let mut features = Array2::zeros((rows.len(), d));
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            features[[i, j - 1]] = T::lit(v);
        }
    }
    Ok(LibsvmDataset {
        name: name.to_string(),
        labels,
        features,
    })
}

pub fn load_libsvm<T: Scalar>(path: impl AsRef<Path>) -> Result<LibsvmDataset<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_libsvm(file, &name)
}
