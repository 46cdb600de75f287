//! Builds the configured problem instance and resolves its saddle point.

use std::path::Path;

use anyhow::{Context, Result};
use log::{info, warn};

use rpdc::dataio::{
    estimate_moments, load_libsvm, load_returns, median_bandwidth, rbf_gram, read_saddle_csv,
    saddle_cache_path, synthetic_returns, write_saddle_csv,
};
use rpdc::{build_mlp, build_svm, build_synthetic, oracle_saddle, MlpInstance, Problem, Saddle, SvmInstance};

use crate::config::ProblemConfig;

/// The instance with a single block; runs reblock it per `N`.
pub struct Instance {
    pub label: &'static str,
    pub base: Problem,
    pub planted: Option<Saddle>,
}

impl Instance {
    pub fn load(cfg: &ProblemConfig) -> Result<Self> {
        let label = cfg.label();
        let (base, planted) = match cfg {
            ProblemConfig::Svm { data, c, sigma, sample, sample_seed, fold_labels } => {
                let mut ds = load_libsvm::<f64>(data)?;
                if let Some(k) = *sample {
                    ds = ds.sample_rows(k, *sample_seed)?;
                }
                let sigma = sigma.unwrap_or_else(|| median_bandwidth(&ds));
                info!("svm: {} samples, {} features, sigma {sigma}", ds.n(), ds.d());
                let q = rbf_gram(&ds, sigma, *fold_labels)?;
                let inst = SvmInstance { q, y: ds.labels, c: *c };
                (build_svm(&inst, 1)?, None)
            }
            ProblemConfig::Mlp { returns, assets, periods, data_seed, target, lambda } => {
                let table = match returns {
                    Some(path) => load_returns::<f64>(path)?,
                    None => synthetic_returns(*data_seed, *periods, *assets)?,
                };
                let (sigma, mu) = estimate_moments(&table)?;
                let target = target.unwrap_or_else(|| mu.mean().unwrap_or(0.0));
                let inst = MlpInstance { sigma, mu, target, lambda: *lambda };
                (build_mlp(&inst, 1)?, None)
            }
            ProblemConfig::Synthetic { .. } => {
                let spec = cfg.synthetic_spec(1).expect("synthetic config");
                let (p, s) = build_synthetic::<f64>(&spec)?;
                (p, Some(s))
            }
        };
        for w in &base.meta().warnings {
            warn!("{label}: {w}");
        }
        Ok(Self { label, base, planted })
    }

    pub fn with_blocks(&self, blocks: usize) -> Result<Problem> {
        self.base
            .with_blocks(blocks)
            .with_context(|| format!("cannot split {} variables into {blocks} blocks", self.base.dim_primal()))
    }

    /// Planted saddle, else the cached one under `dir`, else (if `compute`)
    /// the oracle's answer, which is then cached.
    pub fn saddle(&self, dir: &Path, compute: bool) -> Result<Option<Saddle>> {
        if let Some(s) = &self.planted {
            return Ok(Some(s.clone()));
        }
        let path = saddle_cache_path(dir, &self.base);
        if path.is_file() {
            match read_saddle_csv(&self.base, &path) {
                Ok(s) => {
                    info!("using cached saddle {}", path.display());
                    return Ok(Some(s));
                }
                Err(e) => warn!("ignoring cached saddle {}: {e}", path.display()),
            }
        }
        if !compute {
            return Ok(None);
        }
        info!("computing reference saddle for {}", self.base.name());
        let s = oracle_saddle(&self.base).map_err(|f| anyhow::anyhow!("{f}"))?;
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        write_saddle_csv(&s, &path)?;
        Ok(Some(s))
    }

    pub fn saddle_path(&self, dir: &Path) -> std::path::PathBuf {
        saddle_cache_path(dir, &self.base)
    }
}
