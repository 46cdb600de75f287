//! Experiment configuration, read from a single TOML file.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use rpdc::SyntheticSpec;

/// Reference text for `--help`. Keep in sync with the `Default` impls below.
pub const CONFIG_REFERENCE: &str = "\
CONFIGURATION (TOML, all keys optional unless noted)

  algorithms   = [\"rpdc\"]     rpdc | appal | rcd (`compare` always runs all three)
  blocks       = [2]          block counts N, one run per entry
  seeds        = [0]          one run per seed (rpdc, rcd); shifted by --seed-offset
  max_iter     = 10000        iteration budget per run
  tol          = 1e-8         stop when the KKT residual is <= tol (0 disables)
  kkt_every    = 10           evaluate the stopping test every k iterations
  record_every = 0            trace stride; 0 picks max(1, max_iter / 2000)
  target       = 1e-4         metric |F - F*| + ||Au - b|| used by `compare`
  out          = \"out\"        output directory (overridden by --out)

  [params]
  gamma   = 1.0               augmentation weight
  theta   = 0.9               fraction of the step-size window used when
                              epsilon / rho are not given
  epsilon = <unset>           explicit primal step; requires rho as well
  rho     = <unset>           explicit dual step

  [problem]                   required; `kind` selects the instance family
  kind = \"svm\"
    data        = <required>  LIBSVM file, relative to the config file
    c           = 1.0         box upper bound
    sigma       = <median>    RBF bandwidth; default is the median pairwise distance
    sample      = <all>       use a random subset of this many rows
    sample_seed = 0
    fold_labels = true        Q_ij = y_i y_j k(x_i, x_j)
  kind = \"mlp\"
    returns     = <unset>     returns CSV (header of names, one row per period)
    assets      = 10          synthetic one-factor returns when `returns` is unset
    periods     = 240
    data_seed   = 0
    target      = <mean mu>   required expected return
    lambda      = 0.01        l1 weight
  kind = \"synthetic\"        random quadratic program with a planted saddle point
    seed = 0, n = 100, m = 5, lo = -1.0, hi = 1.0, shift = 1.0
";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rpdc,
    Appal,
    Rcd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Appal, Algorithm::Rpdc, Algorithm::Rcd];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rpdc => "rpdc",
            Algorithm::Appal => "appal",
            Algorithm::Rcd => "rcd",
        }
    }

    /// Deterministic algorithms ignore the seed and run once.
    pub fn is_randomized(self) -> bool {
        self != Algorithm::Appal
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            theta: default_theta(),
            epsilon: None,
            rho: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemConfig {
    Svm {
        data: PathBuf,
        #[serde(default = "one")]
        c: f64,
        sigma: Option<f64>,
        sample: Option<usize>,
        #[serde(default)]
        sample_seed: u64,
        #[serde(default = "yes")]
        fold_labels: bool,
    },
    Mlp {
        returns: Option<PathBuf>,
        #[serde(default = "default_assets")]
        assets: usize,
        #[serde(default = "default_periods")]
        periods: usize,
        #[serde(default)]
        data_seed: u64,
        target: Option<f64>,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    Synthetic {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_m")]
        m: usize,
        #[serde(default = "neg_one")]
        lo: f64,
        #[serde(default = "one")]
        hi: f64,
        #[serde(default = "one")]
        shift: f64,
    },
}

impl ProblemConfig {
    pub fn label(&self) -> &'static str {
        match self {
            ProblemConfig::Svm { .. } => "svm",
            ProblemConfig::Mlp { .. } => "mlp",
            ProblemConfig::Synthetic { .. } => "synthetic",
        }
    }

    pub fn synthetic_spec(&self, blocks: usize) -> Option<SyntheticSpec> {
        match *self {
            ProblemConfig::Synthetic { seed, n, m, lo, hi, shift } => Some(SyntheticSpec {
                lo,
                hi,
                shift,
                ..SyntheticSpec::new(seed, n, m, blocks)
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_blocks")]
    pub blocks: Vec<usize>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_kkt_every")]
    pub kkt_every: usize,
    #[serde(default)]
    pub record_every: usize,
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Parses `text`; relative data paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).context("invalid configuration")?;
        match &mut cfg.problem {
            ProblemConfig::Svm { data, .. } => *data = base.join(&*data),
            ProblemConfig::Mlp { returns: Some(r), .. } => *r = base.join(&*r),
            _ => {}
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        match &self.problem {
            ProblemConfig::Svm { data, c, sigma, .. } => {
                if !data.is_file() {
                    bail!("data file {} does not exist", data.display());
                }
                if !(*c > 0.0) {
                    bail!("problem.c must be positive, got {c}");
                }
                if sigma.is_some_and(|s| !(s > 0.0)) {
                    bail!("problem.sigma must be positive");
                }
            }
            ProblemConfig::Mlp { returns, assets, periods, .. } => match returns {
                Some(r) if !r.is_file() => bail!("returns file {} does not exist", r.display()),
                Some(_) => {}
                None if *assets < 2 || *periods < 2 => {
                    bail!("synthetic returns need at least 2 assets and 2 periods")
                }
                None => {}
            },
            ProblemConfig::Synthetic { .. } => {}
        }
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            bail!("blocks must be a non-empty list of values >= 1");
        }
        if self.algorithms.is_empty() {
            bail!("algorithms must not be empty");
        }
        if self.seeds.is_empty() && self.algorithms.iter().any(|a| a.is_randomized()) {
            bail!("seeds must not be empty for randomized algorithms");
        }
        if self.params.epsilon.is_some() != self.params.rho.is_some() {
            bail!("params.epsilon and params.rho must be given together");
        }
        if !(self.params.gamma > 0.0) {
            bail!("params.gamma must be positive");
        }
        if !(self.params.theta > 0.0 && self.params.theta < 1.0) {
            bail!("params.theta must lie in (0, 1)");
        }
        if !(self.tol >= 0.0) {
            bail!("tol must be non-negative");
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        if self.record_every > 0 {
            self.record_every
        } else {
            (self.max_iter / 2000).max(1)
        }
    }
}

fn one() -> f64 {
    1.0
}
fn neg_one() -> f64 {
    -1.0
}
fn yes() -> bool {
    true
}
fn default_theta() -> f64 {
    0.9
}
fn default_assets() -> usize {
    10
}
fn default_periods() -> usize {
    240
}
fn default_lambda() -> f64 {
    0.01
}
fn default_n() -> usize {
    100
}
fn default_m() -> usize {
    5
}
fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Rpdc]
}
fn default_blocks() -> Vec<usize> {
    vec![2]
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_max_iter() -> usize {
    10_000
}
fn default_tol() -> f64 {
    1e-8
}
fn default_kkt_every() -> usize {
    10
}
fn default_target() -> f64 {
    1e-4
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("/base"))
    }

    #[test]
    fn defaults_match_reference() {
        let cfg = parse("[problem]\nkind = \"synthetic\"\n").unwrap();
        assert_eq!(cfg.algorithms, vec![Algorithm::Rpdc]);
        assert_eq!(cfg.blocks, vec![2]);
        assert_eq!(cfg.seeds, vec![0]);
        assert_eq!(cfg.max_iter, 10_000);
        assert_eq!(cfg.tol, 1e-8);
        assert_eq!(cfg.params.gamma, 1.0);
        assert_eq!(cfg.params.theta, 0.9);
        assert_eq!(cfg.stride(), 5);
        let spec = cfg.problem.synthetic_spec(3).unwrap();
        assert_eq!((spec.n, spec.m, spec.blocks), (100, 5, 3));
        for needle in ["max_iter     = 10000", "tol          = 1e-8", "theta   = 0.9", "n = 100, m = 5"] {
            assert!(CONFIG_REFERENCE.contains(needle), "{needle}");
        }
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let cfg = parse("[problem]\nkind = \"svm\"\ndata = \"d/heart\"\n").unwrap();
        match cfg.problem {
            ProblemConfig::Svm { data, c, fold_labels, .. } => {
                assert_eq!(data, Path::new("/base/d/heart"));
                assert_eq!(c, 1.0);
                assert!(fold_labels);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn validation_rejects_bad_values() {
        let bad = [
            ("[problem]\nkind = \"svm\"\ndata = \"missing\"\n", "does not exist"),
            ("blocks = [0]\n[problem]\nkind = \"synthetic\"\n", "blocks"),
            ("seeds = []\n[problem]\nkind = \"synthetic\"\n", "seeds"),
            ("[params]\nepsilon = 0.1\n[problem]\nkind = \"synthetic\"\n", "together"),
            ("[params]\ntheta = 1.0\n[problem]\nkind = \"synthetic\"\n", "theta"),
        ];
        for (text, needle) in bad {
            let err = parse(text).unwrap().validate().unwrap_err().to_string();
            assert!(err.contains(needle), "{err}");
        }
        let ok = parse("seeds = []\nalgorithms = [\"appal\"]\n[problem]\nkind = \"synthetic\"\n").unwrap();
        ok.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(parse("bogus = 1\n[problem]\nkind = \"synthetic\"\n").is_err());
        assert!(parse("[problem]\nkind = \"lasso\"\n").is_err());
        assert!(parse("").is_err());
    }
}
