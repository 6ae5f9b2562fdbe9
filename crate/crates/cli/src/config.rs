//! Run configuration, read from a versioned TOML document.
//!
//! ```toml
//! version = 1
//! d_max = 2
//! delta_beta = 1e-3
//! checkpoint_every = 0.05
//! beta_max = 0.8
//!
//! [model]
//! name = "ising"
//! h_pin = 1e-6
//! ```
//!
//! Checkpoints are the union of `checkpoints` (β values), `temperatures`
//! (converted to β = 1/T) and multiples of `checkpoint_every` up to
//! `beta_max`. When `beta_max` is absent the largest checkpoint is used.

use std::path::{Path, PathBuf};

use pepo_core::ctm::{default_chi, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use pepo_core::evolution::{UpdateParams, DEFAULT_DELTA_BETA, DEFAULT_LAMBDA_FLOOR, DEFAULT_SVD_CUTOFF};
use pepo_core::models::DEFAULT_PIN;
use pepo_core::{hardcore_bh, ising_model, softcore_bh, AnnealSchedule, Model};
use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_VERSION: u32 = 1;

/// Default scan grid: μ/J from −5 to 5 in steps of 0.25.
pub fn default_mu_grid() -> Vec<f64> {
    (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect()
}

pub fn default_temperatures() -> Vec<f64> {
    vec![0.05, 0.5, 1.0, 1.5, 2.0]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Ising,
    Hardcore,
    Softcore,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: ModelName,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default)]
    pub mu: f64,
    /// On-site repulsion of the soft-core model.
    #[serde(default = "hundred")]
    pub u: f64,
    /// Longitudinal pinning field of the Ising model.
    #[serde(default = "default_pin")]
    pub h_pin: f64,
}

fn one() -> f64 {
    1.0
}

fn hundred() -> f64 {
    100.0
}

fn default_pin() -> f64 {
    DEFAULT_PIN
}

impl ModelConfig {
    pub fn ising(h_pin: f64) -> Self {
        Self { name: ModelName::Ising, j: 1.0, mu: 0.0, u: 100.0, h_pin }
    }

    pub fn hardcore(j: f64, mu: f64) -> Self {
        Self { name: ModelName::Hardcore, j, mu, u: 100.0, h_pin: DEFAULT_PIN }
    }

    pub fn softcore(j: f64, mu: f64, u: f64) -> Self {
        Self { name: ModelName::Softcore, j, mu, u, h_pin: DEFAULT_PIN }
    }

    pub fn build(&self) -> Result<Model, CliError> {
        let m = match self.name {
            ModelName::Ising => ising_model(self.h_pin),
            ModelName::Hardcore => hardcore_bh(self.j, self.mu),
            ModelName::Softcore => softcore_bh(self.j, self.mu, self.u),
        };
        m.map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub mu: Option<Vec<f64>>,
    pub temperatures: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub model: ModelConfig,
    #[serde(default = "two")]
    pub d_max: usize,
    /// Environment dimension; defaults by bond dimension.
    pub chi: Option<usize>,
    #[serde(default = "default_delta_beta")]
    pub delta_beta: f64,
    pub beta_max: Option<f64>,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub temperatures: Vec<f64>,
    pub checkpoint_every: Option<f64>,
    #[serde(default = "default_ctm_tol")]
    pub ctm_tol: f64,
    #[serde(default = "default_ctm_iters")]
    pub ctm_max_iters: usize,
    #[serde(default = "default_svd_cutoff")]
    pub svd_cutoff: f64,
    #[serde(default = "default_lambda_floor")]
    pub lambda_floor: f64,
    pub output: Option<PathBuf>,
    #[serde(default = "one_worker")]
    pub workers: usize,
    /// Write a snapshot file next to the output at every checkpoint.
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default)]
    pub scan: ScanConfig,
}

fn two() -> usize {
    2
}

fn one_worker() -> usize {
    1
}

fn default_delta_beta() -> f64 {
    DEFAULT_DELTA_BETA
}

fn default_ctm_tol() -> f64 {
    DEFAULT_TOL
}

fn default_ctm_iters() -> usize {
    DEFAULT_MAX_ITERS
}

fn default_svd_cutoff() -> f64 {
    DEFAULT_SVD_CUTOFF
}

fn default_lambda_floor() -> f64 {
    DEFAULT_LAMBDA_FLOOR
}

impl RunConfig {
    /// A configuration with every default filled in and no checkpoints.
    pub fn new(model: ModelConfig) -> Self {
        Self {
            version: CONFIG_VERSION,
            model,
            d_max: 2,
            chi: None,
            delta_beta: DEFAULT_DELTA_BETA,
            beta_max: None,
            checkpoints: Vec::new(),
            temperatures: Vec::new(),
            checkpoint_every: None,
            ctm_tol: DEFAULT_TOL,
            ctm_max_iters: DEFAULT_MAX_ITERS,
            svd_cutoff: DEFAULT_SVD_CUTOFF,
            lambda_floor: DEFAULT_LAMBDA_FLOOR,
            output: None,
            workers: 1,
            snapshots: false,
            scan: ScanConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn chi(&self) -> usize {
        self.chi.unwrap_or_else(|| default_chi(self.d_max))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!("version = {} is not supported (expected {CONFIG_VERSION})", self.version));
        }
        if self.d_max == 0 || self.chi == Some(0) || self.workers == 0 || self.ctm_max_iters == 0 {
            return bad("d_max, chi, workers and ctm_max_iters must be at least 1".into());
        }
        if !(self.delta_beta > 0.0) || !self.delta_beta.is_finite() {
            return bad(format!("delta_beta = {} must be positive", self.delta_beta));
        }
        if !(self.ctm_tol > 0.0) {
            return bad(format!("ctm_tol = {} must be positive", self.ctm_tol));
        }
        if !(self.svd_cutoff >= 0.0) || !(self.lambda_floor >= 0.0) {
            return bad("svd_cutoff and lambda_floor must be non-negative".into());
        }
        if let Some(b) = self.beta_max {
            if !(b > self.delta_beta) || !b.is_finite() {
                return bad(format!("beta_max = {b} must exceed delta_beta = {}", self.delta_beta));
            }
        }
        if self.checkpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("checkpoints must be strictly ascending".into());
        }
        if let Some(&c) = self.checkpoints.iter().find(|&&c| !(c > 0.0) || !c.is_finite()) {
            return bad(format!("checkpoint {c} must be a positive inverse temperature"));
        }
        check_temperatures(&self.temperatures)?;
        if let Some(t) = &self.scan.temperatures {
            check_temperatures(t)?;
        }
        if let Some(s) = self.checkpoint_every {
            if !(s > 0.0) || !s.is_finite() {
                return bad(format!("checkpoint_every = {s} must be positive"));
            }
            if self.beta_max.is_none() {
                return bad("checkpoint_every needs beta_max".into());
            }
        }
        self.model.build()?;
        Ok(())
    }

    /// Requested checkpoint β values, ascending and without duplicates.
    pub fn requested_betas(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.checkpoints.clone();
        b.extend(self.temperatures.iter().map(|t| 1.0 / t));
        if let (Some(step), Some(max)) = (self.checkpoint_every, self.beta_max) {
            let n = (max / step * (1.0 + 1e-12)).floor() as usize;
            b.extend((1..=n).map(|k| round_digits(k as f64 * step)));
        }
        b.sort_by(f64::total_cmp);
        b.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs());
        b
    }

    /// The anneal schedule for `betas`, snapped to whole slices.
    pub fn schedule(&self, betas: &[f64]) -> Result<AnnealSchedule, CliError> {
        if betas.is_empty() {
            return Err(CliError::Usage("no checkpoints requested".into()));
        }
        let last = *betas.last().unwrap();
        let beta_max = self.beta_max.unwrap_or(last).max(last);
        let mut s = AnnealSchedule::new(self.delta_beta, beta_max, betas.to_vec())
            .map_err(|e| CliError::Config(e.to_string()))?;
        s.params = UpdateParams { svd_cutoff: self.svd_cutoff, lambda_floor: self.lambda_floor };
        Ok(s)
    }
}

/// Drops the last few bits of representation noise from `k · step`.
fn round_digits(x: f64) -> f64 {
    format!("{x:.12e}").parse().unwrap_or(x)
}

fn check_temperatures(t: &[f64]) -> Result<(), CliError> {
    match t.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        Some(x) => Err(CliError::Config(format!("temperature {x} must be positive"))),
        None => Ok(()),
    }
}
