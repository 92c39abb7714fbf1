use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::SignalSpec;

/// Which experiment a config describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    Concentration,
    LowerBoundKl,
    Sandwich,
    Timing,
    NoiseTail,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::LowerBoundKl => "lower_bound_kl",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::Timing => "timing",
            ExperimentKind::NoiseTail => "noise_tail",
        }
    }
}

/// Declarative description of one experiment, read from JSON.
///
/// Every field except `kind` has a default; the defaults are the desk-scale
/// convergence protocol on the shipped disc layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_signal")]
    pub signal: SignalSpec,
    /// Sweep over the signal's Hölder exponent; empty means the signal's own.
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_prefactor")]
    pub prefactor: f64,
    /// Fixed block side overriding the calibrated bandwidth.
    #[serde(default)]
    pub block: Option<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_oracle_n")]
    pub oracle_n: usize,
    /// Resolution of the grid on which sup-norm errors are measured.
    #[serde(default = "default_eval_n")]
    pub eval_n: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Fill `time_s` in raw rows. Defaults to on for timing runs only, since
    /// wall-clock values make output differ between runs.
    #[serde(default)]
    pub record_timing: Option<bool>,
    /// Thresholds for tail tables (concentration and noise_tail).
    #[serde(default)]
    pub thresholds: Vec<f64>,
    /// Bandwidths swept by lower_bound_kl.
    #[serde(default = "default_hs")]
    pub hs: Vec<f64>,
    /// Levels checked by sandwich.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Dimension of pure-noise fields for noise_tail.
    #[serde(default = "default_noise_dim")]
    pub noise_dim: usize,
}

fn default_signal() -> SignalSpec {
    SignalSpec::default_disc_bumps(1.0)
}
fn default_resolutions() -> Vec<usize> {
    (10..=260).step_by(50).collect()
}
fn default_sigma() -> f64 {
    0.1
}
fn default_prefactor() -> f64 {
    0.1
}
fn default_repetitions() -> usize {
    20
}
fn default_oracle_n() -> usize {
    1000
}
fn default_eval_n() -> usize {
    800
}
fn default_hs() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}
fn default_lambdas() -> Vec<f64> {
    vec![-0.5, 0.0, 0.5]
}
fn default_noise_dim() -> usize {
    2
}

impl ExperimentConfig {
    /// Config of the given kind with every other field at its default.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            signal: default_signal(),
            alphas: Vec::new(),
            resolutions: default_resolutions(),
            sigma: default_sigma(),
            prefactor: default_prefactor(),
            block: None,
            repetitions: default_repetitions(),
            seed: 0,
            oracle_n: default_oracle_n(),
            eval_n: default_eval_n(),
            output_dir: None,
            record_timing: None,
            thresholds: Vec::new(),
            hs: default_hs(),
            lambdas: default_lambdas(),
            noise_dim: default_noise_dim(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Exponents swept, in order.
    pub fn alpha_values(&self) -> Vec<f64> {
        if self.alphas.is_empty() {
            vec![self.signal.alpha()]
        } else {
            self.alphas.clone()
        }
    }

    pub fn timing_enabled(&self) -> bool {
        self.record_timing.unwrap_or(self.kind == ExperimentKind::Timing)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.repetitions < 1 {
            return bad("repetitions must be >= 1".into());
        }
        if self.resolutions.is_empty() {
            return bad("resolutions must not be empty".into());
        }
        if self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return bad("resolutions must be strictly increasing".into());
        }
        if self.resolutions[0] < 2 {
            return bad("resolutions must be >= 2".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if !(self.prefactor > 0.0 && self.prefactor.is_finite()) {
            return bad(format!("prefactor must be positive, got {}", self.prefactor));
        }
        for &a in &self.alpha_values() {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("alpha must lie in (0, 1], got {a}"));
            }
            self.signal.with_alpha(a).validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let max_n = *self.resolutions.last().unwrap();
        if let Some(b) = self.block {
            if b < 1 || b > self.resolutions[0] {
                return bad(format!("block must lie in 1..={}, got {b}", self.resolutions[0]));
            }
        }
        match self.kind {
            ExperimentKind::Convergence | ExperimentKind::Concentration | ExperimentKind::Sandwich => {
                if self.oracle_n <= max_n {
                    return bad(format!("oracle_n ({}) must exceed the largest resolution ({max_n})", self.oracle_n));
                }
                if self.eval_n < max_n {
                    return bad(format!("eval_n ({}) must be at least the largest resolution", self.eval_n));
                }
            }
            ExperimentKind::LowerBoundKl => {
                if !matches!(self.signal, SignalSpec::LowerBoundBase { .. } | SignalSpec::LowerBoundBump { .. }) {
                    return bad("lower_bound_kl needs a lower_bound_base or lower_bound_bump signal".into());
                }
                if self.sigma <= 0.0 {
                    return bad("lower_bound_kl needs sigma > 0".into());
                }
                if self.hs.is_empty() || self.hs.iter().any(|&h| !(h > 0.0 && h <= 0.5)) {
                    return bad("hs must be non-empty with values in (0, 0.5]".into());
                }
            }
            ExperimentKind::NoiseTail => {
                if !(1..=3).contains(&self.noise_dim) {
                    return bad("noise_dim must lie in 1..=3".into());
                }
                if self.block.is_none() {
                    return bad("noise_tail needs an explicit block".into());
                }
                if self.thresholds.iter().any(|t| !t.is_finite()) {
                    return bad("thresholds must be finite".into());
                }
            }
            ExperimentKind::Timing => {}
        }
        Ok(())
    }
}
