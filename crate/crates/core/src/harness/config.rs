//! Experiment configuration in TOML.
//!
//! ```toml
//! seed = 7                      # optional, default 0
//! output_dir = "out"            # optional, default "output"
//!
//! [measure]
//! phase = { law = "wrapped-gaussian", center = 0.0, sigma = 1.0 }
//! frequency = { law = "gaussian", mean = 0.0, sd = 1.0 }
//!
//! [model]
//! strength = 1.0                # K
//! constant = 0.0                # optional f_0
//! harmonics = [{ l = 1, re = 0.0, im = -0.5 }]   # optional, default f = sin
//!
//! [integrator]
//! t_end = 5.0
//! dt = 0.01                     # optional, default 1e-3·2π/max(1, K, spread of g)
//! stride = 10                   # optional, default 1
//!
//! [discretization]              # optional section
//! n_omega = 40
//! n_theta = 128
//!
//! [truncation]                  # optional section
//! m_max = 24
//! k_max = 24
//!
//! [observables]                 # optional section
//! moments = [[0, 1]]            # (m, k) pairs to record
//!
//! [experiment]                  # needed only by the convergence study
//! n_list = [100, 400, 1600, 6400]
//! trials = 20
//! times = [0.0, 2.0, 5.0]
//! delta = 0.05                  # optional
//! ```
//!
//! Unknown keys anywhere are errors. Missing required keys are reported
//! together.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::Coupling;
use crate::error::{Error, Result};
use crate::measures::{FrequencyLaw, MeasureSpec};
use crate::oscillators;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub measure: MeasureSpec,
    pub model: ModelConfig,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub observables: ObservablesConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub l: u32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub strength: f64,
    #[serde(default)]
    pub constant: f64,
    #[serde(default = "sine_harmonics")]
    pub harmonics: Vec<Harmonic>,
}

fn sine_harmonics() -> Vec<Harmonic> {
    vec![Harmonic { l: 1, re: 0.0, im: -0.5 }]
}

impl ModelConfig {
    pub fn coupling(&self) -> Result<Coupling> {
        let h: Vec<(u32, Complex64)> = self
            .harmonics
            .iter()
            .map(|h| (h.l, Complex64::new(h.re, h.im)))
            .collect();
        Coupling::from_harmonics(self.constant, &h).map_err(|e| Error::Config(format!("model: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    #[serde(default = "default_n_omega")]
    pub n_omega: usize,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
}

fn default_n_omega() -> usize {
    40
}

fn default_n_theta() -> usize {
    128
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            n_omega: default_n_omega(),
            n_theta: default_n_theta(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default = "default_truncation")]
    pub m_max: usize,
    #[serde(default = "default_truncation")]
    pub k_max: usize,
}

fn default_truncation() -> usize {
    24
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            m_max: default_truncation(),
            k_max: default_truncation(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesConfig {
    #[serde(default = "default_moments")]
    pub moments: Vec<(usize, i64)>,
}

fn default_moments() -> Vec<(usize, i64)> {
    vec![(0, 1)]
}

impl Default for ObservablesConfig {
    fn default() -> Self {
        Self {
            moments: default_moments(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub times: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    0.05
}

const REQUIRED: &[&str] = &[
    "measure.phase",
    "measure.frequency",
    "model.strength",
    "integrator.t_end",
];

const REQUIRED_EXPERIMENT: &[&str] = &["experiment.n_list", "experiment.trials", "experiment.times"];

fn has_path(root: &toml::Table, path: &str) -> bool {
    let mut table = root;
    let mut parts = path.split('.').peekable();
    while let Some(part) = parts.next() {
        match table.get(part) {
            None => return false,
            Some(_) if parts.peek().is_none() => return true,
            Some(toml::Value::Table(t)) => table = t,
            Some(_) => return false,
        }
    }
    true
}

impl SimConfig {
    /// Parses and validates a configuration document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let root: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("malformed TOML: {}", e.message())))?;
        let mut missing: Vec<&str> = REQUIRED.iter().copied().filter(|p| !has_path(&root, p)).collect();
        if root.contains_key("experiment") {
            missing.extend(REQUIRED_EXPERIMENT.iter().copied().filter(|p| !has_path(&root, p)));
        }
        if !missing.is_empty() {
            return Err(Error::Config(format!("missing required keys: {}", missing.join(", "))));
        }
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize configuration: {e}")))
    }

    /// The configuration with every defaulted value written out, including
    /// the resolved time step.
    pub fn effective(&self) -> Self {
        let mut e = self.clone();
        e.integrator.dt = Some(self.dt());
        e
    }

    /// Configured `dt`, or `1e-3·2π / max(1, K, ω_scale)` where `ω_scale`
    /// bounds the bulk of the frequency law.
    pub fn dt(&self) -> f64 {
        self.integrator.dt.unwrap_or_else(|| {
            let scale = match self.measure.frequency() {
                FrequencyLaw::Gaussian { mean, sd } => mean.abs() + 4.0 * sd,
                FrequencyLaw::BimodalGaussian { offset, sd } => offset.abs() + 4.0 * sd,
                FrequencyLaw::Uniform { lo, hi } => lo.abs().max(hi.abs()),
                FrequencyLaw::Atoms { atoms } => atoms.iter().fold(0.0, |m, a| f64::max(m, a.0.abs())),
                FrequencyLaw::Lorentzian { .. } => 1.0,
            };
            oscillators::default_dt(&[scale], self.model.strength)
        })
    }

    pub fn coupling(&self) -> Result<Coupling> {
        self.model.coupling()
    }

    /// Largest `m` among the observed moments.
    pub fn max_observed_m(&self) -> usize {
        self.observables.moments.iter().map(|p| p.0).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.model.strength) {
            return bad(format!("model.strength must be finite and nonnegative, got {}", self.model.strength));
        }
        self.coupling()?;
        if !finite_nonneg(self.integrator.t_end) {
            return bad(format!("integrator.t_end must be finite and nonnegative, got {}", self.integrator.t_end));
        }
        if let Some(dt) = self.integrator.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad(format!("integrator.dt must be finite and positive, got {dt}"));
            }
        }
        if self.integrator.stride == 0 {
            return bad("integrator.stride must be at least 1".into());
        }
        if self.discretization.n_omega == 0 || self.discretization.n_theta == 0 {
            return bad("discretization.n_omega and n_theta must be at least 1".into());
        }
        if self.observables.moments.is_empty() {
            return bad("observables.moments must name at least one (m, k) pair".into());
        }
        if let Some(ex) = &self.experiment {
            if ex.n_list.is_empty() || ex.n_list[0] == 0 || ex.n_list.windows(2).any(|w| w[1] <= w[0]) {
                return bad("experiment.n_list must be positive and strictly increasing".into());
            }
            if ex.trials == 0 {
                return bad("experiment.trials must be at least 1".into());
            }
            if ex.times.is_empty()
                || ex.times.iter().any(|t| !finite_nonneg(*t))
                || ex.times.windows(2).any(|w| w[1] <= w[0])
            {
                return bad("experiment.times must be nonnegative, finite and strictly increasing".into());
            }
            if !(ex.delta > 0.0 && ex.delta < 1.0) {
                return bad(format!("experiment.delta must lie in (0, 1), got {}", ex.delta));
            }
        }
        Ok(())
    }
}
