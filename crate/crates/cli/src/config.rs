//! Strict TOML run configuration.
//!
//! Every table rejects unknown keys and every block has defaults, so an empty
//! file is a valid configuration. The resolved form (defaults filled in, flag
//! overrides applied) is embedded in each report.

use std::path::{Path, PathBuf};

use lorenz_stability::fields::RecurrenceParams;
use lorenz_stability::lab::Target;
use lorenz_stability::ModelParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Output directory; left out of reports so relocated reruns compare equal.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub model: ModelConfig,
    pub simulate: SimulateConfig,
    pub generator_check: GeneratorCheckConfig,
    pub certificate: CertificateConfig,
    pub brackets: BracketsConfig,
    pub hitting_time: HittingTimeConfig,
    pub stationary: StationaryConfig,
    pub diagnose_degenerate: DiagnoseConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("lorenz-lab-out"),
            model: ModelConfig::default(),
            simulate: SimulateConfig::default(),
            generator_check: GeneratorCheckConfig::default(),
            certificate: CertificateConfig::default(),
            brackets: BracketsConfig::default(),
            hitting_time: HittingTimeConfig::default(),
            stationary: StationaryConfig::default(),
            diagnose_degenerate: DiagnoseConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub gamma: [f64; 3],
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            gamma: [1.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub start: [f64; 3],
    pub dt: f64,
    /// Final time; the path has round(t / dt) steps.
    pub t: f64,
    /// Which trajectory of the seeded batch to produce.
    pub trajectory: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            start: [1.0, 1.0, 1.0],
            dt: 1e-3,
            t: 10.0,
            trajectory: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorCheckConfig {
    /// Registry names, e.g. "H", "M", "V1", "F_N:5". Central differences are
    /// only trustworthy away from the joints of piecewise fields.
    pub fields: Vec<String>,
    pub n_points: u64,
    /// Points are drawn from [−half_width, half_width]³.
    pub half_width: f64,
    pub fd_step: f64,
    /// Autodiff vs finite-difference tolerance (relative, unit floor).
    pub fd_tolerance: f64,
    /// Closed-form oracle tolerance for LH and LM.
    pub oracle_tolerance: f64,
    /// Needed only for the fields "psi1", "psi2" and "V".
    pub recurrence: Option<RecurrenceParams>,
}

impl Default for GeneratorCheckConfig {
    fn default() -> Self {
        GeneratorCheckConfig {
            fields: vec!["H".into(), "H_tilde".into(), "M".into()],
            n_points: 1000,
            half_width: 50.0,
            fd_step: 1e-4,
            fd_tolerance: 1e-6,
            oracle_tolerance: 1e-10,
            recurrence: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateConfig {
    pub recurrence: RecurrenceConfig,
    pub transience: TransienceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecurrenceConfig {
    pub max_doublings: usize,
    pub search_samples: usize,
    pub final_samples: usize,
    pub ladder_steps: u32,
    /// Fixed region radii and weights: verified as given instead of searched.
    pub params: Option<RecurrenceParams>,
}

impl Default for RecurrenceConfig {
    fn default() -> Self {
        RecurrenceConfig {
            max_doublings: 400,
            search_samples: 1000,
            final_samples: 10_000,
            ladder_steps: 20,
            params: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransienceConfig {
    pub samples_per_shell: usize,
    pub ladder_steps: u32,
    pub sphere_directions: usize,
}

impl Default for TransienceConfig {
    fn default() -> Self {
        TransienceConfig {
            samples_per_shell: 10_000,
            ladder_steps: 20,
            sphere_directions: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BracketsConfig {
    pub max_level: usize,
}

impl Default for BracketsConfig {
    fn default() -> Self {
        BracketsConfig { max_level: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HittingTimeConfig {
    pub start: [f64; 3],
    pub target: Target,
    pub dt: f64,
    /// Censoring horizon T.
    pub horizon: f64,
    pub n_traj: u64,
    /// If set, the run fails when the censored mean exceeds this bound by
    /// more than three standard errors.
    pub mean_bound: Option<f64>,
}

impl Default for HittingTimeConfig {
    fn default() -> Self {
        HittingTimeConfig {
            start: [40.0, 0.0, 30.0],
            target: Target::Ball { radius: 30.0 },
            dt: 1e-3,
            horizon: 10.0,
            n_traj: 1000,
            mean_bound: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationaryConfig {
    pub start: [f64; 3],
    pub dt: f64,
    /// Sampling window after burn-in.
    pub t_sample: f64,
    /// Defaults to a fifth of `t_sample`.
    pub burn_in: Option<f64>,
    pub thin: usize,
    pub bins: usize,
    /// Optional Kolmogorov–Smirnov check of one coordinate against a Gaussian.
    pub gaussian_check: Option<GaussianCheck>,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        StationaryConfig {
            start: [5.0, 0.0, 28.0],
            dt: 1e-3,
            t_sample: 1e4,
            burn_in: None,
            thin: 100,
            bins: 100,
            gaussian_check: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianCheck {
    /// 0, 1 or 2 for x, y, z.
    pub coordinate: usize,
    pub mean: f64,
    pub variance: f64,
    pub max_ks: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnoseConfig {
    pub start: [f64; 3],
    pub dt: f64,
    pub horizon: f64,
    pub n_traj: u64,
    pub n_out: usize,
    /// Allowed relative deviation of the z² slope from 2γ₃.
    pub slope_tolerance: f64,
    /// Largest tolerated drop of mean M, in standard errors.
    pub max_drop_z: f64,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        DiagnoseConfig {
            start: [0.0, 0.0, 0.0],
            dt: 1e-3,
            horizon: 5.0,
            n_traj: 1000,
            n_out: 100,
            slope_tolerance: 0.1,
            max_drop_z: 3.0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn model_params(&self) -> Result<ModelParams, String> {
        let m = self.model;
        ModelParams::new(m.sigma, m.rho, m.beta, m.gamma).map_err(|e| format!("[model]: {e}"))
    }

    /// Load-time checks: the model invariants plus obviously bad numbers.
    fn validate(&self) -> Result<(), String> {
        self.model_params()?;
        let positive = [
            ("simulate.dt", self.simulate.dt),
            ("simulate.t", self.simulate.t),
            ("generator_check.half_width", self.generator_check.half_width),
            ("generator_check.fd_step", self.generator_check.fd_step),
            ("hitting_time.dt", self.hitting_time.dt),
            ("hitting_time.horizon", self.hitting_time.horizon),
            ("stationary.dt", self.stationary.dt),
            ("stationary.t_sample", self.stationary.t_sample),
            ("diagnose_degenerate.dt", self.diagnose_degenerate.dt),
            ("diagnose_degenerate.horizon", self.diagnose_degenerate.horizon),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        let starts = [
            ("simulate.start", self.simulate.start),
            ("hitting_time.start", self.hitting_time.start),
            ("stationary.start", self.stationary.start),
            ("diagnose_degenerate.start", self.diagnose_degenerate.start),
        ];
        for (name, s) in starts {
            if s.iter().any(|v| !v.is_finite()) {
                return Err(format!("{name} must be finite, got {s:?}"));
            }
        }
        if let Some(rp) = &self.certificate.recurrence.params {
            rp.validate().map_err(|e| format!("certificate.recurrence.params: {e}"))?;
        }
        if let Some(rp) = &self.generator_check.recurrence {
            rp.validate().map_err(|e| format!("generator_check.recurrence: {e}"))?;
        }
        if let Some(g) = &self.stationary.gaussian_check {
            if g.coordinate > 2 || !(g.variance > 0.0) {
                return Err(format!("stationary.gaussian_check needs coordinate in 0..=2 and variance > 0, got {g:?}"));
            }
        }
        if self.stationary.thin == 0 || self.stationary.bins == 0 {
            return Err("stationary.thin and stationary.bins must be >= 1".into());
        }
        Ok(())
    }
}
