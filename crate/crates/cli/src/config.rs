//! Run configuration: JSON with a schema version; unknown keys rejected.

use std::fmt;
use std::path::PathBuf;

use gradgraph::solutions::SolutionDescriptor;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Generate,
    Expand,
    Flux,
    Poisson,
    Legendre,
    VerifyAll,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Generate => "generate",
            Scenario::Expand => "expand",
            Scenario::Flux => "flux",
            Scenario::Poisson => "poisson",
            Scenario::Legendre => "legendre",
            Scenario::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Geometric ring ladder used by the fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    pub r_min: f64,
    pub r_max: f64,
    pub n_rings: usize,
    pub n_theta: usize,
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder {
            r_min: 10.0,
            r_max: 1e4,
            n_rings: 40,
            n_theta: 256,
        }
    }
}

/// Pass thresholds. All must be positive except `remainder_slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest acceptable per-field fit error estimate.
    pub fit_error: f64,
    /// Fitted d against the oracle.
    pub d_oracle: f64,
    /// Flux d against the oracle.
    pub flux_oracle: f64,
    /// Flux d against fitted d, exact families.
    pub flux_fit: f64,
    /// Flux d against fitted d, ODE families.
    pub flux_fit_ode: f64,
    /// Relative spread of flux d across contour radii.
    pub flux_spread: f64,
    /// Largest log-log slope accepted for decaying quantities.
    pub remainder_slope: f64,
    pub symmetry: f64,
    /// Relative spread of `u + ½K|x|²` along level sets.
    pub radiality: f64,
    /// `|Q·DF(A) - ½I|`.
    pub q_consistency: f64,
    /// Equation residual on sampled points.
    pub equation_residual: f64,
    /// Relative mode-ODE residual of the Poisson solve.
    pub mode_residual: f64,
    /// Relative error of the manufactured Poisson solve.
    pub poisson_error: f64,
    /// Growing-mode content of the Poisson solve.
    pub growing_ratio: f64,
    /// Dual equation constant.
    pub dual_constant: f64,
    /// Eigenvalue transport identity.
    pub eigen_identity: f64,
    /// Special Lagrangian residual of a rotated solution.
    pub rotation_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fit_error: 1e-4,
            d_oracle: 1e-6,
            flux_oracle: 1e-8,
            flux_fit: 1e-6,
            flux_fit_ode: 1e-4,
            flux_spread: 1e-7,
            remainder_slope: -1.8,
            symmetry: 1e-10,
            radiality: 1e-8,
            q_consistency: 1e-10,
            equation_residual: 1e-8,
            mode_residual: 1e-8,
            poisson_error: 1e-6,
            growing_ratio: 1e-6,
            dual_constant: 1e-8,
            eigen_identity: 1e-7,
            rotation_residual: 1e-9,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        let t = self;
        let positive = [
            ("fit_error", t.fit_error),
            ("d_oracle", t.d_oracle),
            ("flux_oracle", t.flux_oracle),
            ("flux_fit", t.flux_fit),
            ("flux_fit_ode", t.flux_fit_ode),
            ("flux_spread", t.flux_spread),
            ("symmetry", t.symmetry),
            ("radiality", t.radiality),
            ("q_consistency", t.q_consistency),
            ("equation_residual", t.equation_residual),
            ("mode_residual", t.mode_residual),
            ("poisson_error", t.poisson_error),
            ("growing_ratio", t.growing_ratio),
            ("dual_constant", t.dual_constant),
            ("eigen_identity", t.eigen_identity),
            ("rotation_residual", t.rotation_residual),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::field(format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        if !(t.remainder_slope < 0.0) {
            return Err(CliError::field("tolerances.remainder_slope", "must be negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Toggle {
    /// Decided from the solution descriptor.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxConfig {
    /// Contour radii; chosen from the solution domain when absent.
    pub radii: Option<Vec<f64>>,
    pub n_quad: usize,
}

impl Default for FluxConfig {
    fn default() -> Self {
        FluxConfig { radii: None, n_quad: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub symmetry: Toggle,
    pub symmetry_samples: usize,
    pub radiality: Toggle,
    pub radiality_k: f64,
    pub radiality_levels: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            symmetry: Toggle::Auto,
            symmetry_samples: 1000,
            radiality: Toggle::Auto,
            radiality_k: 0.0,
            radiality_levels: 5,
        }
    }
}

/// One term `c r^{-p} (ln r)^q cos(mθ)` (or `sin`) of a manufactured
/// Poisson solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedTerm {
    pub c: f64,
    pub p: f64,
    #[serde(default)]
    pub q: u32,
    pub m: usize,
    #[serde(default)]
    pub sin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonConfig {
    pub r_in: f64,
    pub r_out: f64,
    /// Log-spacing of the ladder.
    pub h: f64,
    pub n_theta: usize,
    pub kmax: usize,
    pub k1: f64,
    pub k2: f64,
    pub terms: Vec<ManufacturedTerm>,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        PoissonConfig {
            r_in: 3.0,
            r_out: 1e3,
            h: 0.02,
            n_theta: 32,
            kmax: 4,
            k1: 4.0,
            k2: 0.0,
            terms: vec![
                ManufacturedTerm { c: 1.0, p: 2.0, q: 0, m: 0, sin: false },
                ManufacturedTerm { c: 1.0, p: 2.0, q: 0, m: 1, sin: false },
                ManufacturedTerm { c: 0.5, p: 2.0, q: 0, m: 1, sin: true },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LegendreConfig {
    pub n_points: usize,
}

impl Default for LegendreConfig {
    fn default() -> Self {
        LegendreConfig { n_points: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    #[serde(default = "default_solution")]
    pub solution: SolutionDescriptor,
    #[serde(default)]
    pub ladder: Ladder,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub flux: FluxConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub poisson: PoissonConfig,
    #[serde(default)]
    pub legendre: LegendreConfig,
    #[serde(default)]
    pub seed: u64,
    /// Not echoed into the report, so output location never changes it.
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
}

fn default_solution() -> SolutionDescriptor {
    SolutionDescriptor::MaRadialExact { c0: 0.0, c1: 1.0 }
}

impl RunConfig {
    pub fn new(scenario: Scenario, solution: SolutionDescriptor) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            scenario,
            solution,
            ladder: Ladder::default(),
            tolerances: Tolerances::default(),
            flux: FluxConfig::default(),
            checks: ChecksConfig::default(),
            poisson: PoissonConfig::default(),
            legendre: LegendreConfig::default(),
            seed: 0,
            output: OutputConfig::default(),
        }
    }

    /// Parses and validates; syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::ConfigInvalid {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::field(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        let l = &self.ladder;
        if !(l.r_min > 0.0 && l.r_min < l.r_max && l.r_max.is_finite()) {
            return Err(CliError::field("ladder", format!("need 0 < r_min < r_max, got [{}, {}]", l.r_min, l.r_max)));
        }
        if l.n_rings < 3 {
            return Err(CliError::field("ladder.n_rings", "need at least 3 rings"));
        }
        if l.n_theta < 8 || l.n_theta % 2 != 0 {
            return Err(CliError::field("ladder.n_theta", format!("must be even and at least 8, got {}", l.n_theta)));
        }
        self.tolerances.validate()?;
        if self.flux.n_quad < 64 {
            return Err(CliError::field("flux.n_quad", "must be at least 64"));
        }
        if let Some(r) = &self.flux.radii {
            if r.len() < 3 || r.iter().any(|v| !(*v > 0.0)) {
                return Err(CliError::field("flux.radii", "need at least 3 positive radii"));
            }
        }
        let p = &self.poisson;
        if !(p.r_in > 0.0 && p.r_out > p.r_in && p.h > 0.0) {
            return Err(CliError::field("poisson", "need 0 < r_in < r_out and h > 0"));
        }
        if p.n_theta < 8 || p.n_theta % 2 != 0 {
            return Err(CliError::field("poisson.n_theta", "must be even and at least 8"));
        }
        if !(p.k1 > 2.0) {
            return Err(CliError::field("poisson.k1", "must exceed 2"));
        }
        for (i, t) in p.terms.iter().enumerate() {
            if !(t.p > 0.0) {
                return Err(CliError::field(format!("poisson.terms[{i}].p"), "must be positive for a decaying solution"));
            }
            if t.m > p.kmax {
                return Err(CliError::field(format!("poisson.terms[{i}].m"), "exceeds poisson.kmax"));
            }
            if t.m == 0 && t.sin {
                return Err(CliError::field(format!("poisson.terms[{i}].sin"), "mode 0 has no sine part"));
            }
        }
        if self.checks.symmetry_samples == 0 {
            return Err(CliError::field("checks.symmetry_samples", "must be positive"));
        }
        if self.checks.radiality_levels == 0 {
            return Err(CliError::field("checks.radiality_levels", "must be positive"));
        }
        if self.legendre.n_points == 0 {
            return Err(CliError::field("legendre.n_points", "must be positive"));
        }
        Ok(())
    }
}
