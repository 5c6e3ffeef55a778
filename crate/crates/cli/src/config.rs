//! TOML run configuration.
//!
//! One file can carry sections for several commands; each command reads the
//! shared `[green]` table plus its own section and ignores the rest.

use std::path::Path;

use cdgreen::fdsolver::BoundaryCondition;
use cdgreen::quadrature::{NormIntegrand, Region};
use cdgreen::{CoefficientField, DerivKind, ImageGreen, ImageGreenSpec, Preset, Variant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for the randomized sample sets of `selfcheck`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub green: GreenConfig,
    pub eval: Option<EvalConfig>,
    pub norms: Option<NormsConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scaling: Vec<ScalingConfig>,
    pub fd: Option<FdConfig>,
    pub residual: Option<ResidualConfig>,
    pub selfcheck: Option<SelfcheckConfig>,
}

/// Coefficients given by name, as a library preset, or as constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientConfig {
    Named(String),
    Preset(Preset),
    Constants { a: f64, b: f64 },
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        CoefficientConfig::Constants { a: 1.0, b: 0.0 }
    }
}

impl CoefficientConfig {
    pub fn field(&self) -> Result<CoefficientField, CliError> {
        let preset = match self {
            CoefficientConfig::Named(name) => match name.as_str() {
                "unit" => Preset::Constant { a: 1.0, b: 0.0 },
                "double" => Preset::Constant { a: 2.0, b: 0.0 },
                "linear" => Preset::Linear { a0: 1.0, ax: 0.5, ay: 0.0, b0: 0.0 },
                "smooth" => Preset::Smooth { a0: 1.5, amp: 0.5, b0: 0.0 },
                other => {
                    return Err(CliError::Config(format!(
                        "unknown coefficient preset '{other}' (expected unit, double, linear or smooth)"
                    )))
                }
            },
            CoefficientConfig::Preset(p) => p.clone(),
            CoefficientConfig::Constants { a, b } => Preset::Constant { a: *a, b: *b },
        };
        Ok(CoefficientField::from_preset(&preset)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub coefficients: CoefficientConfig,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default = "default_singular")]
    pub singular: [f64; 2],
}

fn default_variant() -> Variant {
    Variant::BarSquare
}

fn default_eps() -> f64 {
    1e-3
}

fn default_singular() -> [f64; 2] {
    [1.0 / 3.0, 0.5]
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig {
            variant: default_variant(),
            coefficients: CoefficientConfig::default(),
            epsilon: default_eps(),
            singular: default_singular(),
        }
    }
}

impl GreenConfig {
    pub fn build(&self, eps: f64) -> Result<ImageGreen, CliError> {
        let spec = ImageGreenSpec { variant: self.variant, field: self.coefficients.field()?, eps };
        Ok(ImageGreen::new(spec, (self.singular[0], self.singular[1]))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default = "default_kind")]
    pub kind: DerivKind,
    #[serde(default = "default_grid_n")]
    pub nx: usize,
    #[serde(default = "default_grid_n")]
    pub ny: usize,
    #[serde(default = "unit_interval")]
    pub xi: [f64; 2],
    #[serde(default = "unit_interval")]
    pub eta: [f64; 2],
    /// Check the peak location and the downstream wake.
    #[serde(default)]
    pub wake_check: bool,
    /// Upper bound for the Riemann sum of the sampled values.
    pub max_mass: Option<f64>,
}

fn default_kind() -> DerivKind {
    DerivKind::Value
}

fn default_grid_n() -> usize {
    513
}

fn unit_interval() -> [f64; 2] {
    [0.0, 1.0]
}

/// Region shapes; ball radii come from the `rho` list of the section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    UnitSquare,
    SquareMinusBall,
    BallIntersectSquare,
    StripWindow { xi: [f64; 2], eta: [f64; 2] },
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig::UnitSquare
    }
}

impl RegionConfig {
    pub fn needs_rho(self) -> bool {
        matches!(self, RegionConfig::SquareMinusBall | RegionConfig::BallIntersectSquare)
    }

    pub fn region(self, center: (f64, f64), rho: Option<f64>) -> Result<Region, CliError> {
        let radius = || rho.ok_or_else(|| CliError::Config("ball regions need a rho list".into()));
        Ok(match self {
            RegionConfig::UnitSquare => Region::UnitSquare,
            RegionConfig::SquareMinusBall => Region::SquareMinusBall { center, radius: radius()? },
            RegionConfig::BallIntersectSquare => Region::BallIntersectSquare { center, radius: radius()? },
            RegionConfig::StripWindow { xi, eta } => Region::StripWindow { xi: (xi[0], xi[1]), eta: (eta[0], eta[1]) },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    pub integrand: NormIntegrand,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub region: RegionConfig,
    #[serde(default)]
    pub rho: Vec<f64>,
    /// Every norm must stay below this value (plus the tolerance).
    pub max_value: Option<f64>,
    /// Largest allowed `max/min - 1` of the norms across the `eps` list.
    pub max_variation: Option<f64>,
    /// Largest allowed `max/min - 1` of `norm / rho` across the `rho` list.
    pub rho_proportional: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelConfig {
    Power,
    LogEps,
    LnRho,
    LnRhoLogEps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub name: String,
    pub integrand: NormIntegrand,
    pub model: ModelConfig,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub region: RegionConfig,
    #[serde(default)]
    pub rho: Vec<f64>,
    /// `rho` entries are multiples of `eps` rather than absolute radii.
    #[serde(default)]
    pub rho_relative: bool,
    /// Accepted interval for the fitted slope.
    pub slope: Option<[f64; 2]>,
    pub max_shape_spread: Option<f64>,
    pub max_rel_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshConfig {
    Uniform,
    Shishkin,
    /// Shishkin in `x`, and in `y` a fine band of width `6 sqrt(eps)` around `1/2`.
    ShishkinFront,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdConfig {
    #[serde(default = "default_fd_n")]
    pub n: usize,
    #[serde(default = "default_mesh")]
    pub mesh: MeshConfig,
    #[serde(default = "default_bcs")]
    pub bc: Vec<BoundaryCondition>,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_probe")]
    pub probe: [f64; 2],
    pub mass: Option<MassCheck>,
    pub representation: Option<RepresentationCheckConfig>,
    pub compare: Option<CompareCheck>,
    pub apriori: Option<AprioriCheckConfig>,
    pub gamma: Option<GammaCheck>,
}

fn default_fd_n() -> usize {
    128
}

fn default_mesh() -> MeshConfig {
    MeshConfig::Shishkin
}

fn default_bcs() -> Vec<BoundaryCondition> {
    vec![BoundaryCondition::Dirichlet]
}

fn default_probe() -> [f64; 2] {
    [0.5, 0.5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassCheck {
    /// Allowed excess over `1/alpha`, relative.
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn default_slack() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationCheckConfig {
    #[serde(default = "default_rep_tol")]
    pub tol: f64,
}

fn default_rep_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareCheck {
    /// Frozen tolerance for the relative L1 difference at the finest mesh.
    pub tol: f64,
    /// Coarser mesh sizes that must show a larger difference.
    #[serde(default)]
    pub coarser: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataConfig {
    F1Linear,
    F2Sine,
    /// `F2 = tanh((y - 1/2) / delta)` with `delta = sqrt(eps) / 4`.
    F2Front,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AprioriCheckConfig {
    pub data: Vec<DataConfig>,
    /// Largest allowed `max/min` of the normalised solution norms.
    #[serde(default = "default_spread")]
    pub max_spread: f64,
    /// Data reported in the output but not gated on.
    #[serde(default)]
    pub informational: Vec<DataConfig>,
}

fn default_spread() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaCheck {
    pub a: Vec<f64>,
    #[serde(default = "default_gamma_n")]
    pub n: usize,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn default_gamma_n() -> usize {
    2048
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualConfig {
    /// Bound for the L1 norm of the defect over the unit square.
    pub max_l1: Option<f64>,
    /// Sample rows in `xi`; rows at or beyond `1/3` must vanish.
    #[serde(default = "default_xi_rows")]
    pub xi: Vec<f64>,
    #[serde(default = "default_eta_rows")]
    pub eta: Vec<f64>,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
}

fn default_xi_rows() -> Vec<f64> {
    vec![0.0, 0.1, 0.2, 0.25, 0.3, 1.0 / 3.0, 0.4, 0.5, 0.75, 1.0]
}

fn default_eta_rows() -> Vec<f64> {
    vec![0.1, 0.3, 0.45, 0.7, 0.9]
}

fn default_zero_tol() -> f64 {
    1e-7
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckGroup {
    Bessel,
    Derivatives,
    FrozenPde,
    Boundary,
    Duality,
    Gamma,
    Quadrature,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 7] = [
        CheckGroup::Bessel,
        CheckGroup::Derivatives,
        CheckGroup::FrozenPde,
        CheckGroup::Boundary,
        CheckGroup::Duality,
        CheckGroup::Gamma,
        CheckGroup::Quadrature,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfcheckConfig {
    #[serde(default = "all_groups")]
    pub groups: Vec<CheckGroup>,
    /// Random field points per `(q, eps)` pair in the derivative checks.
    #[serde(default = "default_points")]
    pub points: usize,
}

fn all_groups() -> Vec<CheckGroup> {
    CheckGroup::ALL.to_vec()
}

fn default_points() -> usize {
    100
}

impl Default for SelfcheckConfig {
    fn default() -> Self {
        SelfcheckConfig { groups: all_groups(), points: default_points() }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The default anisotropic configuration: `a = 1`, `b = 0`, source `(1/3, 1/2)`,
    /// `eps = 1e-3`, a 513 x 513 grid.
    pub fn fig1() -> Self {
        RunConfig {
            eval: Some(EvalConfig {
                kind: DerivKind::Value,
                nx: 513,
                ny: 513,
                xi: unit_interval(),
                eta: unit_interval(),
                wake_check: true,
                max_mass: None,
            }),
            ..RunConfig::default()
        }
    }

    /// SHA-256 of the canonical JSON form, so formatting and comments in the
    /// TOML source do not change the hash.
    pub fn sha256(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("configuration serializes");
        let digest = Sha256::digest(&canonical);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
