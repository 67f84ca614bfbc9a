//! Run configuration: one JSON document per command, with every field
//! defaulted so a resolved config can be logged into the outputs.

use driftless::{CantorBase, DiffusionSpec, Statistic};
use serde::{Deserialize, Serialize};

fn default_seed() -> u64 {
    0
}
fn default_workers() -> usize {
    0 // 0 = library default
}
fn default_c() -> f64 {
    0.5
}
fn default_format() -> OutputFormat {
    OutputFormat::Json
}
fn default_grid_points() -> usize {
    (1 << 17) + 1
}
fn default_statistic() -> Statistic {
    Statistic::MeanSup
}
fn default_paths() -> usize {
    10_000
}
fn default_steps() -> usize {
    1_000
}
fn default_t() -> f64 {
    1.0
}
fn default_floor() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunConfig {
    Classify(ClassifyConfig),
    Cantor(CantorConfig),
    Simulate(SimulateConfig),
    Rates(RatesConfig),
    Density(DensityConfig),
    Residual(ResidualConfig),
}

impl RunConfig {
    pub fn seed_mut(&mut self) -> &mut u64 {
        match self {
            RunConfig::Classify(c) => &mut c.seed,
            RunConfig::Cantor(c) => &mut c.seed,
            RunConfig::Simulate(c) => &mut c.seed,
            RunConfig::Rates(c) => &mut c.seed,
            RunConfig::Density(c) => &mut c.seed,
            RunConfig::Residual(c) => &mut c.seed,
        }
    }

    pub fn workers_mut(&mut self) -> &mut usize {
        match self {
            RunConfig::Classify(c) => &mut c.worker_count,
            RunConfig::Cantor(c) => &mut c.worker_count,
            RunConfig::Simulate(c) => &mut c.worker_count,
            RunConfig::Rates(c) => &mut c.worker_count,
            RunConfig::Density(c) => &mut c.worker_count,
            RunConfig::Residual(c) => &mut c.worker_count,
        }
    }

    pub fn workers(&self) -> usize {
        match self {
            RunConfig::Classify(c) => c.worker_count,
            RunConfig::Cantor(c) => c.worker_count,
            RunConfig::Simulate(c) => c.worker_count,
            RunConfig::Rates(c) => c.worker_count,
            RunConfig::Density(c) => c.worker_count,
            RunConfig::Residual(c) => c.worker_count,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub sigma: DiffusionSpec,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub monotone: bool,
    #[serde(default)]
    pub sigma_zero_is_zero: bool,
    /// JSON report destination; stdout when omitted.
    #[serde(default)]
    pub output: Option<String>,
    /// Per-x (x, mu, nu) table destination.
    #[serde(default)]
    pub diagnostics_csv: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorConfig {
    pub lambda: f64,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default = "default_base")]
    pub base: String,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
}

fn default_n_max() -> u32 {
    12
}
fn default_base() -> String {
    "zero".into()
}

pub fn parse_base(name: &str) -> Result<CantorBase, String> {
    match name {
        "zero" => Ok(CantorBase::Zero),
        "identity" => Ok(CantorBase::Identity),
        other => Err(format!("unknown Cantor base '{other}' (zero|identity)")),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub sigma: DiffusionSpec,
    /// Second coefficient of the coupled pair; defaults to `sigma`
    /// (the null coupling).
    #[serde(default)]
    pub sigma_n: Option<DiffusionSpec>,
    pub x0: f64,
    #[serde(default = "default_t")]
    pub t_horizon: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Absorption at 0; defaults to the σ(0) = 0, ε = 0 policy.
    #[serde(default)]
    pub absorb_at_zero: Option<bool>,
    #[serde(default = "default_statistic")]
    pub statistic: Statistic,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
}

/// Approximation family for rate experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `σ = 1` vs `σ_n = 1 + 2^{-n}`.
    Constant { n_min: u32, n_max: u32 },
    /// `σ = |x|^α` vs `σ_n = σ + 2^{-n}`.
    PowerLawShift { alpha: f64, n_min: u32, n_max: u32 },
    /// Extended Cantor limit vs iterates, both shifted by ε.
    Cantor {
        lambda: f64,
        #[serde(default)]
        epsilon: f64,
        #[serde(default = "default_base")]
        base: String,
        n_min: u32,
        n_max: u32,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimeSpec {
    HolderHalf,
    HolderAbove { h: f64 },
    NlgZero { epsilon: f64 },
    NlgPositive { h: f64, epsilon: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundParamsSpec {
    #[serde(default)]
    pub c_h: f64,
    #[serde(default)]
    pub sigma_sup: f64,
    #[serde(default)]
    pub c_l: f64,
    #[serde(default)]
    pub f_sup: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub family: FamilySpec,
    pub regime: RegimeSpec,
    #[serde(default)]
    pub bound_params: BoundParamsSpec,
    pub x0: f64,
    #[serde(default = "default_t")]
    pub t_horizon: f64,
    /// Grid steps; omitted means "choose from the h^(1/2) rule against the
    /// measured min Δ".
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub absorb_at_zero: Option<bool>,
    #[serde(default = "default_statistic")]
    pub statistic: Statistic,
    /// Sup-distance grid; Cantor breakpoints are added automatically for
    /// Cantor families.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub output_csv: Option<String>,
    #[serde(default)]
    pub output_json: Option<String>,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_grid_points")]
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub sigma: DiffusionSpec,
    pub x0: f64,
    #[serde(default = "default_t")]
    pub t_horizon: f64,
    /// Observation time; defaults to the horizon.
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub absorb_at_zero: Option<bool>,
    pub grid: GridSpec,
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default)]
    pub output_csv: Option<String>,
    #[serde(default)]
    pub output_json: Option<String>,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualConfig {
    pub sigma: DiffusionSpec,
    pub x0: f64,
    #[serde(default = "default_t")]
    pub t_horizon: f64,
    pub t: f64,
    pub dt: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub absorb_at_zero: Option<bool>,
    /// Bump test functions; defaults to three bumps around x0.
    #[serde(default)]
    pub test_functions: Option<Vec<BumpSpec>>,
    #[serde(default = "default_floor")]
    pub tolerance_floor: f64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
}
