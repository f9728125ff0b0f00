//! The run configuration: one TOML document. Unknown keys are rejected so
//! that a typo in a sweep cannot silently fall back to a default.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Sequential,
    ContinuousCost,
    Noisy,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sequential => "sequential",
            ModelKind::ContinuousCost => "continuous-cost",
            ModelKind::Noisy => "noisy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeChoice {
    Linear,
    TwoPart,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSpec {
    /// `linear` (`q = a − b p`), `quadratic` (`q = a − b p²`) or
    /// `truncated-isoelastic` (`q = (p̄ − p)^γ`).
    pub family: String,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub n: u32,
    pub lambda: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisySpec {
    pub mu: Vec<f64>,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    /// `uniform`, `exponential` or `truncated-normal`.
    pub family: String,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub quad_tol: f64,
    pub root_tol: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = tariffsearch_core::SolverOptions::default();
        SolverSpec {
            quad_tol: d.quad_tol,
            root_tol: d.root_tol,
        }
    }
}

/// Sweep axes. Absent axes stay at the base configuration's value.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub lambda: Option<Vec<f64>>,
    pub n: Option<Vec<u32>>,
    pub s: Option<Vec<f64>>,
    /// Instead of `s`: this many search costs `2 s̄ k / (points + 1)`,
    /// `k = 1..=points`, where `s̄` is the two-part cutoff at each point.
    pub s_relative_points: Option<u32>,
    /// Noisy model with two responses: `μ = (mu1, 1 − mu1)`.
    pub mu1: Option<Vec<f64>>,
    /// Continuous-cost model: density of search costs at zero.
    pub g0: Option<Vec<f64>>,
    /// Demand curves to repeat the sweep over.
    pub demands: Option<Vec<DemandSpec>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub replications: u32,
    pub consumers: u32,
    #[serde(default)]
    pub per_replication: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub emit_plot_data: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub regime: RegimeChoice,
    pub seed: Option<u64>,
    pub demand: DemandSpec,
    pub market: Option<MarketSpec>,
    pub noisy: Option<NoisySpec>,
    pub cost: Option<CostSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    pub sweep: Option<SweepSpec>,
    pub simulate: Option<SimulateSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
