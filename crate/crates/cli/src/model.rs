//! Turns a validated configuration into core types, and wraps the two kinds
//! of solved equilibrium behind one interface.

use tariffsearch_core::extcost::{CostFamily, SearchCostDist};
use tariffsearch_core::noisy::{solve_noisy_linear, solve_noisy_two_part, NoisyEquilibrium, NoisyParams};
use tariffsearch_core::simulate::{self, SimConfig, SimResult};
use tariffsearch_core::stahl::{solve_linear, solve_two_part};
use tariffsearch_core::verify::{self, Tolerances, VerificationReport};
use tariffsearch_core::welfare::{welfare_noisy, welfare_sequential, WelfareReport};
use tariffsearch_core::{
    DemandCurve, DemandFamily, MarketParams, OfferDistribution, Regime, SequentialEquilibrium,
    SolverOptions, SurplusMap,
};

use crate::config::{CostSpec, DemandSpec, ModelKind, RegimeChoice, RunConfig, SolverSpec};
use crate::error::{CliError, CliResult};

pub fn regimes(choice: RegimeChoice) -> Vec<Regime> {
    match choice {
        RegimeChoice::Linear => vec![Regime::Linear],
        RegimeChoice::TwoPart => vec![Regime::TwoPart],
        RegimeChoice::Both => vec![Regime::Linear, Regime::TwoPart],
    }
}

pub fn build_map(demand: &DemandSpec, solver: &SolverSpec) -> CliResult<SurplusMap> {
    let family = DemandFamily::from_name(&demand.family).ok_or_else(|| {
        CliError::Config(format!(
            "demand.family = {:?}; expected linear, quadratic or truncated-isoelastic",
            demand.family
        ))
    })?;
    let curve = DemandCurve::with_tolerance(family, &demand.params, solver.quad_tol)?;
    let opts = SolverOptions {
        quad_tol: solver.quad_tol,
        root_tol: solver.root_tol,
    };
    Ok(SurplusMap::with_options(curve, opts)?)
}

pub fn build_cost(cost: &CostSpec) -> CliResult<SearchCostDist> {
    let family = CostFamily::from_name(&cost.family).ok_or_else(|| {
        CliError::Config(format!(
            "cost.family = {:?}; expected uniform, exponential or truncated-normal",
            cost.family
        ))
    })?;
    Ok(SearchCostDist::new(family, &cost.params)?)
}

/// The market side of a configuration, validated.
#[derive(Debug, Clone)]
pub enum Market {
    Sequential(MarketParams),
    Noisy(NoisyParams),
    ContinuousCost(SearchCostDist),
}

impl Market {
    pub fn from_config(cfg: &RunConfig) -> CliResult<Self> {
        let missing = |section: &str| {
            CliError::Config(format!("model {} needs a [{section}] section", cfg.model.name()))
        };
        let stray = |section: &str| {
            CliError::Config(format!("[{section}] does not apply to model {}", cfg.model.name()))
        };
        match cfg.model {
            ModelKind::Sequential => {
                if cfg.noisy.is_some() {
                    return Err(stray("noisy"));
                }
                if cfg.cost.is_some() {
                    return Err(stray("cost"));
                }
                let m = cfg.market.as_ref().ok_or_else(|| missing("market"))?;
                Ok(Market::Sequential(MarketParams::new(m.n, m.lambda, m.s)?))
            }
            ModelKind::Noisy => {
                if cfg.market.is_some() {
                    return Err(stray("market"));
                }
                if cfg.cost.is_some() {
                    return Err(stray("cost"));
                }
                let p = cfg.noisy.as_ref().ok_or_else(|| missing("noisy"))?;
                Ok(Market::Noisy(NoisyParams::new(p.mu.clone(), p.s)?))
            }
            ModelKind::ContinuousCost => {
                if cfg.market.is_some() {
                    return Err(stray("market"));
                }
                if cfg.noisy.is_some() {
                    return Err(stray("noisy"));
                }
                let c = cfg.cost.as_ref().ok_or_else(|| missing("cost"))?;
                Ok(Market::ContinuousCost(build_cost(c)?))
            }
        }
    }

    pub fn search_cost(&self) -> Option<f64> {
        match self {
            Market::Sequential(p) => Some(p.s()),
            Market::Noisy(p) => Some(p.s()),
            Market::ContinuousCost(_) => None,
        }
    }

    pub fn solve(&self, regime: Regime, map: &SurplusMap) -> CliResult<Equilibrium> {
        Ok(match (self, regime) {
            (Market::Sequential(p), Regime::Linear) => Equilibrium::Sequential(solve_linear(p, map)?),
            (Market::Sequential(p), Regime::TwoPart) => Equilibrium::Sequential(solve_two_part(p, map)?),
            (Market::Noisy(p), Regime::Linear) => Equilibrium::Noisy(solve_noisy_linear(p, map)?),
            (Market::Noisy(p), Regime::TwoPart) => Equilibrium::Noisy(solve_noisy_two_part(p, map)?),
            (Market::ContinuousCost(_), _) => {
                return Err(CliError::Config(
                    "the continuous-cost model has no offer distribution to solve for".into(),
                ))
            }
        })
    }

    /// Welfare of both regimes, solving whatever is needed.
    pub fn welfare(&self, map: &SurplusMap) -> CliResult<WelfareReport> {
        Ok(match self {
            Market::Sequential(p) => {
                welfare_sequential(&solve_two_part(p, map)?, &solve_linear(p, map)?, p, map)?
            }
            Market::Noisy(p) => {
                welfare_noisy(&solve_noisy_two_part(p, map)?, &solve_noisy_linear(p, map)?, p, map)?
            }
            Market::ContinuousCost(g) => tariffsearch_core::extcost::welfare_cont(g, map)?,
        })
    }
}

/// A solved equilibrium of either discrete-search model.
#[derive(Debug, Clone)]
pub enum Equilibrium {
    Sequential(SequentialEquilibrium),
    Noisy(NoisyEquilibrium),
}

macro_rules! forward {
    ($($name:ident -> $t:ty),* $(,)?) => {
        $(pub fn $name(&self) -> $t {
            match self {
                Equilibrium::Sequential(e) => e.$name(),
                Equilibrium::Noisy(e) => e.$name(),
            }
        })*
    };
}

impl Equilibrium {
    forward! {
        regime -> Regime,
        lower -> f64,
        upper -> f64,
        reservation -> f64,
        s_bar -> f64,
        is_boundary -> bool,
        unit_price -> Option<f64>,
        industry_profit -> f64,
        distribution -> &OfferDistribution,
    }

    /// Profit of a single firm; undefined for noisy search, where the
    /// number of firms does not enter.
    pub fn per_firm_profit(&self) -> Option<f64> {
        match self {
            Equilibrium::Sequential(e) => Some(e.per_firm_profit()),
            Equilibrium::Noisy(_) => None,
        }
    }

    pub fn certify(&self, map: &SurplusMap, tol: &Tolerances) -> CliResult<VerificationReport> {
        Ok(match self {
            Equilibrium::Sequential(e) => verify::certify_sequential(e, map, tol)?,
            Equilibrium::Noisy(e) => verify::certify_noisy(e, map, tol)?,
        })
    }

    pub fn check_simulation_inputs(&self, map: &SurplusMap) -> CliResult<()> {
        match self {
            Equilibrium::Sequential(e) => simulate::check_inputs_sequential(e, map)?,
            Equilibrium::Noisy(e) => simulate::check_inputs_noisy(e, map)?,
        }
        Ok(())
    }

    /// Runs the replications on the current rayon pool. Replications are
    /// collected in index order, so the result does not depend on the
    /// number of threads.
    pub fn simulate(&self, map: &SurplusMap, cfg: &SimConfig) -> CliResult<SimResult> {
        use rayon::prelude::*;
        self.check_simulation_inputs(map)?;
        let reps = (0..cfg.replications)
            .into_par_iter()
            .map(|i| match self {
                Equilibrium::Sequential(e) => simulate::replicate_sequential(e, map, cfg, i),
                Equilibrium::Noisy(e) => simulate::replicate_noisy(e, map, cfg, i),
            })
            .collect();
        Ok(simulate::aggregate(*cfg, self.regime(), reps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> RunConfig {
        RunConfig::from_toml(text).unwrap()
    }

    const BASE: &str = r#"
model = "sequential"
[demand]
family = "linear"
params = [1.0, 1.0]
[market]
n = 2
lambda = 0.5
s = 0.1
"#;

    #[test]
    fn solves_the_reference_market() {
        let cfg = config(BASE);
        let map = build_map(&cfg.demand, &cfg.solver).unwrap();
        let market = Market::from_config(&cfg).unwrap();
        let eq = market.solve(Regime::TwoPart, &map).unwrap();
        assert!((eq.reservation() - 0.221_880_104_960_028_84).abs() < 1e-9);
        assert_eq!(eq.unit_price(), Some(0.0));
    }

    #[test]
    fn lambda_one_names_the_bound() {
        let cfg = config(&BASE.replace("lambda = 0.5", "lambda = 1.0"));
        let err = Market::from_config(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("lambda") && err.to_string().contains("(0, 1)"), "{err}");
    }

    #[test]
    fn stray_sections_are_rejected() {
        let text = format!("{BASE}[noisy]\nmu = [0.5, 0.5]\ns = 0.1\n");
        assert!(Market::from_config(&config(&text)).is_err());
    }

    #[test]
    fn unknown_demand_family() {
        let cfg = config(&BASE.replace("\"linear\"", "\"cubic\""));
        assert_eq!(build_map(&cfg.demand, &cfg.solver).unwrap_err().exit_code(), 2);
    }
}
