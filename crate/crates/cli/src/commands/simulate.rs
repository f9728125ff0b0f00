use tariffsearch_core::simulate::{ks_critical_1pct, ks_distance, Estimate, SimConfig, SimResult};
use tariffsearch_core::welfare::expected_min;
use tariffsearch_core::{Regime, SurplusMap};

use super::{Context, Outcome};
use crate::error::{CliError, CliResult};
use crate::model::{build_map, regimes, Equilibrium, Market};
use crate::output::{flag, num, Table};

pub const REPORT_HEADER: [&str; 8] =
    ["regime", "metric", "estimate", "se", "analytic", "z", "draws", "pass"];

pub const REPLICATION_HEADER: [&str; 10] = [
    "regime",
    "replication",
    "consumers",
    "industry_profit",
    "consumer_surplus",
    "shopper_paid",
    "nonshopper_paid",
    "searches",
    "second_round_searches",
    "purchases",
];

/// Estimates agree with analytic values when within this many standard
/// errors.
pub const Z_LIMIT: f64 = 3.0;

/// Analytic counterparts of the simulated quantities.
#[derive(Debug, Clone, Copy)]
pub struct Analytic {
    pub industry_profit: f64,
    pub consumer_surplus: f64,
    pub shopper_paid: f64,
    pub nonshopper_paid: f64,
    pub per_firm_profit: f64,
}

impl Analytic {
    pub fn of(eq: &Equilibrium, consumer_surplus: f64, map: &SurplusMap) -> CliResult<Self> {
        let tol = map.options().quad_tol;
        let dist = eq.distribution();
        let (shopper_paid, nonshopper_paid) = match eq {
            Equilibrium::Sequential(e) => (
                expected_min(dist, e.params().n(), tol)?,
                expected_min(dist, 1, tol)?,
            ),
            // Every consumer buys at the first round's best offer.
            Equilibrium::Noisy(_) => (f64::NAN, eq.industry_profit()),
        };
        Ok(Analytic {
            industry_profit: eq.industry_profit(),
            consumer_surplus,
            shopper_paid,
            nonshopper_paid,
            per_firm_profit: eq.per_firm_profit().unwrap_or(f64::NAN),
        })
    }
}

/// One simulated regime with its analytic targets.
#[derive(Debug, Clone)]
pub struct SimulatedRegime {
    pub result: SimResult,
    pub analytic: Analytic,
    pub ks_distance: f64,
    pub ks_critical: f64,
}

impl SimulatedRegime {
    pub fn run(eq: &Equilibrium, map: &SurplusMap, cfg: &SimConfig, cs: f64) -> CliResult<Self> {
        let analytic = Analytic::of(eq, cs, map)?;
        let mut result = eq.simulate(map, &cfg.keeping_offers())?;
        let mut offers = std::mem::take(&mut result.offers);
        let ks_critical = ks_critical_1pct(offers.len());
        let ks_distance = ks_distance(&mut offers, eq.distribution());
        Ok(SimulatedRegime {
            result,
            analytic,
            ks_distance,
            ks_critical,
        })
    }

    /// Profit and surplus within `Z_LIMIT` SE, no second-round search, and
    /// the offer sample passing the KS test.
    pub fn agrees(&self) -> bool {
        let r = &self.result;
        r.industry_profit.within(self.analytic.industry_profit, Z_LIMIT)
            && r.consumer_surplus.within(self.analytic.consumer_surplus, Z_LIMIT)
            && r.second_round_searches == 0
            && self.ks_distance <= self.ks_critical
    }

    fn push_rows(&self, t: &mut Table) {
        let r = &self.result;
        let a = &self.analytic;
        let regime = r.regime.name();
        let draws = r.config.total_draws();
        let mut estimate = |metric: &str, e: &Estimate, target: f64, checked: bool| {
            let z = e.z_score(target);
            let pass = if checked { flag(z <= Z_LIMIT) } else { String::new() };
            t.push(vec![
                regime.into(),
                metric.into(),
                num(e.mean),
                num(e.se),
                num(target),
                num(z),
                draws.to_string(),
                pass,
            ]);
        };
        estimate("industry-profit", &r.industry_profit, a.industry_profit, true);
        estimate("consumer-surplus", &r.consumer_surplus, a.consumer_surplus, true);
        estimate("shopper-paid", &r.shopper_paid, a.shopper_paid, false);
        estimate("nonshopper-paid", &r.nonshopper_paid, a.nonshopper_paid, false);
        estimate("mean-searches", &r.mean_searches, 1.0, false);
        for (j, e) in r.firm_profit.iter().enumerate() {
            estimate(&format!("firm-{}-profit", j + 1), e, a.per_firm_profit, true);
        }
        let count = |t: &mut Table, metric: &str, value: f64, target: f64, pass: bool| {
            t.push(vec![
                regime.into(),
                metric.into(),
                num(value),
                num(f64::NAN),
                num(target),
                num(f64::NAN),
                draws.to_string(),
                flag(pass),
            ]);
        };
        count(
            t,
            "second-round-searches",
            r.second_round_searches as f64,
            0.0,
            r.second_round_searches == 0,
        );
        let share = if r.purchases == 0 {
            f64::NAN
        } else {
            r.first_round_purchases as f64 / r.purchases as f64
        };
        count(t, "first-round-purchase-share", share, 1.0, r.first_round_purchases == r.purchases);
        count(t, "ks-distance", self.ks_distance, self.ks_critical, self.ks_distance <= self.ks_critical);
    }

    fn push_replications(&self, t: &mut Table) {
        let regime = self.result.regime.name();
        for rep in &self.result.replications {
            let per = |x: f64| x / rep.consumers as f64;
            let ratio = |x: f64, d: u64| if d == 0 { f64::NAN } else { x / d as f64 };
            t.push(vec![
                regime.into(),
                rep.index.to_string(),
                rep.consumers.to_string(),
                num(per(rep.profit)),
                num(per(rep.consumer_surplus)),
                num(ratio(rep.shopper_paid, rep.shoppers)),
                num(ratio(rep.nonshopper_paid, rep.nonshopper_buyers)),
                rep.searches.to_string(),
                rep.second_round_searches.to_string(),
                rep.purchases.to_string(),
            ]);
        }
    }
}

pub fn sim_config(ctx: &Context) -> CliResult<SimConfig> {
    let spec = ctx.config.simulate.as_ref().ok_or_else(|| {
        CliError::Config("simulate needs a [simulate] section with replications and consumers".into())
    })?;
    Ok(SimConfig::new(ctx.seed, spec.replications, spec.consumers)?)
}

/// Solves and simulates every configured regime.
pub fn simulate_regimes(ctx: &Context) -> CliResult<Vec<SimulatedRegime>> {
    let cfg = ctx.config;
    let map = build_map(&cfg.demand, &cfg.solver)?;
    let market = Market::from_config(cfg)?;
    if let Market::ContinuousCost(_) = market {
        return Err(CliError::Config(
            "simulation needs an offer distribution; the continuous-cost model has none".into(),
        ));
    }
    let sim = sim_config(ctx)?;
    let welfare = market.welfare(&map)?;
    regimes(cfg.regime)
        .into_iter()
        .map(|regime| {
            let eq = market.solve(regime, &map)?;
            let cs = match regime {
                Regime::Linear => welfare.linear.consumer_surplus,
                Regime::TwoPart => welfare.two_part.consumer_surplus,
            };
            SimulatedRegime::run(&eq, &map, &sim, cs)
        })
        .collect()
}

pub fn simulate(ctx: &Context) -> CliResult<Outcome> {
    let results = simulate_regimes(ctx)?;
    let mut out = Outcome::default();
    if let Some(w) = results.first().and_then(|r| r.result.config.warning()) {
        out.warnings.push(w);
    }
    let mut report = Table::new(&REPORT_HEADER);
    for r in &results {
        r.push_rows(&mut report);
    }
    out.files.push(("simulation.csv".into(), report));
    if ctx.per_replication {
        let mut reps = Table::new(&REPLICATION_HEADER);
        for r in &results {
            r.push_replications(&mut reps);
        }
        out.files.push(("simulation_replications.csv".into(), reps));
    }
    Ok(out)
}
