use tariffsearch_core::extcost::{solve_pi_star, solve_t_star};
use tariffsearch_core::TabulatedCdf;

use super::{Context, Outcome};
use crate::error::CliResult;
use crate::model::{build_map, regimes, Market};
use crate::output::{flag, num, Table};

/// Rows in each sampled CDF table.
pub const CDF_ROWS: usize = 512;

pub const SUMMARY_HEADER: [&str; 10] = [
    "model",
    "regime",
    "lower",
    "upper",
    "reservation",
    "s_bar",
    "boundary",
    "unit_price",
    "per_firm_profit",
    "industry_profit",
];

pub fn cdf_table(cdf: &TabulatedCdf) -> Table {
    let mut t = Table::new(&["x", "cdf"]);
    for (x, c) in cdf.rows() {
        t.push(vec![num(x), num(c)]);
    }
    t
}

pub fn solve(ctx: &Context) -> CliResult<Outcome> {
    let cfg = ctx.config;
    let map = build_map(&cfg.demand, &cfg.solver)?;
    let market = Market::from_config(cfg)?;
    let model = cfg.model.name();
    let mut summary = Table::new(&SUMMARY_HEADER);
    let mut out = Outcome::default();

    if let Market::ContinuousCost(g) = &market {
        // Both regimes have a single posted offer.
        let fee = solve_t_star(g, &map);
        let rev = solve_pi_star(g, &map)?;
        for regime in regimes(cfg.regime) {
            let (offer, price) = match regime {
                tariffsearch_core::Regime::Linear => (rev.revenue, rev.price),
                tariffsearch_core::Regime::TwoPart => (fee.fee, 0.0),
            };
            summary.push(vec![
                model.into(),
                regime.name().into(),
                num(offer),
                num(offer),
                num(f64::NAN),
                num(f64::NAN),
                flag(regime == tariffsearch_core::Regime::TwoPart && fee.clamped),
                num(price),
                num(offer),
                num(offer),
            ]);
        }
        out.files.push(("summary.csv".into(), summary));
        return Ok(out);
    }

    for regime in regimes(cfg.regime) {
        let eq = market.solve(regime, &map)?;
        summary.push(vec![
            model.into(),
            regime.name().into(),
            num(eq.lower()),
            num(eq.upper()),
            num(eq.reservation()),
            num(eq.s_bar()),
            flag(eq.is_boundary()),
            num(eq.unit_price().unwrap_or(f64::NAN)),
            num(eq.per_firm_profit().unwrap_or(f64::NAN)),
            num(eq.industry_profit()),
        ]);
        let table = cdf_table(&TabulatedCdf::sample(eq.distribution(), CDF_ROWS));
        if ctx.plot_data {
            let mut plot = Table::new(&["x", "y"]);
            plot.rows = table.rows.clone();
            out.files.push((format!("plot/cdf_{}.csv", regime.name()), plot));
        }
        out.files.push((format!("cdf_{}.csv", regime.name()), table));
    }
    out.files.insert(0, ("summary.csv".into(), summary));
    Ok(out)
}
