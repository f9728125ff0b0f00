use tariffsearch_core::extcost::cs_slope_check;
use tariffsearch_core::stahl::{solve_linear, solve_two_part};
use tariffsearch_core::welfare::{cs_bound_checks, WelfareReport};
use tariffsearch_core::SurplusMap;

use super::{Context, Outcome};
use crate::error::CliResult;
use crate::model::{build_map, Market};
use crate::output::{flag, num, Table};

pub const WELFARE_HEADER: [&str; 5] =
    ["model", "regime", "total_surplus", "industry_profit", "consumer_surplus"];
pub const CHECK_HEADER: [&str; 4] = ["check", "value", "tolerance", "pass"];

/// Relative step for the finite-difference surplus slopes.
pub const SLOPE_STEP: f64 = 1e-4;
/// Agreement required between finite-difference and closed-form slopes.
pub const SLOPE_TOL: f64 = 1e-4;
/// Rounding allowance on the terminal surplus inequality.
pub const TERMINAL_TOL: f64 = 1e-12;
/// Allowance on the support-ratio identity.
pub const SUPPORT_RATIO_TOL: f64 = 1e-10;
/// Allowance on the order-statistics profit identity.
pub const PROFIT_IDENTITY_TOL: f64 = 1e-8;

/// A named scalar check.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl WelfareCheck {
    fn flag(name: &str, holds: bool) -> Self {
        WelfareCheck {
            name: name.into(),
            value: if holds { 1.0 } else { 0.0 },
            tolerance: f64::NAN,
            pass: holds,
        }
    }

    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        WelfareCheck {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        WelfareCheck {
            name: name.into(),
            value,
            tolerance,
            pass: value >= tolerance,
        }
    }
}

/// The regime orderings plus model-specific inequalities.
pub fn welfare_checks(
    market: &Market,
    report: &WelfareReport,
    map: &SurplusMap,
) -> CliResult<Vec<WelfareCheck>> {
    let o = report.orderings();
    let mut checks = vec![
        WelfareCheck::flag("profit-higher", o.profit_higher),
        WelfareCheck::flag("cs-lower", o.cs_lower),
        WelfareCheck::flag("ts-not-lower", o.ts_not_lower),
        WelfareCheck::flag("ts-strictly-higher", o.ts_strictly_higher),
        WelfareCheck::at_most(
            "profit-identity",
            report.profit_identity_residual,
            PROFIT_IDENTITY_TOL,
        ),
    ];
    match market {
        Market::Sequential(p) => {
            let fee = solve_two_part(p, map)?;
            let rev = solve_linear(p, map)?;
            checks.push(WelfareCheck::flag("fee-top-above-revenue-top", fee.upper() > rev.upper()));
            let b = cs_bound_checks(&fee, &rev, p, map)?;
            checks.push(WelfareCheck::at_least("terminal-surplus", b.terminal, -TERMINAL_TOL));
            checks.push(WelfareCheck::at_least("linear-cs-bound", b.linear_cs_bound, -TERMINAL_TOL));
            checks.push(WelfareCheck::at_most(
                "support-ratio",
                b.support_ratio.abs(),
                SUPPORT_RATIO_TOL,
            ));
            // Informational: the sign of this expression is not a claim.
            checks.push(WelfareCheck {
                name: "two-part-cs-expression".into(),
                value: b.two_part_cs_expression,
                tolerance: f64::NAN,
                pass: true,
            });
        }
        Market::Noisy(_) => {}
        Market::ContinuousCost(g) => {
            checks.push(WelfareCheck::at_least(
                "fee-minus-revenue",
                report.two_part.industry_profit - report.linear.industry_profit,
                f64::MIN_POSITIVE,
            ));
            let s = cs_slope_check(g, map, SLOPE_STEP)?;
            checks.push(WelfareCheck::at_most("linear-cs-slope", s.linear_rel_residual, SLOPE_TOL));
            checks.push(WelfareCheck::at_most(
                "two-part-cs-slope",
                s.two_part_rel_residual,
                SLOPE_TOL,
            ));
            checks.push(WelfareCheck::flag("linear-cs-rises-slower", s.linear_rises_slower));
        }
    }
    Ok(checks)
}

pub fn welfare(ctx: &Context) -> CliResult<Outcome> {
    let cfg = ctx.config;
    let map = build_map(&cfg.demand, &cfg.solver)?;
    let market = Market::from_config(cfg)?;
    let report = market.welfare(&map)?;
    let model = cfg.model.name();

    let mut table = Table::new(&WELFARE_HEADER);
    for (regime, w) in [("linear", &report.linear), ("two-part", &report.two_part)] {
        table.push(vec![
            model.into(),
            regime.into(),
            num(w.total_surplus),
            num(w.industry_profit),
            num(w.consumer_surplus),
        ]);
    }
    table.push(vec![
        model.into(),
        "two-part-minus-linear".into(),
        num(report.delta_total_surplus()),
        num(report.delta_industry_profit()),
        num(report.delta_consumer_surplus()),
    ]);

    let mut checks = Table::new(&CHECK_HEADER);
    for c in welfare_checks(&market, &report, &map)? {
        checks.push(vec![c.name, num(c.value), num(c.tolerance), flag(c.pass)]);
    }
    let mut out = Outcome::default();
    out.files.push(("welfare.csv".into(), table));
    out.files.push(("welfare_checks.csv".into(), checks));
    Ok(out)
}
