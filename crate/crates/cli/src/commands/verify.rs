use std::path::Path;

use tariffsearch_core::extcost::{solve_pi_star, solve_t_star, t_star_by_iteration, SearchCostDist};
use tariffsearch_core::verify::{certify_table, CheckOutcome, VerificationReport};
use tariffsearch_core::{Clientele, SurplusMap, TabulatedCdf};

use super::{Context, Outcome};
use crate::config::RegimeChoice;
use crate::error::{CliError, CliResult};
use crate::model::{build_map, regimes, Market};
use crate::output::{flag, num, Table};

pub const REPORT_HEADER: [&str; 7] =
    ["regime", "check", "residual", "location", "tolerance", "bound", "pass"];

/// Tolerances for the continuous-cost checks before scaling.
const ARGMAX_TOL: f64 = 1e-12;
const FOC_TOL: f64 = 1e-10;
const FIXED_POINT_TOL: f64 = 1e-9;

/// Reads a two-column `x,cdf` CSV. Any deviation from the format is a
/// configuration error.
pub fn read_cdf_table(path: &Path) -> CliResult<TabulatedCdf> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::io(path, e),
            _ => bad(e.to_string()),
        })?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.len() != 2 || &header[0] != "x" || &header[1] != "cdf" {
        return Err(bad(format!("header must be `x,cdf`, found `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let (mut xs, mut cs) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |j: usize| -> CliResult<f64> {
            rec[j]
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: {:?} is not a number", i + 1, &rec[j])))
        };
        xs.push(field(0)?);
        cs.push(field(1)?);
    }
    TabulatedCdf::new(xs, cs).map_err(|e| bad(e.to_string()))
}

fn push_report(table: &mut Table, regime: &str, report: &VerificationReport) {
    for c in &report.checks {
        table.push(vec![
            regime.into(),
            c.name.into(),
            num(c.residual),
            num(c.location),
            num(c.tolerance),
            c.bound.symbol().into(),
            flag(c.pass),
        ]);
    }
}

/// Checks for the continuous-cost model: both offers are best responses on
/// a grid, `π*` solves its first-order condition, the closed-form fee is
/// the fixed point of best responses, and `π* < t*`.
pub fn continuous_checks(
    g: &SearchCostDist,
    map: &SurplusMap,
    scale: f64,
) -> CliResult<(VerificationReport, VerificationReport)> {
    let fee = solve_t_star(g, map);
    let rev = solve_pi_star(g, map)?;
    let g0 = g.density_at_zero();
    let scale_v = scale * map.v0();

    let iterated = t_star_by_iteration(g, map);
    let two_part = VerificationReport {
        checks: vec![
            CheckOutcome::at_most("fee-argmax", fee.argmax_gap, fee.fee, ARGMAX_TOL * scale_v),
            CheckOutcome::at_most(
                "fee-fixed-point",
                (iterated - fee.fee).abs(),
                fee.fee,
                FIXED_POINT_TOL * scale_v,
            ),
        ],
    };
    let foc = (rev.revenue * -map.v_prime(rev.revenue)? - 1.0 / g0).abs();
    let linear = VerificationReport {
        checks: vec![
            CheckOutcome::at_most("revenue-argmax", rev.argmax_gap, rev.price, ARGMAX_TOL * scale_v),
            CheckOutcome::at_most("revenue-foc", foc, rev.revenue, FOC_TOL * scale),
            // Positive margin means π* < t*.
            CheckOutcome::at_least("revenue-below-fee", fee.fee - rev.revenue, rev.revenue, f64::MIN_POSITIVE),
        ],
    };
    Ok((linear, two_part))
}

pub fn verify(ctx: &Context) -> CliResult<Outcome> {
    let cfg = ctx.config;
    let map = build_map(&cfg.demand, &cfg.solver)?;
    let market = Market::from_config(cfg)?;
    let mut table = Table::new(&REPORT_HEADER);
    let mut failed = Vec::new();
    let mut record = |table: &mut Table, regime: &str, report: &VerificationReport| {
        push_report(table, regime, report);
        failed.extend(report.failures().map(|c| format!("{regime}/{}", c.name)));
    };

    if let Some(path) = &ctx.table {
        let regime = match cfg.regime {
            RegimeChoice::Both => {
                return Err(CliError::Config(
                    "verifying a table needs regime = \"linear\" or \"two-part\"".into(),
                ))
            }
            r => regimes(r)[0],
        };
        let (clientele, s) = match &market {
            Market::Sequential(p) => (Clientele::Shoppers(*p), p.s()),
            Market::Noisy(p) => (Clientele::Noisy(p.clone()), p.s()),
            Market::ContinuousCost(_) => {
                return Err(CliError::Config(
                    "the continuous-cost model has no offer distribution to verify".into(),
                ))
            }
        };
        let cdf = read_cdf_table(path)?;
        let report = certify_table(cdf, clientele, regime, s, &map, &ctx.tolerances)?;
        record(&mut table, regime.name(), &report);
    } else if let Market::ContinuousCost(g) = &market {
        let (linear, two_part) = continuous_checks(g, &map, ctx.tolerance_scale)?;
        for regime in regimes(cfg.regime) {
            let report = match regime {
                tariffsearch_core::Regime::Linear => &linear,
                tariffsearch_core::Regime::TwoPart => &two_part,
            };
            record(&mut table, regime.name(), report);
        }
    } else {
        for regime in regimes(cfg.regime) {
            let eq = market.solve(regime, &map)?;
            let report = eq.certify(&map, &ctx.tolerances)?;
            record(&mut table, regime.name(), &report);
        }
    }

    let mut out = Outcome::default();
    out.files.push(("verification.csv".into(), table));
    if !failed.is_empty() {
        out.failure = Some(CliError::VerifyFailed(failed.join(", ")));
    }
    Ok(out)
}
