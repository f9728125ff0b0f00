use rayon::prelude::*;

use tariffsearch_core::extcost::{welfare_cont, SearchCostDist};
use tariffsearch_core::noisy::{solve_noisy_linear, solve_noisy_two_part, NoisyParams};
use tariffsearch_core::stahl::{solve_linear, solve_two_part};
use tariffsearch_core::welfare::{cs_bound_checks, welfare_noisy, welfare_sequential, WelfareReport};
use tariffsearch_core::{MarketParams, SurplusMap};

use super::welfare::{SUPPORT_RATIO_TOL, TERMINAL_TOL};
use super::{Context, Outcome};
use crate::config::{DemandSpec, ModelKind, SweepSpec};
use crate::error::{CliError, CliResult};
use crate::model::{build_map, Market};
use crate::output::{flag, num, Table};

pub const SWEEP_HEADER: [&str; 27] = [
    "point",
    "demand",
    "demand_params",
    "lambda",
    "n",
    "mu1",
    "g0",
    "s",
    "regime",
    "lower",
    "upper",
    "reservation",
    "s_bar",
    "boundary",
    "industry_profit",
    "consumer_surplus",
    "total_surplus",
    "top_offer_higher",
    "profit_higher",
    "cs_lower",
    "ts_not_lower",
    "ts_strictly_higher",
    "orderings_hold",
    "terminal_residual",
    "support_ratio_residual",
    "appendix_holds",
    "error",
];

/// Search cost far above any benefit, used to read off `s̄` from the
/// boundary solve.
const HUGE_COST: f64 = 1e300;

/// How a point's search cost is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostPoint {
    Fixed(f64),
    /// `2 s̄ k / (points + 1)` with the point's own two-part `s̄`.
    Relative { k: u32, points: u32 },
}

/// One grid point, fully specified.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub demand: usize,
    pub lambda: Option<f64>,
    pub n: Option<u32>,
    pub mu1: Option<f64>,
    pub g0: Option<f64>,
    pub s: Option<CostPoint>,
}

/// Results for one regime at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeRow {
    pub lower: f64,
    pub upper: f64,
    pub reservation: f64,
    pub s_bar: f64,
    pub boundary: bool,
    pub industry_profit: f64,
    pub consumer_surplus: f64,
    pub total_surplus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub s: f64,
    pub linear: RegimeRow,
    pub two_part: RegimeRow,
    pub top_offer_higher: bool,
    pub profit_higher: bool,
    pub cs_lower: bool,
    pub ts_not_lower: bool,
    pub ts_strictly_higher: bool,
    /// Sequential model only.
    pub terminal_residual: Option<f64>,
    pub support_ratio_residual: Option<f64>,
}

impl PointResult {
    pub fn orderings_hold(&self) -> bool {
        self.top_offer_higher && self.profit_higher && self.cs_lower && self.ts_not_lower
    }

    pub fn appendix_holds(&self) -> Option<bool> {
        match (self.terminal_residual, self.support_ratio_residual) {
            (Some(t), Some(r)) => Some(t >= -TERMINAL_TOL && r.abs() <= SUPPORT_RATIO_TOL),
            _ => None,
        }
    }
}

fn axis<T: Clone>(name: &str, values: &Option<Vec<T>>, base: Option<T>) -> CliResult<Vec<Option<T>>> {
    match values {
        Some(v) if v.is_empty() => Err(CliError::Config(format!("sweep axis {name} is empty"))),
        Some(v) => Ok(v.iter().cloned().map(Some).collect()),
        None => Ok(vec![base]),
    }
}

fn reject(name: &str, present: bool, model: ModelKind) -> CliResult<()> {
    if present {
        return Err(CliError::Config(format!(
            "sweep axis {name} does not apply to model {}",
            model.name()
        )));
    }
    Ok(())
}

/// Expands the sweep axes into grid points, demand outermost and search
/// cost innermost. Also returns the demand list the points index into.
pub fn grid(ctx: &Context, market: &Market) -> CliResult<(Vec<DemandSpec>, Vec<SweepPoint>)> {
    let cfg = ctx.config;
    let spec: &SweepSpec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    let any = spec.lambda.is_some()
        || spec.n.is_some()
        || spec.s.is_some()
        || spec.s_relative_points.is_some()
        || spec.mu1.is_some()
        || spec.g0.is_some()
        || spec.demands.is_some();
    if !any {
        return Err(CliError::Config("[sweep] defines no axis".into()));
    }
    if spec.s.is_some() && spec.s_relative_points.is_some() {
        return Err(CliError::Config("sweep: give s or s_relative_points, not both".into()));
    }
    if spec.s_relative_points == Some(0) {
        return Err(CliError::Config("sweep axis s_relative_points is empty".into()));
    }
    match market {
        Market::Sequential(_) => {
            reject("mu1", spec.mu1.is_some(), cfg.model)?;
            reject("g0", spec.g0.is_some(), cfg.model)?;
        }
        Market::Noisy(_) => {
            reject("lambda", spec.lambda.is_some(), cfg.model)?;
            reject("n", spec.n.is_some(), cfg.model)?;
            reject("g0", spec.g0.is_some(), cfg.model)?;
        }
        Market::ContinuousCost(_) => {
            reject("lambda", spec.lambda.is_some(), cfg.model)?;
            reject("n", spec.n.is_some(), cfg.model)?;
            reject("mu1", spec.mu1.is_some(), cfg.model)?;
            reject("s", spec.s.is_some() || spec.s_relative_points.is_some(), cfg.model)?;
        }
    }

    let demands = match &spec.demands {
        Some(d) if d.is_empty() => return Err(CliError::Config("sweep axis demands is empty".into())),
        Some(d) => d.clone(),
        None => vec![cfg.demand.clone()],
    };
    let (base_lambda, base_n, base_mu1, base_g0) = match market {
        Market::Sequential(p) => (Some(p.lambda()), Some(p.n()), None, None),
        Market::Noisy(p) => (None, None, Some(p.mu()[0]), None),
        Market::ContinuousCost(g) => (None, None, None, Some(g.density_at_zero())),
    };
    let lambdas = axis("lambda", &spec.lambda, base_lambda)?;
    let ns = axis("n", &spec.n, base_n)?;
    let mu1s = axis("mu1", &spec.mu1, base_mu1)?;
    let g0s = axis("g0", &spec.g0, base_g0)?;
    let costs: Vec<Option<CostPoint>> = match (&spec.s, spec.s_relative_points, market.search_cost()) {
        (_, _, None) => vec![None],
        (Some(v), _, _) if v.is_empty() => {
            return Err(CliError::Config("sweep axis s is empty".into()))
        }
        (Some(v), _, _) => v.iter().map(|&s| Some(CostPoint::Fixed(s))).collect(),
        (None, Some(points), _) => {
            (1..=points).map(|k| Some(CostPoint::Relative { k, points })).collect()
        }
        (None, None, Some(s)) => vec![Some(CostPoint::Fixed(s))],
    };

    let mut points = Vec::new();
    for demand in 0..demands.len() {
        for &lambda in &lambdas {
            for &n in &ns {
                for &mu1 in &mu1s {
                    for &g0 in &g0s {
                        for &s in &costs {
                            points.push(SweepPoint { demand, lambda, n, mu1, g0, s });
                        }
                    }
                }
            }
        }
    }
    Ok((demands, points))
}

/// Point-level model, validated before anything is solved.
#[derive(Debug, Clone)]
enum PointModel {
    Sequential(MarketParams),
    Noisy(NoisyParams),
    ContinuousCost(SearchCostDist),
}

fn point_model(market: &Market, p: &SweepPoint) -> CliResult<PointModel> {
    // Relative costs are set after s̄ is known; validate with a stand-in.
    let s = match p.s {
        Some(CostPoint::Fixed(s)) => s,
        _ => 1.0,
    };
    Ok(match market {
        Market::Sequential(_) => {
            PointModel::Sequential(MarketParams::new(p.n.unwrap_or(0), p.lambda.unwrap_or(f64::NAN), s)?)
        }
        Market::Noisy(base) => {
            let mu = match p.mu1 {
                Some(m) if m != base.mu()[0] || base.m() != 2 => vec![m, 1.0 - m],
                _ => base.mu().to_vec(),
            };
            PointModel::Noisy(NoisyParams::new(mu, s)?)
        }
        Market::ContinuousCost(base) => {
            PointModel::ContinuousCost(base.with_density_at_zero(p.g0.unwrap_or(f64::NAN))?)
        }
    })
}

fn regime_row(
    lower: f64,
    upper: f64,
    reservation: f64,
    s_bar: f64,
    boundary: bool,
    w: &tariffsearch_core::welfare::RegimeWelfare,
) -> RegimeRow {
    RegimeRow {
        lower,
        upper,
        reservation,
        s_bar,
        boundary,
        industry_profit: w.industry_profit,
        consumer_surplus: w.consumer_surplus,
        total_surplus: w.total_surplus,
    }
}

fn flags(report: &WelfareReport, top_offer_higher: bool) -> (bool, bool, bool, bool, bool) {
    let o = report.orderings();
    (top_offer_higher, o.profit_higher, o.cs_lower, o.ts_not_lower, o.ts_strictly_higher)
}

fn solve_point(model: &PointModel, cost: Option<CostPoint>, map: &SurplusMap) -> CliResult<PointResult> {
    let relative = |s_bar: f64| match cost {
        Some(CostPoint::Relative { k, points }) => 2.0 * s_bar * k as f64 / (points + 1) as f64,
        _ => unreachable!("only relative costs need s̄"),
    };
    match model {
        PointModel::Sequential(p) => {
            let p = match cost {
                Some(CostPoint::Relative { .. }) => {
                    let s_bar = solve_two_part(&p.with_search_cost(HUGE_COST)?, map)?.s_bar();
                    p.with_search_cost(relative(s_bar))?
                }
                _ => *p,
            };
            let fee = solve_two_part(&p, map)?;
            let rev = solve_linear(&p, map)?;
            let report = welfare_sequential(&fee, &rev, &p, map)?;
            let bounds = cs_bound_checks(&fee, &rev, &p, map)?;
            let (top, ph, csl, tsn, tss) = flags(&report, fee.upper() > rev.upper());
            Ok(PointResult {
                s: p.s(),
                linear: regime_row(rev.lower(), rev.upper(), rev.reservation(), rev.s_bar(), rev.is_boundary(), &report.linear),
                two_part: regime_row(fee.lower(), fee.upper(), fee.reservation(), fee.s_bar(), fee.is_boundary(), &report.two_part),
                top_offer_higher: top,
                profit_higher: ph,
                cs_lower: csl,
                ts_not_lower: tsn,
                ts_strictly_higher: tss,
                terminal_residual: Some(bounds.terminal),
                support_ratio_residual: Some(bounds.support_ratio),
            })
        }
        PointModel::Noisy(p) => {
            let p = match cost {
                Some(CostPoint::Relative { .. }) => {
                    let s_bar = solve_noisy_two_part(&p.with_search_cost(HUGE_COST)?, map)?.s_bar();
                    p.with_search_cost(relative(s_bar))?
                }
                _ => p.clone(),
            };
            let fee = solve_noisy_two_part(&p, map)?;
            let rev = solve_noisy_linear(&p, map)?;
            let report = welfare_noisy(&fee, &rev, &p, map)?;
            let (top, ph, csl, tsn, tss) = flags(&report, fee.upper() > rev.upper());
            Ok(PointResult {
                s: p.s(),
                linear: regime_row(rev.lower(), rev.upper(), rev.reservation(), rev.s_bar(), rev.is_boundary(), &report.linear),
                two_part: regime_row(fee.lower(), fee.upper(), fee.reservation(), fee.s_bar(), fee.is_boundary(), &report.two_part),
                top_offer_higher: top,
                profit_higher: ph,
                cs_lower: csl,
                ts_not_lower: tsn,
                ts_strictly_higher: tss,
                terminal_residual: None,
                support_ratio_residual: None,
            })
        }
        PointModel::ContinuousCost(g) => {
            let report = welfare_cont(g, map)?;
            let t = report.two_part.industry_profit;
            let pi = report.linear.industry_profit;
            let (top, ph, csl, tsn, tss) = flags(&report, t > pi);
            let nan = f64::NAN;
            Ok(PointResult {
                s: nan,
                linear: regime_row(pi, pi, nan, nan, false, &report.linear),
                two_part: regime_row(t, t, nan, nan, t >= map.v0(), &report.two_part),
                top_offer_higher: top,
                profit_higher: ph,
                cs_lower: csl,
                ts_not_lower: tsn,
                ts_strictly_higher: tss,
                terminal_residual: None,
                support_ratio_residual: None,
            })
        }
    }
}

/// Solved sweep, in grid order.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub demands: Vec<DemandSpec>,
    pub points: Vec<SweepPoint>,
    pub results: Vec<Result<PointResult, String>>,
}

impl SweepRun {
    pub fn all_orderings_hold(&self) -> bool {
        self.results.iter().all(|r| r.as_ref().is_ok_and(|p| p.orderings_hold()))
    }

    pub fn all_appendix_hold(&self) -> bool {
        self.results
            .iter()
            .all(|r| r.as_ref().is_ok_and(|p| p.appendix_holds() != Some(false)))
    }

    pub fn errors(&self) -> usize {
        self.results.iter().filter(|r| r.is_err()).count()
    }
}

/// Validates every point, then solves them in parallel. Failures at a
/// point are kept in its result rather than aborting the sweep.
pub fn run_sweep(ctx: &Context) -> CliResult<SweepRun> {
    let cfg = ctx.config;
    let market = Market::from_config(cfg)?;
    let (demands, points) = grid(ctx, &market)?;
    let maps = demands
        .iter()
        .map(|d| build_map(d, &cfg.solver))
        .collect::<CliResult<Vec<_>>>()?;
    let models = points
        .iter()
        .map(|p| point_model(&market, p))
        .collect::<CliResult<Vec<_>>>()?;
    let results = points
        .par_iter()
        .zip(models.par_iter())
        .map(|(p, m)| solve_point(m, p.s, &maps[p.demand]).map_err(|e| e.to_string()))
        .collect();
    Ok(SweepRun { demands, points, results })
}

fn opt_num<T: Copy>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn demand_params(d: &DemandSpec) -> String {
    d.params.iter().map(|&p| num(p)).collect::<Vec<_>>().join(";")
}

pub fn sweep_table(run: &SweepRun) -> Table {
    let mut t = Table::new(&SWEEP_HEADER);
    for (i, (p, r)) in run.points.iter().zip(&run.results).enumerate() {
        let d = &run.demands[p.demand];
        let lead = |regime: &str, s: String| {
            vec![
                i.to_string(),
                d.family.clone(),
                demand_params(d),
                opt_num(p.lambda, num),
                opt_num(p.n, |n| n.to_string()),
                opt_num(p.mu1, num),
                opt_num(p.g0, num),
                s,
                regime.to_string(),
            ]
        };
        match r {
            Ok(res) => {
                for (regime, row) in [("linear", &res.linear), ("two-part", &res.two_part)] {
                    let mut cells = lead(regime, if res.s.is_nan() { String::new() } else { num(res.s) });
                    cells.extend([
                        num(row.lower),
                        num(row.upper),
                        num(row.reservation),
                        num(row.s_bar),
                        flag(row.boundary),
                        num(row.industry_profit),
                        num(row.consumer_surplus),
                        num(row.total_surplus),
                        flag(res.top_offer_higher),
                        flag(res.profit_higher),
                        flag(res.cs_lower),
                        flag(res.ts_not_lower),
                        flag(res.ts_strictly_higher),
                        flag(res.orderings_hold()),
                        opt_num(res.terminal_residual, num),
                        opt_num(res.support_ratio_residual, num),
                        opt_num(res.appendix_holds(), flag),
                        String::new(),
                    ]);
                    t.push(cells);
                }
            }
            Err(msg) => {
                let s = match p.s {
                    Some(CostPoint::Fixed(s)) => num(s),
                    _ => String::new(),
                };
                for regime in ["linear", "two-part"] {
                    let mut cells = lead(regime, s.clone());
                    cells.extend(std::iter::repeat_n(String::new(), 13));
                    cells.push(flag(false));
                    cells.extend([String::new(), String::new(), String::new()]);
                    cells.push(msg.clone());
                    t.push(cells);
                }
            }
        }
    }
    let mut footer = vec![String::new(); SWEEP_HEADER.len()];
    footer[0] = "footer".into();
    footer[22] = flag(run.all_orderings_hold());
    footer[25] = flag(run.all_appendix_hold());
    footer[26] = format!("points={} errors={}", run.points.len(), run.errors());
    t.push(footer);
    t
}

/// Welfare against the innermost axis that varies, one series per
/// combination of the outer axes.
fn plot_tables(run: &SweepRun) -> Vec<(String, Table)> {
    let pts = &run.points;
    let keys: [&dyn Fn(&SweepPoint) -> f64; 6] = [
        &|p| p.demand as f64,
        &|p| p.lambda.unwrap_or(f64::NAN),
        &|p| p.n.map_or(f64::NAN, f64::from),
        &|p| p.mu1.unwrap_or(f64::NAN),
        &|p| p.g0.unwrap_or(f64::NAN),
        &|p| match p.s {
            Some(CostPoint::Fixed(s)) => s,
            Some(CostPoint::Relative { k, .. }) => k as f64,
            None => f64::NAN,
        },
    ];
    let varies = |k: &dyn Fn(&SweepPoint) -> f64| {
        pts.iter().any(|p| k(p).to_bits() != k(&pts[0]).to_bits())
    };
    let axis = (0..keys.len()).rev().find(|&i| varies(keys[i]));
    // Innermost varying axis has this many values per series.
    let run_len = match axis {
        Some(i) => {
            let first = keys[i](&pts[0]).to_bits();
            1 + pts[1..].iter().position(|p| keys[i](p).to_bits() == first).unwrap_or(pts.len() - 1)
        }
        None => 1,
    };
    let run_len = run_len.max(1);
    let mut files = Vec::new();
    type Metric = fn(&RegimeRow) -> f64;
    let metrics: [(&str, Metric); 3] = [
        ("profit", |r| r.industry_profit),
        ("cs", |r| r.consumer_surplus),
        ("ts", |r| r.total_surplus),
    ];
    for (metric, get) in metrics {
        for regime in ["linear", "two-part"] {
            let mut t = Table::new(&["series", "x", "y"]);
            for (i, (p, r)) in pts.iter().zip(&run.results).enumerate() {
                let x = match axis {
                    Some(5) => r.as_ref().map_or(f64::NAN, |res| res.s),
                    Some(a) => keys[a](p),
                    None => i as f64,
                };
                let y = r.as_ref().map_or(f64::NAN, |res| {
                    get(if regime == "linear" { &res.linear } else { &res.two_part })
                });
                t.push(vec![(i / run_len).to_string(), num(x), num(y)]);
            }
            files.push((format!("plot/sweep_{metric}_{regime}.csv"), t));
        }
    }
    files
}

pub fn sweep(ctx: &Context) -> CliResult<Outcome> {
    let run = run_sweep(ctx)?;
    let mut out = Outcome::default();
    if run.errors() > 0 {
        out.warnings.push(format!("{} of {} sweep points failed", run.errors(), run.points.len()));
    }
    out.files.push(("sweep.csv".into(), sweep_table(&run)));
    if ctx.plot_data {
        out.files.extend(plot_tables(&run));
    }
    Ok(out)
}
