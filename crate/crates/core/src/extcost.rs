//! Continuously distributed search costs.
//!
//! Each consumer's search cost is drawn from a log-concave `G` on
//! `[0, c̄]` with density `g(0) > 0` at zero. In the most competitive
//! equilibrium nobody searches past the first firm and all firms post the
//! same offer: revenue `π*` with `π*·(−v′(π*)) = 1/g(0)` under linear
//! prices, fee `t* = 1/g(0)` (capped at `v(0)`) under two-part tariffs.

use alloc::format;

use crate::demand::SurplusMap;
use crate::error::{Error, Result};
use crate::numeric::{closed_grid, find_root, interior_grid};
use crate::welfare::{RegimeWelfare, WelfareModel, WelfareReport};

const LOG_CONCAVITY_GRID: usize = 1000;
const LOG_CONCAVITY_TOL: f64 = 1e-10;
/// Grid used to certify that the solved offer is a best response.
pub const ARGMAX_GRID: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostFamily {
    /// Uniform on `[0, c̄]`; parameters `[c̄]`.
    Uniform,
    /// Exponential with rate `r`, `c̄ = ∞`; parameters `[r]`.
    Exponential,
    /// Normal `(mean, sd)` truncated to `[0, c̄]`; parameters
    /// `[mean, sd]` (`c̄ = ∞`) or `[mean, sd, c̄]`.
    TruncatedNormal,
}

impl CostFamily {
    pub fn name(self) -> &'static str {
        match self {
            CostFamily::Uniform => "uniform",
            CostFamily::Exponential => "exponential",
            CostFamily::TruncatedNormal => "truncated-normal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(CostFamily::Uniform),
            "exponential" => Some(CostFamily::Exponential),
            "truncated-normal" => Some(CostFamily::TruncatedNormal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Uniform { upper: f64 },
    Exponential { rate: f64 },
    TruncatedNormal { mean: f64, sd: f64, upper: f64, base: f64, mass: f64 },
}

/// Search-cost distribution `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchCostDist {
    shape: Shape,
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * core::f64::consts::PI)
}

impl SearchCostDist {
    pub fn new(family: CostFamily, params: &[f64]) -> Result<Self> {
        if params.iter().any(|p| p.is_nan()) {
            return Err(Error::param("cost params", "NaN parameter"));
        }
        let shape = match (family, params) {
            (CostFamily::Uniform, [upper]) => {
                if !(*upper > 0.0 && upper.is_finite()) {
                    return Err(Error::param("cost params", format!("uniform upper {upper} must be positive and finite")));
                }
                Shape::Uniform { upper: *upper }
            }
            (CostFamily::Exponential, [rate]) => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::param("cost params", format!("rate {rate} must be positive and finite")));
                }
                Shape::Exponential { rate: *rate }
            }
            (CostFamily::TruncatedNormal, [mean, sd]) => tnorm(*mean, *sd, f64::INFINITY)?,
            (CostFamily::TruncatedNormal, [mean, sd, upper]) => tnorm(*mean, *sd, *upper)?,
            _ => {
                return Err(Error::param(
                    "cost params",
                    format!("wrong number of parameters ({}) for {}", params.len(), family.name()),
                ))
            }
        };
        let dist = SearchCostDist { shape };
        dist.check_log_concave()?;
        Ok(dist)
    }

    /// Uniform costs with the given density at zero.
    pub fn uniform_with_density(g0: f64) -> Result<Self> {
        Self::new(CostFamily::Uniform, &[1.0 / g0])
    }

    /// The same family rescaled along the cost axis so that `g(0) = g0`.
    pub fn with_density_at_zero(&self, g0: f64) -> Result<Self> {
        if !(g0 > 0.0 && g0.is_finite()) {
            return Err(Error::param("g0", format!("{g0} must be positive and finite")));
        }
        let k = self.density_at_zero() / g0;
        match self.shape {
            Shape::Uniform { upper } => Self::new(CostFamily::Uniform, &[upper * k]),
            Shape::Exponential { .. } => Self::new(CostFamily::Exponential, &[g0]),
            Shape::TruncatedNormal { mean, sd, upper, .. } => {
                Self::new(CostFamily::TruncatedNormal, &[mean * k, sd * k, upper * k])
            }
        }
    }

    pub fn family(&self) -> CostFamily {
        match self.shape {
            Shape::Uniform { .. } => CostFamily::Uniform,
            Shape::Exponential { .. } => CostFamily::Exponential,
            Shape::TruncatedNormal { .. } => CostFamily::TruncatedNormal,
        }
    }

    /// Upper end of the support; infinite for unbounded families.
    pub fn c_bar(&self) -> f64 {
        match self.shape {
            Shape::Uniform { upper } => upper,
            Shape::Exponential { .. } => f64::INFINITY,
            Shape::TruncatedNormal { upper, .. } => upper,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.shape {
            Shape::Uniform { upper } => (x / upper).min(1.0),
            Shape::Exponential { rate } => -libm::expm1(-rate * x),
            Shape::TruncatedNormal { mean, sd, upper, base, mass } => {
                if x >= upper {
                    1.0
                } else {
                    ((normal_cdf((x - mean) / sd) - base) / mass).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// `g(0)`.
    pub fn density_at_zero(&self) -> f64 {
        match self.shape {
            Shape::Uniform { upper } => 1.0 / upper,
            Shape::Exponential { rate } => rate,
            Shape::TruncatedNormal { mean, sd, mass, .. } => normal_pdf(-mean / sd) / (sd * mass),
        }
    }

    fn check_log_concave(&self) -> Result<()> {
        let g0 = self.density_at_zero();
        if !(g0 > 0.0 && g0.is_finite()) {
            return Err(Error::param("cost params", format!("g(0) = {g0} must be positive and finite")));
        }
        let span = match self.shape {
            Shape::Uniform { upper } => upper,
            Shape::Exponential { rate } => 20.0 / rate,
            Shape::TruncatedNormal { mean, sd, upper, .. } => upper.min(mean.max(0.0) + 10.0 * sd),
        };
        let mut prev: Option<(f64, f64)> = None;
        let step = span / LOG_CONCAVITY_GRID as f64;
        for x in interior_grid(0.0, span, LOG_CONCAVITY_GRID) {
            let g = self.cdf(x);
            if g <= 0.0 || g >= 1.0 {
                continue;
            }
            let lg = libm::log(g);
            let lg_next = libm::log(self.cdf(x + step).min(1.0));
            if let Some((p, _)) = prev {
                let second = lg_next - 2.0 * lg + p;
                if second > LOG_CONCAVITY_TOL {
                    return Err(Error::param(
                        "cost params",
                        format!("G is not log-concave near {x} (second difference {second:e})"),
                    ));
                }
            }
            prev = Some((lg, x));
        }
        Ok(())
    }
}

fn tnorm(mean: f64, sd: f64, upper: f64) -> Result<Shape> {
    if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
        return Err(Error::param("cost params", format!("normal (mean {mean}, sd {sd}) is degenerate")));
    }
    if !(upper > 0.0) {
        return Err(Error::param("cost params", format!("truncation point {upper} must be positive")));
    }
    let base = normal_cdf(-mean / sd);
    let top = if upper.is_finite() { normal_cdf((upper - mean) / sd) } else { 1.0 };
    let mass = top - base;
    if !(mass > 0.0) {
        return Err(Error::param("cost params", "truncated normal has no mass on [0, c̄]"));
    }
    Ok(Shape::TruncatedNormal { mean, sd, upper, base, mass })
}

/// Most competitive two-part-tariff equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeeStar {
    pub fee: f64,
    /// True when `1/g(0) > v(0)` and the fee is capped at `v(0)`.
    pub clamped: bool,
    /// Largest gain of `(1 − G[t − t*])·t` over `t*` on a grid of `[0, v(0)]`.
    pub argmax_gap: f64,
}

/// Most competitive linear-price equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueStar {
    pub revenue: f64,
    pub price: f64,
    /// Largest gain of `(1 − G[v(π*) − v(π)])·π` over `π*` on a price grid.
    pub argmax_gap: f64,
}

pub fn t_star_for(g0: f64, v0: f64) -> (f64, bool) {
    let t = 1.0 / g0;
    if t > v0 { (v0, true) } else { (t, false) }
}

pub fn solve_t_star(g: &SearchCostDist, map: &SurplusMap) -> FeeStar {
    let v0 = map.v0();
    let (fee, clamped) = t_star_for(g.density_at_zero(), v0);
    let objective = |t: f64| (1.0 - g.cdf(t - fee)) * t;
    let at_star = objective(fee);
    let argmax_gap = closed_grid(0.0, v0, ARGMAX_GRID)
        .map(|t| objective(t) - at_star)
        .fold(f64::NEG_INFINITY, f64::max);
    FeeStar { fee, clamped, argmax_gap }
}

/// Fixed point of the best-response map `τ ↦ argmax_t (1 − G[t − τ])·t`,
/// found by iterating a refined grid search. Independent of the closed form
/// `1/g(0)`; used to cross-check it.
pub fn t_star_by_iteration(g: &SearchCostDist, map: &SurplusMap) -> f64 {
    let v0 = map.v0();
    let mut tau = 0.5 * v0;
    for _ in 0..200 {
        let next = best_response_fee(g, tau, v0);
        if (next - tau).abs() < 1e-13 * v0 {
            return next;
        }
        tau = next;
    }
    tau
}

fn best_response_fee(g: &SearchCostDist, tau: f64, cap: f64) -> f64 {
    let objective = |t: f64| (1.0 - g.cdf(t - tau)) * t;
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..40 {
        let step = (hi - lo) / 64.0;
        let best = (0..=64)
            .map(|i| lo + step * i as f64)
            .fold((lo, f64::NEG_INFINITY), |acc, t| {
                let v = objective(t);
                if v > acc.1 { (t, v) } else { acc }
            })
            .0;
        lo = (best - step).max(0.0);
        hi = (best + step).min(cap);
    }
    0.5 * (lo + hi)
}

/// Price solving `q(p)²p = (q(p) + q′(p)p)/g0` on `(0, p_m)`, the price-axis
/// form of `π(−v′(π)) = 1/g0`.
fn pi_star_price(g0: f64, map: &SurplusMap) -> Result<f64> {
    let d = map.demand();
    let target = 1.0 / g0;
    find_root(
        |p| {
            let q = d.quantity(p);
            q * q * p - target * d.marginal_revenue(p)
        },
        0.0,
        map.monopoly_price(),
        map.options().root_tol,
    )
}

pub fn pi_star_for(g0: f64, map: &SurplusMap) -> Result<(f64, f64)> {
    let p = pi_star_price(g0, map)?;
    Ok((map.demand().revenue_at(p), p))
}

pub fn solve_pi_star(g: &SearchCostDist, map: &SurplusMap) -> Result<RevenueStar> {
    let (revenue, price) = pi_star_for(g.density_at_zero(), map)?;
    let d = map.demand();
    let v_star = d.surplus_unchecked(price);
    let objective = |p: f64| (1.0 - g.cdf(v_star - d.surplus_unchecked(p))) * d.revenue_at(p);
    let at_star = objective(price);
    let argmax_gap = closed_grid(0.0, map.monopoly_price(), ARGMAX_GRID)
        .map(|p| objective(p) - at_star)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RevenueStar { revenue, price, argmax_gap })
}

/// Welfare of the most competitive equilibria. Everybody buys at the first
/// firm, so industry profit is the per-consumer offer itself.
pub fn welfare_cont(g: &SearchCostDist, map: &SurplusMap) -> Result<WelfareReport> {
    let fee = solve_t_star(g, map);
    let rev = solve_pi_star(g, map)?;
    let cs_linear = map.demand().surplus_unchecked(rev.price);
    Ok(WelfareReport {
        model: WelfareModel::ContinuousCost { g0: g.density_at_zero() },
        linear: RegimeWelfare {
            total_surplus: rev.revenue + cs_linear,
            industry_profit: rev.revenue,
            consumer_surplus: cs_linear,
        },
        two_part: RegimeWelfare {
            total_surplus: map.v0(),
            industry_profit: fee.fee,
            consumer_surplus: map.v0() - fee.fee,
        },
        profit_identity_residual: 0.0,
    })
}

/// Finite-difference vs closed-form slopes of consumer surplus in `g(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeCheck {
    pub linear_fd: f64,
    pub linear_closed: f64,
    pub two_part_fd: f64,
    pub two_part_closed: f64,
    pub linear_rel_residual: f64,
    pub two_part_rel_residual: f64,
    /// `d CS_linear / d g0 ≤ d CS_two_part / d g0` (closed forms).
    pub linear_rises_slower: bool,
}

/// Central differences with step `h·g0`. Requires `g0(1−h) > 1/v(0)` so
/// that neither regime is capped.
pub fn cs_slope_check(g: &SearchCostDist, map: &SurplusMap, h: f64) -> Result<SlopeCheck> {
    let g0 = g.density_at_zero();
    let v0 = map.v0();
    if !(h > 0.0 && h < 1.0) || g0 * (1.0 - h) <= 1.0 / v0 {
        return Err(Error::domain("g0", g0, 1.0 / v0, f64::INFINITY));
    }
    let d = map.demand();
    let cs_linear = |g: f64| -> Result<f64> { Ok(d.surplus_unchecked(pi_star_price(g, map)?)) };
    let cs_two_part = |g: f64| v0 - t_star_for(g, v0).0;
    let step = h * g0;
    let linear_fd = (cs_linear(g0 + step)? - cs_linear(g0 - step)?) / (2.0 * step);
    let two_part_fd = (cs_two_part(g0 + step) - cs_two_part(g0 - step)) / (2.0 * step);

    let (pi, _) = pi_star_for(g0, map)?;
    let v1 = map.v_prime(pi)?;
    let v2 = map.v_second(pi)?;
    let dpi = 1.0 / (g0 * g0 * (v1 + v2 * pi));
    let linear_closed = v1 * dpi;
    let two_part_closed = 1.0 / (g0 * g0);
    Ok(SlopeCheck {
        linear_fd,
        linear_closed,
        two_part_fd,
        two_part_closed,
        linear_rel_residual: ((linear_fd - linear_closed) / linear_closed).abs(),
        two_part_rel_residual: ((two_part_fd - two_part_closed) / two_part_closed).abs(),
        linear_rises_slower: linear_closed <= two_part_closed,
    })
}
