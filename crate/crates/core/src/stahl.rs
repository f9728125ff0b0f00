//! Sequential search with shoppers and nonshoppers.
//!
//! A share `λ` of consumers observes every firm's offer; the rest search
//! sequentially at cost `s` per firm after a free first visit and stop at
//! the first offer no worse than their reservation value. Under two-part
//! tariffs the unit price is zero and firms mix over lump-sum fees; under
//! linear prices firms mix over per-consumer revenue.

use alloc::format;

use crate::demand::SurplusMap;
use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, find_root};
use crate::offer::{Clientele, OfferDistribution, OfferLaw, SupportCdf};

/// Firm count, shopper share and per-search cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    n: u32,
    lambda: f64,
    s: f64,
}

impl MarketParams {
    pub fn new(n: u32, lambda: f64, s: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", format!("{n} firms; need at least 2")));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::param("lambda", format!("{lambda} is not in (0, 1)")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param("s", format!("{s} is not a positive finite search cost")));
        }
        Ok(MarketParams { n, lambda, s })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn with_search_cost(&self, s: f64) -> Result<Self> {
        MarketParams::new(self.n, self.lambda, s)
    }

    /// `lower / upper = (1−λ)/(1+(n−1)λ)` for either regime.
    pub fn support_ratio(&self) -> f64 {
        (1.0 - self.lambda) / (1.0 + (self.n - 1) as f64 * self.lambda)
    }

    pub fn clientele(&self) -> Clientele {
        Clientele::Shoppers(*self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Linear,
    TwoPart,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Linear => "linear",
            Regime::TwoPart => "two-part",
        }
    }
}

/// Identifies the surplus map an equilibrium was solved against, so that
/// results from different demand curves are not mixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SurplusKey {
    pub v0: f64,
    pub pi_m: f64,
    pub choke: f64,
}

impl SurplusKey {
    pub(crate) fn of(map: &SurplusMap) -> Self {
        SurplusKey {
            v0: map.v0(),
            pi_m: map.monopoly_revenue(),
            choke: map.demand().choke_price(),
        }
    }
}

/// A solved symmetric reservation-price equilibrium.
///
/// For [`Regime::TwoPart`] offers are lump-sum fees and the unit price is
/// zero; for [`Regime::Linear`] offers are per-consumer revenues.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialEquilibrium {
    regime: Regime,
    params: MarketParams,
    dist: OfferDistribution,
    reservation: f64,
    s_bar: f64,
    boundary: bool,
    pub(crate) key: SurplusKey,
}

impl SequentialEquilibrium {
    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    pub fn distribution(&self) -> &OfferDistribution {
        &self.dist
    }

    pub fn lower(&self) -> f64 {
        self.dist.lower()
    }

    pub fn upper(&self) -> f64 {
        self.dist.upper()
    }

    /// `t_R` or `π_R`.
    pub fn reservation(&self) -> f64 {
        self.reservation
    }

    /// Search-cost cutoff above which the upper support is pinned at the cap.
    pub fn s_bar(&self) -> f64 {
        self.s_bar
    }

    /// True when `s ≥ s̄`.
    pub fn is_boundary(&self) -> bool {
        self.boundary
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.dist.cdf(x)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.dist.quantile(u)
    }

    /// Unit price of the equilibrium tariff: zero under two-part tariffs,
    /// `None` under linear prices where the price is the random offer.
    pub fn unit_price(&self) -> Option<f64> {
        match self.regime {
            Regime::TwoPart => Some(0.0),
            Regime::Linear => None,
        }
    }

    pub fn per_firm_profit(&self) -> f64 {
        (1.0 - self.params.lambda) * self.upper() / self.params.n as f64
    }

    pub fn industry_profit(&self) -> f64 {
        (1.0 - self.params.lambda) * self.upper()
    }
}

fn market_dist(params: &MarketParams, upper: f64) -> Result<OfferDistribution> {
    OfferDistribution::new(params.clientele(), upper)
}

/// Equilibrium fee CDF `H(t)` for upper support `t_high`.
pub fn fee_cdf(t: f64, t_high: f64, params: &MarketParams) -> Result<f64> {
    market_dist(params, t_high)?.cdf_checked(t)
}

/// `t_high / (1 + (nλ/(1−λ))(1−u)^{n−1})`, the inverse of [`fee_cdf`].
pub fn fee_quantile(u: f64, t_high: f64, params: &MarketParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain("probability", u, 0.0, 1.0));
    }
    Ok(market_dist(params, t_high)?.quantile(u))
}

/// Equilibrium revenue CDF `F(π)`; same functional form as [`fee_cdf`].
pub fn revenue_cdf(pi: f64, pi_high: f64, params: &MarketParams) -> Result<f64> {
    fee_cdf(pi, pi_high, params)
}

/// Expected saving from one more search when the best fee in hand is `t_r`
/// and fees follow `H(·; t_r)`: `∫_{t̲}^{t_r} H(t) dt`.
pub fn fee_search_benefit(t_r: f64, params: &MarketParams, map: &SurplusMap) -> Result<f64> {
    let dist = market_dist(params, t_r)?;
    let tol = map.options().quad_tol;
    Ok(adaptive_simpson(|t| dist.cdf(t), dist.lower(), dist.upper(), tol))
}

/// `∫_{π̲}^{π_r} (−v′(π)) F(π) dπ`, evaluated along the price axis as
/// `∫ q(p) F(π(p)) dp` (`−v′ dπ = q dp`), which keeps the integrand bounded
/// when `π_r` reaches `π_m`.
pub fn revenue_search_benefit(pi_r: f64, params: &MarketParams, map: &SurplusMap) -> Result<f64> {
    let dist = market_dist(params, pi_r)?;
    Ok(revenue_benefit_with(map, &dist, |y| y))
}

/// `∫_{p(π̲)}^{p(π̄)} q(p)·g(F(π(p))) dp` for an offer distribution over
/// revenue.
pub(crate) fn revenue_benefit_with(
    map: &SurplusMap,
    dist: &OfferDistribution,
    g: impl Fn(f64) -> f64,
) -> f64 {
    let d = map.demand();
    let p_lo = map.price_for_revenue_clamped(dist.lower());
    let p_hi = map.price_for_revenue_clamped(dist.upper());
    let top = dist.upper() - d.revenue_at(p_hi);
    adaptive_simpson(
        |p| d.quantity(p) * g(dist.cdf_with_gap(d.revenue_at(p), top + d.revenue_gap(p_hi, p))),
        p_lo,
        p_hi,
        map.options().quad_tol,
    )
}

/// Solves `benefit(x) = s` for the reservation value on `(0, cap]`.
/// Returns `(reservation, s̄, boundary)`.
pub(crate) fn solve_reservation(
    benefit: impl Fn(f64) -> Result<f64>,
    cap: f64,
    s: f64,
    root_tol: f64,
) -> Result<(f64, f64, bool)> {
    let s_bar = benefit(cap)?;
    if s >= s_bar {
        return Ok((cap, s_bar, true));
    }
    let eps = 1e-12 * cap;
    let at_eps = benefit(eps)?;
    if at_eps > s {
        return Err(Error::SolveFailure(format!(
            "search cost {s} is below the resolvable benefit {at_eps} at the bracket floor"
        )));
    }
    let mut failure = None;
    let root = find_root(
        |x| match benefit(x) {
            Ok(b) => b - s,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        eps,
        cap,
        root_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((root?, s_bar, false))
}

/// Two-part-tariff equilibrium: unit price 0, fees distributed by `H`.
pub fn solve_two_part(params: &MarketParams, map: &SurplusMap) -> Result<SequentialEquilibrium> {
    let cap = map.v0();
    let (reservation, s_bar, boundary) = solve_reservation(
        |t| fee_search_benefit(t, params, map),
        cap,
        params.s,
        map.options().root_tol,
    )?;
    let upper = reservation.min(cap);
    Ok(SequentialEquilibrium {
        regime: Regime::TwoPart,
        params: *params,
        dist: market_dist(params, upper)?,
        reservation,
        s_bar,
        boundary,
        key: SurplusKey::of(map),
    })
}

/// Linear-price equilibrium: revenue distributed by `F`, capped at `π_m`.
pub fn solve_linear(params: &MarketParams, map: &SurplusMap) -> Result<SequentialEquilibrium> {
    let cap = map.monopoly_revenue();
    let (reservation, s_bar, boundary) = solve_reservation(
        |pi| revenue_search_benefit(pi, params, map),
        cap,
        params.s,
        map.options().root_tol,
    )?;
    let upper = reservation.min(cap);
    Ok(SequentialEquilibrium {
        regime: Regime::Linear,
        params: *params,
        dist: market_dist(params, upper)?,
        reservation,
        s_bar,
        boundary,
        key: SurplusKey::of(map),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{DemandCurve, DemandFamily};
    use approx::assert_abs_diff_eq;

    fn half_duopoly(s: f64) -> MarketParams {
        MarketParams::new(2, 0.5, s).unwrap()
    }

    fn linear_map() -> SurplusMap {
        SurplusMap::new(DemandCurve::new(DemandFamily::Linear, &[1.0, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(MarketParams::new(1, 0.5, 0.1).is_err());
        assert!(MarketParams::new(2, 1.0, 0.1).is_err());
        assert!(MarketParams::new(2, 0.0, 0.1).is_err());
        assert!(MarketParams::new(2, 0.5, 0.0).is_err());
        assert!(MarketParams::new(2, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn fee_cdf_examples() {
        let m = half_duopoly(0.1);
        assert_eq!(fee_cdf(0.5, 0.5, &m).unwrap(), 1.0);
        assert_eq!(fee_cdf(1.0 / 6.0, 0.5, &m).unwrap(), 0.0);
        assert_abs_diff_eq!(fee_cdf(0.25, 0.5, &m).unwrap(), 0.5, epsilon = 1e-15);
        assert!(fee_cdf(0.1, 0.5, &m).is_err());
        assert!(fee_cdf(0.6, 0.5, &m).is_err());
    }

    #[test]
    fn fee_quantile_examples() {
        let m = half_duopoly(0.1);
        assert_eq!(fee_quantile(1.0, 0.5, &m).unwrap(), 0.5);
        assert_abs_diff_eq!(fee_quantile(0.0, 0.5, &m).unwrap(), 1.0 / 6.0, epsilon = 1e-16);
        assert_abs_diff_eq!(fee_quantile(0.5, 0.5, &m).unwrap(), 0.25, epsilon = 1e-16);
        assert!(fee_quantile(1.5, 0.5, &m).is_err());
    }

    #[test]
    fn revenue_cdf_examples() {
        let m = half_duopoly(0.1);
        assert_eq!(revenue_cdf(0.25, 0.25, &m).unwrap(), 1.0);
        assert_eq!(revenue_cdf(0.25 / 3.0, 0.25, &m).unwrap(), 0.0);
        assert_abs_diff_eq!(revenue_cdf(0.125, 0.25, &m).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn two_part_boundary_regime() {
        let eq = solve_two_part(&half_duopoly(0.3), &linear_map()).unwrap();
        assert!(eq.is_boundary());
        assert_eq!(eq.upper(), 0.5);
        assert_eq!(eq.reservation(), 0.5);
        assert_abs_diff_eq!(eq.lower(), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eq.per_firm_profit(), 0.125, epsilon = 1e-15);
        assert_eq!(eq.unit_price(), Some(0.0));
    }

    #[test]
    fn linear_boundary_regime() {
        let eq = solve_linear(&half_duopoly(0.5), &linear_map()).unwrap();
        assert!(eq.is_boundary());
        assert_abs_diff_eq!(eq.upper(), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(eq.lower(), 0.25 / 3.0, epsilon = 1e-14);
        assert_eq!(eq.unit_price(), None);
    }

    #[test]
    fn tiny_search_cost_is_a_solve_failure_not_a_panic() {
        let r = solve_two_part(&half_duopoly(1e-300), &linear_map());
        assert!(matches!(r, Err(Error::SolveFailure(_))));
    }
}
