//! Exact equilibrium welfare and the regime comparisons.
//!
//! All expectations are written in CDF form: `E[min of k] = x̲ + ∫(1−F)^k`
//! and `E[v(X)] = v(x̄) + ∫ q(p)·G(π(p)) dp` (integration by parts with
//! `−v′ dπ = q dp`). No density is ever evaluated, so the integrals stay
//! finite where the density blows up at the top of the support.

use alloc::format;

use crate::demand::SurplusMap;
use crate::error::{Error, Result};
use crate::noisy::{NoisyEquilibrium, NoisyParams};
use crate::numeric::adaptive_simpson;
use crate::offer::{OfferDistribution, SupportCdf};
use crate::stahl::{MarketParams, Regime, SequentialEquilibrium, SurplusKey};

/// Which market a report describes, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum WelfareModel {
    Sequential(MarketParams),
    ContinuousCost { g0: f64 },
    Noisy(NoisyParams),
}

impl WelfareModel {
    pub fn name(&self) -> &'static str {
        match self {
            WelfareModel::Sequential(_) => "sequential",
            WelfareModel::ContinuousCost { .. } => "continuous-cost",
            WelfareModel::Noisy(_) => "noisy",
        }
    }
}

/// Surplus split for one pricing regime, per unit mass of consumers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeWelfare {
    pub total_surplus: f64,
    pub industry_profit: f64,
    pub consumer_surplus: f64,
}

impl RegimeWelfare {
    fn from_profit_and_cs(industry_profit: f64, consumer_surplus: f64) -> Self {
        RegimeWelfare {
            total_surplus: industry_profit + consumer_surplus,
            industry_profit,
            consumer_surplus,
        }
    }
}

/// Welfare under both regimes. Deltas are two-part minus linear.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareReport {
    pub model: WelfareModel,
    pub linear: RegimeWelfare,
    pub two_part: RegimeWelfare,
    /// Largest gap between order-statistics profit and the closed-form
    /// equal-profit value, over both regimes. Zero for models whose profit
    /// is not computed from a distribution.
    pub profit_identity_residual: f64,
}

/// Sign pattern of the comparison: more profit, less consumer surplus and
/// no less total surplus with two-part tariffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Orderings {
    pub profit_higher: bool,
    pub cs_lower: bool,
    pub ts_not_lower: bool,
    pub ts_strictly_higher: bool,
}

impl Orderings {
    pub fn all_hold(&self) -> bool {
        self.profit_higher && self.cs_lower && self.ts_not_lower
    }
}

impl WelfareReport {
    pub fn delta_total_surplus(&self) -> f64 {
        self.two_part.total_surplus - self.linear.total_surplus
    }

    pub fn delta_industry_profit(&self) -> f64 {
        self.two_part.industry_profit - self.linear.industry_profit
    }

    pub fn delta_consumer_surplus(&self) -> f64 {
        self.two_part.consumer_surplus - self.linear.consumer_surplus
    }

    pub fn orderings(&self) -> Orderings {
        Orderings {
            profit_higher: self.delta_industry_profit() > 0.0,
            cs_lower: self.delta_consumer_surplus() < 0.0,
            ts_not_lower: self.delta_total_surplus() >= 0.0,
            ts_strictly_higher: self.delta_total_surplus() > 0.0,
        }
    }
}

/// `E[min of n_draws]` for a CDF on `[lower, upper]`.
pub fn expected_min<C: SupportCdf>(cdf: &C, n_draws: u32, tol: f64) -> Result<f64> {
    let (a, b) = (cdf.lower(), cdf.upper());
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::domain("support lower end", a, f64::NEG_INFINITY, b));
    }
    if n_draws == 0 {
        return Err(Error::param("n_draws", "must be at least 1"));
    }
    if a == b {
        return Ok(a);
    }
    let k = n_draws as f64;
    Ok(a + adaptive_simpson(|x| libm::pow(1.0 - cdf.cdf(x), k), a, b, tol))
}

/// `E[v(min of k)]` for a distribution over per-consumer revenue.
pub fn expected_surplus_of_min(map: &SurplusMap, dist: &OfferDistribution, k: u32) -> Result<f64> {
    let v_top = map.v_of_pi(dist.upper().min(map.monopoly_revenue()))?;
    let d = map.demand();
    let p_lo = map.price_for_revenue_clamped(dist.lower());
    let p_hi = map.price_for_revenue_clamped(dist.upper());
    let kf = k as f64;
    let top = dist.upper() - d.revenue_at(p_hi);
    let tail = adaptive_simpson(
        |p| {
            let f = dist.cdf_with_gap(d.revenue_at(p), top + d.revenue_gap(p_hi, p));
            d.quantity(p) * (1.0 - libm::pow(1.0 - f, kf))
        },
        p_lo,
        p_hi,
        map.options().quad_tol,
    );
    Ok(v_top + tail)
}

fn check_pair(
    fee_regime: Regime,
    rev_regime: Regime,
    keys: [SurplusKey; 2],
    map: &SurplusMap,
) -> Result<()> {
    if fee_regime != Regime::TwoPart || rev_regime != Regime::Linear {
        return Err(Error::ParameterMismatch(format!(
            "expected (two-part, linear) equilibria, got ({}, {})",
            fee_regime.name(),
            rev_regime.name()
        )));
    }
    let key = SurplusKey::of(map);
    if keys.iter().any(|k| *k != key) {
        return Err(Error::ParameterMismatch(
            "equilibria were solved against a different demand curve".into(),
        ));
    }
    Ok(())
}

/// Welfare in the shoppers/nonshoppers market. Shoppers pay the minimum of
/// `n` draws; nonshoppers buy at the first firm, i.e. one draw.
pub fn welfare_sequential(
    fee: &SequentialEquilibrium,
    rev: &SequentialEquilibrium,
    params: &MarketParams,
    map: &SurplusMap,
) -> Result<WelfareReport> {
    check_pair(fee.regime(), rev.regime(), [fee.key, rev.key], map)?;
    if fee.params() != params || rev.params() != params {
        return Err(Error::ParameterMismatch(
            "equilibria were solved under different market parameters".into(),
        ));
    }
    let tol = map.options().quad_tol;
    let lam = params.lambda();
    let n = params.n();

    let fee_dist = fee.distribution();
    let fee_profit =
        lam * expected_min(fee_dist, n, tol)? + (1.0 - lam) * expected_min(fee_dist, 1, tol)?;
    let two_part = RegimeWelfare {
        total_surplus: map.v0(),
        industry_profit: fee_profit,
        consumer_surplus: map.v0() - fee_profit,
    };

    let rev_dist = rev.distribution();
    let rev_profit =
        lam * expected_min(rev_dist, n, tol)? + (1.0 - lam) * expected_min(rev_dist, 1, tol)?;
    let rev_cs = lam * expected_surplus_of_min(map, rev_dist, n)?
        + (1.0 - lam) * expected_surplus_of_min(map, rev_dist, 1)?;
    let linear = RegimeWelfare::from_profit_and_cs(rev_profit, rev_cs);

    let residual = (fee_profit - fee.industry_profit())
        .abs()
        .max((rev_profit - rev.industry_profit()).abs());
    Ok(WelfareReport {
        model: WelfareModel::Sequential(*params),
        linear,
        two_part,
        profit_identity_residual: residual,
    })
}

/// Welfare under noisy search: a consumer with `k` offers pays the minimum
/// of `k` draws, so every expectation is a `μ`-mixture of order statistics.
pub fn welfare_noisy(
    fee: &NoisyEquilibrium,
    rev: &NoisyEquilibrium,
    params: &NoisyParams,
    map: &SurplusMap,
) -> Result<WelfareReport> {
    check_pair(fee.regime(), rev.regime(), [fee.key, rev.key], map)?;
    if fee.params() != params || rev.params() != params {
        return Err(Error::ParameterMismatch(
            "equilibria were solved under different response distributions".into(),
        ));
    }
    let tol = map.options().quad_tol;
    let mut fee_profit = 0.0;
    let mut rev_profit = 0.0;
    let mut rev_cs = 0.0;
    for (i, &mu) in params.mu().iter().enumerate() {
        if mu == 0.0 {
            continue;
        }
        let k = (i + 1) as u32;
        fee_profit += mu * expected_min(fee.distribution(), k, tol)?;
        rev_profit += mu * expected_min(rev.distribution(), k, tol)?;
        rev_cs += mu * expected_surplus_of_min(map, rev.distribution(), k)?;
    }
    let two_part = RegimeWelfare {
        total_surplus: map.v0(),
        industry_profit: fee_profit,
        consumer_surplus: map.v0() - fee_profit,
    };
    let residual = (fee_profit - fee.industry_profit())
        .abs()
        .max((rev_profit - rev.industry_profit()).abs());
    Ok(WelfareReport {
        model: WelfareModel::Noisy(params.clone()),
        linear: RegimeWelfare::from_profit_and_cs(rev_profit, rev_cs),
        two_part,
        profit_identity_residual: residual,
    })
}

/// Signed residuals of the consumer-surplus bounds used in the welfare
/// comparison. Non-negative means the inequality holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsBoundResiduals {
    /// `v(π̄) − (v(0) − t̄)`.
    pub terminal: f64,
    /// Exact linear-price CS minus
    /// `(n−1)/n·(1−λ)·v(π̄) + (1 − (n−1)/n·(1−λ))·v(π̲)`.
    pub linear_cs_bound: f64,
    /// `π̄/π̲ − t̄/t̲`; zero up to rounding.
    pub support_ratio: f64,
    /// `λ v(0) + (1−λ)(v(0) − t̄)` minus exact two-part CS. Reported for its
    /// sign only; it is not an equilibrium quantity.
    pub two_part_cs_expression: f64,
}

pub fn cs_bound_checks(
    fee: &SequentialEquilibrium,
    rev: &SequentialEquilibrium,
    params: &MarketParams,
    map: &SurplusMap,
) -> Result<CsBoundResiduals> {
    let report = welfare_sequential(fee, rev, params, map)?;
    let lam = params.lambda();
    let n = params.n() as f64;
    let w = (n - 1.0) / n * (1.0 - lam);
    let v0 = map.v0();
    let v_hi = map.v_of_pi(rev.upper().min(map.monopoly_revenue()))?;
    let v_lo = map.v_of_pi(rev.lower())?;
    Ok(CsBoundResiduals {
        terminal: v_hi - (v0 - fee.upper()),
        linear_cs_bound: report.linear.consumer_surplus - (w * v_hi + (1.0 - w) * v_lo),
        support_ratio: rev.upper() / rev.lower() - fee.upper() / fee.lower(),
        two_part_cs_expression: lam * v0 + (1.0 - lam) * (v0 - fee.upper())
            - report.two_part.consumer_surplus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{DemandCurve, DemandFamily};
    use crate::stahl::{solve_linear, solve_two_part};
    use approx::assert_abs_diff_eq;

    fn map() -> SurplusMap {
        SurplusMap::new(DemandCurve::new(DemandFamily::Linear, &[1.0, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn expected_min_examples() {
        let m = MarketParams::new(2, 0.5, 0.3).unwrap();
        let dist = OfferDistribution::new(m.clientele(), 0.5).unwrap();
        // 0.5 − (0.5 − 0.25 ln 3)
        assert_abs_diff_eq!(
            expected_min(&dist, 1, 1e-10).unwrap(),
            0.274_653_072_167_027_4,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            expected_min(&dist, 2, 1e-10).unwrap(),
            0.225_346_927_832_972_6,
            epsilon = 1e-10
        );
        assert!(expected_min(&dist, 0, 1e-10).is_err());
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let m = map();
        let a = MarketParams::new(2, 0.5, 0.1).unwrap();
        let b = MarketParams::new(3, 0.5, 0.1).unwrap();
        let fee = solve_two_part(&a, &m).unwrap();
        let rev = solve_linear(&b, &m).unwrap();
        assert!(matches!(
            welfare_sequential(&fee, &rev, &a, &m),
            Err(Error::ParameterMismatch(_))
        ));
        let rev_a = solve_linear(&a, &m).unwrap();
        assert!(matches!(
            welfare_sequential(&rev_a, &fee, &a, &m),
            Err(Error::ParameterMismatch(_))
        ));
        let other =
            SurplusMap::new(DemandCurve::new(DemandFamily::Quadratic, &[1.0, 1.0]).unwrap()).unwrap();
        assert!(matches!(
            welfare_sequential(&fee, &rev_a, &a, &other),
            Err(Error::ParameterMismatch(_))
        ));
    }
}
