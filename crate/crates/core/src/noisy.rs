//! Noisy search: each round a consumer solicits offers from `m` firms and
//! hears back from `k` of them with probability `μ(k)`, then either buys at
//! the best offer or pays `s` for another round. There are infinitely many
//! firms, so the search rule is stationary.
//!
//! The reservation equations are implemented term for term as
//! `∫ (−v′) Σ_k μ(k)(1−F)^{k−1} dπ = s` (linear prices) and
//! `Σ_k μ(k) ∫ (1−H)^{k−1} dt = s` (two-part tariffs). Note that the `k = 1`
//! term integrates a constant, unlike the shoppers model where the benefit
//! integrates the CDF itself.

use alloc::format;
use alloc::vec::Vec;

use crate::demand::SurplusMap;
use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use crate::offer::{Clientele, OfferDistribution, OfferLaw, SupportCdf};
use crate::stahl::{revenue_benefit_with, solve_reservation, Regime, SurplusKey};

const MU_SUM_TOL: f64 = 1e-12;

/// Response-count distribution `μ(1..m)` and per-round search cost.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyParams {
    mu: Vec<f64>,
    s: f64,
}

impl NoisyParams {
    pub fn new(mu: Vec<f64>, s: f64) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::param("mu", format!("m = {} responses; need m ≥ 2", mu.len())));
        }
        if let Some((k, bad)) = mu.iter().enumerate().find(|(_, &p)| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::param("mu", format!("μ({}) = {bad} is not a probability", k + 1)));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > MU_SUM_TOL {
            return Err(Error::param("mu", format!("probabilities sum to {total}, not 1")));
        }
        if !(mu[0] > 0.0 && mu[0] < 1.0) {
            return Err(Error::param(
                "mu",
                format!("μ(1) = {} must lie in (0, 1); μ(1) = 1 is the Diamond outcome", mu[0]),
            ));
        }
        if !(mu[1] > 0.0 && mu[1] < 1.0) {
            return Err(Error::param("mu", format!("μ(2) = {} must lie in (0, 1)", mu[1])));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param("s", format!("{s} is not a positive finite search cost")));
        }
        Ok(NoisyParams { mu, s })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn with_search_cost(&self, s: f64) -> Result<Self> {
        NoisyParams::new(self.mu.clone(), s)
    }

    /// `E[k] = Σ k μ(k)`.
    pub fn mean_responses(&self) -> f64 {
        self.mu.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }

    pub fn clientele(&self) -> Clientele {
        Clientele::Noisy(self.clone())
    }

    /// `Σ_k μ(k)(1−y)^{k−1}`, the integrand weight of both reservation
    /// equations.
    pub fn response_weight(&self, y: f64) -> f64 {
        let keep = 1.0 - y;
        self.mu.iter().rev().fold(0.0, |acc, p| acc * keep + p)
    }
}

/// A solved noisy-search equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyEquilibrium {
    regime: Regime,
    params: NoisyParams,
    dist: OfferDistribution,
    reservation: f64,
    s_bar: f64,
    boundary: bool,
    pub(crate) key: SurplusKey,
}

impl NoisyEquilibrium {
    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn params(&self) -> &NoisyParams {
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

    pub fn reservation(&self) -> f64 {
        self.reservation
    }

    pub fn s_bar(&self) -> f64 {
        self.s_bar
    }

    pub fn is_boundary(&self) -> bool {
        self.boundary
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.dist.cdf(x)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.dist.quantile(u)
    }

    pub fn unit_price(&self) -> Option<f64> {
        match self.regime {
            Regime::TwoPart => Some(0.0),
            Regime::Linear => None,
        }
    }

    /// Industry profit per unit mass of consumers, `μ(1)·upper`.
    pub fn industry_profit(&self) -> f64 {
        self.params.mu[0] * self.upper()
    }
}

/// Equilibrium CDF at `x` for upper support `upper`, found by root finding on
/// `Σ k μ(k)(1−y)^{k−1} x = μ(1)·upper`.
pub fn noisy_cdf(x: f64, upper: f64, params: &NoisyParams) -> Result<f64> {
    OfferDistribution::new(params.clientele(), upper)?.cdf_checked(x)
}

/// `Σ_k μ(k) ∫_{t̲}^{t_r} (1−H)^{k−1} dt`.
pub fn noisy_fee_benefit(t_r: f64, params: &NoisyParams, map: &SurplusMap) -> Result<f64> {
    let dist = OfferDistribution::new(params.clientele(), t_r)?;
    Ok(adaptive_simpson(
        |t| params.response_weight(dist.cdf(t)),
        dist.lower(),
        dist.upper(),
        map.options().quad_tol,
    ))
}

/// `∫_{π̲}^{π_r} (−v′(π)) Σ_k μ(k)(1−F)^{k−1} dπ`, along the price axis.
pub fn noisy_revenue_benefit(pi_r: f64, params: &NoisyParams, map: &SurplusMap) -> Result<f64> {
    let dist = OfferDistribution::new(params.clientele(), pi_r)?;
    Ok(revenue_benefit_with(map, &dist, |y| params.response_weight(y)))
}

pub fn solve_noisy_linear(params: &NoisyParams, map: &SurplusMap) -> Result<NoisyEquilibrium> {
    let cap = map.monopoly_revenue();
    let (reservation, s_bar, boundary) = solve_reservation(
        |pi| noisy_revenue_benefit(pi, params, map),
        cap,
        params.s,
        map.options().root_tol,
    )?;
    build(Regime::Linear, params, map, reservation, s_bar, boundary)
}

pub fn solve_noisy_two_part(params: &NoisyParams, map: &SurplusMap) -> Result<NoisyEquilibrium> {
    let cap = map.v0();
    let (reservation, s_bar, boundary) = solve_reservation(
        |t| noisy_fee_benefit(t, params, map),
        cap,
        params.s,
        map.options().root_tol,
    )?;
    build(Regime::TwoPart, params, map, reservation, s_bar, boundary)
}

fn build(
    regime: Regime,
    params: &NoisyParams,
    map: &SurplusMap,
    reservation: f64,
    s_bar: f64,
    boundary: bool,
) -> Result<NoisyEquilibrium> {
    Ok(NoisyEquilibrium {
        regime,
        params: params.clone(),
        dist: OfferDistribution::new(params.clientele(), reservation)?,
        reservation,
        s_bar,
        boundary,
        key: SurplusKey::of(map),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn even() -> NoisyParams {
        NoisyParams::new(vec![0.5, 0.5], 0.1).unwrap()
    }

    #[test]
    fn validation() {
        assert!(NoisyParams::new(vec![1.0], 0.1).is_err());
        assert!(NoisyParams::new(vec![1.0, 0.0], 0.1).is_err());
        assert!(NoisyParams::new(vec![0.0, 1.0], 0.1).is_err());
        assert!(NoisyParams::new(vec![0.5, 0.48], 0.1).is_err());
        assert!(NoisyParams::new(vec![0.5, -0.1, 0.6], 0.1).is_err());
        assert!(NoisyParams::new(vec![0.5, 0.5], 0.0).is_err());
        assert!(NoisyParams::new(vec![0.2, 0.3, 0.5], 0.1).is_ok());
    }

    #[test]
    fn cdf_examples() {
        let p = even();
        assert_eq!(noisy_cdf(0.25, 0.25, &p).unwrap(), 1.0);
        assert_eq!(noisy_cdf(0.25 / 3.0, 0.25, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(noisy_cdf(0.125, 0.25, &p).unwrap(), 0.5, epsilon = 1e-12);
        assert!(noisy_cdf(0.3, 0.25, &p).is_err());
    }

    #[test]
    fn mean_responses_and_weights() {
        let p = NoisyParams::new(vec![0.2, 0.3, 0.5], 0.1).unwrap();
        assert_abs_diff_eq!(p.mean_responses(), 2.3, epsilon = 1e-15);
        assert_abs_diff_eq!(p.response_weight(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.response_weight(1.0), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.response_weight(0.5), 0.2 + 0.15 + 0.125, epsilon = 1e-15);
    }
}
