//! Seeded Monte Carlo replay of a solved market.
//!
//! Firms draw offers from the equilibrium distribution through its quantile
//! function and consumers follow the reservation rule. Each consumer faces a
//! freshly drawn market, so a replication of `c` consumers is `c`
//! independent market realizations. Replication `i` uses its own ChaCha8
//! stream seeded from `splitmix64(master_seed ^ i)`, and replications are
//! aggregated in index order with pairwise sums, so results depend only on
//! the configuration and not on how replications are scheduled.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::demand::SurplusMap;
use crate::error::{Error, Result};
use crate::noisy::NoisyEquilibrium;
use crate::numeric::pairwise_sum;
use crate::offer::{OfferLaw, SupportCdf};
use crate::stahl::{Regime, SequentialEquilibrium, SurplusKey};

/// Below this many consumer-draws the standard errors are too noisy for
/// the 3-SE comparisons to mean much.
pub const MIN_MEANINGFUL_DRAWS: u64 = 10_000;
/// Rounds after which a noisy-search consumer gives up.
const MAX_ROUNDS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub master_seed: u64,
    pub replications: u32,
    pub consumers_per_replication: u32,
    /// Keep each consumer's first drawn offer for distribution tests.
    pub keep_offers: bool,
}

impl SimConfig {
    pub fn new(master_seed: u64, replications: u32, consumers_per_replication: u32) -> Result<Self> {
        if replications < 2 {
            return Err(Error::Config(format!(
                "replications = {replications}; need at least 2 for standard errors"
            )));
        }
        if consumers_per_replication == 0 {
            return Err(Error::Config("consumers_per_replication must be positive".into()));
        }
        Ok(SimConfig {
            master_seed,
            replications,
            consumers_per_replication,
            keep_offers: false,
        })
    }

    pub fn keeping_offers(mut self) -> Self {
        self.keep_offers = true;
        self
    }

    pub fn total_draws(&self) -> u64 {
        self.replications as u64 * self.consumers_per_replication as u64
    }

    /// A warning when there are too few draws for meaningful intervals.
    pub fn warning(&self) -> Option<String> {
        (self.total_draws() < MIN_MEANINGFUL_DRAWS).then(|| {
            format!(
                "only {} consumer-draws; standard errors will be unreliable below {}",
                self.total_draws(),
                MIN_MEANINGFUL_DRAWS
            )
        })
    }
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replication_rng(master_seed: u64, index: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ index as u64))
}

/// Raw sums from one replication.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicationStats {
    pub index: u32,
    pub consumers: u64,
    pub profit: f64,
    pub consumer_surplus: f64,
    pub shoppers: u64,
    pub shopper_paid: f64,
    pub nonshoppers: u64,
    pub nonshopper_buyers: u64,
    pub nonshopper_paid: f64,
    pub searches: u64,
    /// Searches beyond the first (sequential) or rounds beyond the first
    /// (noisy).
    pub second_round_searches: u64,
    pub purchases: u64,
    pub first_round_purchases: u64,
    /// Sales revenue per firm (sequential only).
    pub firm_revenue: Vec<f64>,
    pub offers: Vec<f64>,
}

impl ReplicationStats {
    fn per_consumer(&self, x: f64) -> f64 {
        x / self.consumers as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error across replications.
    pub se: f64,
}

impl Estimate {
    fn from_replicates(xs: &[f64]) -> Self {
        let r = xs.len() as f64;
        let mean = pairwise_sum(xs) / r;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if xs.len() > 1 { pairwise_sum(&dev) / (r - 1.0) } else { f64::NAN };
        Estimate {
            mean,
            se: libm::sqrt(var / r),
        }
    }

    /// `|mean − target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.se == 0.0 {
            return if self.mean == target { 0.0 } else { f64::INFINITY };
        }
        (self.mean - target).abs() / self.se
    }

    pub fn within(&self, target: f64, standard_errors: f64) -> bool {
        self.z_score(target) <= standard_errors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config: SimConfig,
    pub regime: Regime,
    /// Per consumer.
    pub industry_profit: Estimate,
    /// Per consumer, net of search costs paid.
    pub consumer_surplus: Estimate,
    pub shopper_paid: Estimate,
    pub nonshopper_paid: Estimate,
    /// Searches (or rounds) per consumer who searches sequentially.
    pub mean_searches: Estimate,
    pub second_round_searches: u64,
    pub purchases: u64,
    pub first_round_purchases: u64,
    /// Per-firm profit per consumer (sequential only).
    pub firm_profit: Vec<Estimate>,
    /// Pooled first-drawn offers, in replication order, when kept.
    pub offers: Vec<f64>,
    pub replications: Vec<ReplicationStats>,
}

/// Combines replications, which must be given in index order.
pub fn aggregate(config: SimConfig, regime: Regime, reps: Vec<ReplicationStats>) -> SimResult {
    let col = |f: &dyn Fn(&ReplicationStats) -> f64| -> Estimate {
        let xs: Vec<f64> = reps.iter().map(f).collect();
        Estimate::from_replicates(&xs)
    };
    let ratio = |num: f64, den: u64| if den == 0 { f64::NAN } else { num / den as f64 };
    let firms = reps.first().map_or(0, |r| r.firm_revenue.len());
    let firm_profit = (0..firms)
        .map(|j| col(&|r| r.per_consumer(r.firm_revenue[j])))
        .collect();
    let offers = if config.keep_offers {
        reps.iter().flat_map(|r| r.offers.iter().copied()).collect()
    } else {
        Vec::new()
    };
    SimResult {
        config,
        regime,
        industry_profit: col(&|r| r.per_consumer(r.profit)),
        consumer_surplus: col(&|r| r.per_consumer(r.consumer_surplus)),
        shopper_paid: col(&|r| ratio(r.shopper_paid, r.shoppers)),
        nonshopper_paid: col(&|r| ratio(r.nonshopper_paid, r.nonshopper_buyers)),
        mean_searches: col(&|r| ratio(r.searches as f64, r.nonshoppers)),
        second_round_searches: reps.iter().map(|r| r.second_round_searches).sum(),
        purchases: reps.iter().map(|r| r.purchases).sum(),
        first_round_purchases: reps.iter().map(|r| r.first_round_purchases).sum(),
        firm_profit,
        offers,
        replications: reps,
    }
}

/// Surplus a consumer keeps from a purchase at offer `x`.
struct Valuation<'a> {
    map: &'a SurplusMap,
    regime: Regime,
}

impl Valuation<'_> {
    fn surplus(&self, x: f64) -> f64 {
        match self.regime {
            Regime::TwoPart => self.map.v0() - x,
            Regime::Linear => {
                let p = self.map.price_for_revenue_clamped(x);
                self.map.demand().surplus_unchecked(p)
            }
        }
    }
}

fn check_key(key: SurplusKey, map: &SurplusMap) -> Result<()> {
    if key != SurplusKey::of(map) {
        return Err(Error::ParameterMismatch(
            "equilibrium was solved against a different demand curve".into(),
        ));
    }
    Ok(())
}

/// One replication of the shoppers/nonshoppers market.
pub fn replicate_sequential(
    eq: &SequentialEquilibrium,
    map: &SurplusMap,
    cfg: &SimConfig,
    index: u32,
) -> ReplicationStats {
    let mut rng = replication_rng(cfg.master_seed, index);
    let n = eq.params().n() as usize;
    let lam = eq.params().lambda();
    let s = eq.params().s();
    let reservation = eq.reservation();
    let dist = eq.distribution();
    let value = Valuation { map, regime: eq.regime() };
    let mut st = ReplicationStats {
        index,
        consumers: cfg.consumers_per_replication as u64,
        firm_revenue: vec![0.0; n],
        ..Default::default()
    };
    let mut offers = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.consumers_per_replication {
        for o in offers.iter_mut() {
            *o = dist.quantile(rng.gen::<f64>());
        }
        if cfg.keep_offers {
            st.offers.push(offers[0]);
        }
        if rng.gen::<f64>() < lam {
            let (firm, &x) = offers
                .iter()
                .enumerate()
                .fold((0, &f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
            st.shoppers += 1;
            st.shopper_paid += x;
            st.profit += x;
            st.firm_revenue[firm] += x;
            st.consumer_surplus += value.surplus(x);
            st.purchases += 1;
            st.first_round_purchases += 1;
            continue;
        }
        st.nonshoppers += 1;
        // Visit firms in a uniformly random order, buying at the first offer
        // within the reservation value.
        for (i, slot) in order.iter_mut().enumerate() {
            *slot = i;
        }
        let mut bought = None;
        let mut visited = 0;
        for i in 0..n {
            let j = rng.gen_range(i..n);
            order.swap(i, j);
            visited += 1;
            if offers[order[i]] <= reservation {
                bought = Some(order[i]);
                break;
            }
        }
        if bought.is_none() {
            // Every offer exceeds the reservation value: take the best one
            // that still leaves positive surplus, if any.
            bought = (0..n)
                .filter(|&j| value.surplus(offers[j]) > 0.0)
                .min_by(|&a, &b| offers[a].total_cmp(&offers[b]));
        }
        st.searches += visited;
        st.second_round_searches += visited - 1;
        let search_cost = s * (visited - 1) as f64;
        match bought {
            Some(firm) => {
                let x = offers[firm];
                st.nonshopper_buyers += 1;
                st.nonshopper_paid += x;
                st.profit += x;
                st.firm_revenue[firm] += x;
                st.consumer_surplus += value.surplus(x) - search_cost;
                st.purchases += 1;
                if visited == 1 {
                    st.first_round_purchases += 1;
                }
            }
            None => st.consumer_surplus -= search_cost,
        }
    }
    st
}

/// One replication of noisy search.
pub fn replicate_noisy(
    eq: &NoisyEquilibrium,
    map: &SurplusMap,
    cfg: &SimConfig,
    index: u32,
) -> ReplicationStats {
    let mut rng = replication_rng(cfg.master_seed, index);
    let mu = eq.params().mu();
    let s = eq.params().s();
    let reservation = eq.reservation();
    let dist = eq.distribution();
    let value = Valuation { map, regime: eq.regime() };
    let mut st = ReplicationStats {
        index,
        consumers: cfg.consumers_per_replication as u64,
        ..Default::default()
    };
    for _ in 0..cfg.consumers_per_replication {
        st.nonshoppers += 1;
        let mut rounds = 0u32;
        let mut bought = None;
        while rounds < MAX_ROUNDS {
            rounds += 1;
            let k = draw_count(mu, rng.gen::<f64>());
            let mut best = f64::INFINITY;
            for i in 0..k {
                let x = dist.quantile(rng.gen::<f64>());
                if cfg.keep_offers && rounds == 1 && i == 0 {
                    st.offers.push(x);
                }
                best = best.min(x);
            }
            if best <= reservation {
                bought = Some(best);
                break;
            }
        }
        st.searches += rounds as u64;
        st.second_round_searches += (rounds - 1) as u64;
        let search_cost = s * (rounds - 1) as f64;
        match bought {
            Some(x) => {
                st.nonshopper_buyers += 1;
                st.nonshopper_paid += x;
                st.profit += x;
                st.consumer_surplus += value.surplus(x) - search_cost;
                st.purchases += 1;
                if rounds == 1 {
                    st.first_round_purchases += 1;
                }
            }
            None => st.consumer_surplus -= search_cost,
        }
    }
    st
}

/// Inverse-CDF draw of the number of responses `k ∈ 1..=m`.
fn draw_count(mu: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in mu.iter().enumerate() {
        acc += p;
        if u < acc {
            return i + 1;
        }
    }
    mu.len()
}

pub fn simulate_sequential(
    eq: &SequentialEquilibrium,
    map: &SurplusMap,
    cfg: &SimConfig,
) -> Result<SimResult> {
    check_key(eq.key, map)?;
    let reps = (0..cfg.replications)
        .map(|i| replicate_sequential(eq, map, cfg, i))
        .collect();
    Ok(aggregate(*cfg, eq.regime(), reps))
}

pub fn simulate_noisy(eq: &NoisyEquilibrium, map: &SurplusMap, cfg: &SimConfig) -> Result<SimResult> {
    check_key(eq.key, map)?;
    let reps = (0..cfg.replications)
        .map(|i| replicate_noisy(eq, map, cfg, i))
        .collect();
    Ok(aggregate(*cfg, eq.regime(), reps))
}

/// Checks that a simulation may use this equilibrium and map, for drivers
/// that call the `replicate_*` functions themselves.
pub fn check_inputs_sequential(eq: &SequentialEquilibrium, map: &SurplusMap) -> Result<()> {
    check_key(eq.key, map)
}

pub fn check_inputs_noisy(eq: &NoisyEquilibrium, map: &SurplusMap) -> Result<()> {
    check_key(eq.key, map)
}

/// Kolmogorov–Smirnov distance between the sample and `cdf`. Sorts the
/// sample in place.
pub fn ks_distance<C: SupportCdf>(sample: &mut [f64], cdf: &C) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the KS distance for `n` draws, `1.63/√n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / libm::sqrt(n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{DemandCurve, DemandFamily};
    use crate::noisy::{solve_noisy_two_part, NoisyParams};
    use crate::stahl::{solve_two_part, MarketParams};

    fn map() -> SurplusMap {
        SurplusMap::new(DemandCurve::new(DemandFamily::Linear, &[1.0, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(1, 1, 100).is_err());
        assert!(SimConfig::new(1, 10, 0).is_err());
        assert!(SimConfig::new(1, 10, 100).unwrap().warning().is_some());
        assert!(SimConfig::new(1, 10, 1000).unwrap().warning().is_none());
    }

    #[test]
    fn streams_differ_by_index_and_repeat_by_seed() {
        let a: u64 = replication_rng(7, 0).gen();
        let b: u64 = replication_rng(7, 1).gen();
        let c: u64 = replication_rng(7, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn draw_count_inverts_mu() {
        let mu = [0.2, 0.5, 0.3];
        assert_eq!(draw_count(&mu, 0.0), 1);
        assert_eq!(draw_count(&mu, 0.19), 1);
        assert_eq!(draw_count(&mu, 0.2), 2);
        assert_eq!(draw_count(&mu, 0.99), 3);
    }

    #[test]
    fn boundary_fee_market_matches_analytic_profit() {
        let m = map();
        let eq = solve_two_part(&MarketParams::new(2, 0.5, 0.3).unwrap(), &m).unwrap();
        let cfg = SimConfig::new(11, 20, 5_000).unwrap();
        let r = simulate_sequential(&eq, &m, &cfg).unwrap();
        assert!(r.industry_profit.within(0.25, 3.0), "{:?}", r.industry_profit);
        assert_eq!(r.second_round_searches, 0);
        assert_eq!(r.first_round_purchases, r.purchases);
    }

    #[test]
    fn competitive_limit_drives_profit_to_zero() {
        let m = map();
        let eq = solve_two_part(&MarketParams::new(2, 1.0 - 1e-9, 0.1).unwrap(), &m).unwrap();
        let r = simulate_sequential(&eq, &m, &SimConfig::new(5, 10, 1_000).unwrap()).unwrap();
        assert!(r.industry_profit.mean < 1e-8, "{:?}", r.industry_profit);
        assert!(r.industry_profit.within(eq.industry_profit(), 3.0));
    }

    #[test]
    fn noisy_purchases_all_happen_in_round_one() {
        let m = map();
        let eq = solve_noisy_two_part(&NoisyParams::new(alloc::vec![0.5, 0.5], 0.3).unwrap(), &m).unwrap();
        let r = simulate_noisy(&eq, &m, &SimConfig::new(3, 10, 2_000).unwrap()).unwrap();
        assert_eq!(r.purchases, 20_000);
        assert_eq!(r.first_round_purchases, 20_000);
        assert!(r.industry_profit.within(0.25, 3.0));
    }

    #[test]
    fn ks_distance_of_exact_quantiles_is_small() {
        let m = map();
        let eq = solve_two_part(&MarketParams::new(3, 0.3, 0.1).unwrap(), &m).unwrap();
        let mut xs: Vec<f64> = (0..1000).map(|i| eq.quantile((i as f64 + 0.5) / 1000.0)).collect();
        assert!(ks_distance(&mut xs, eq.distribution()) <= 0.5 / 1000.0 + 1e-12);
    }
}
