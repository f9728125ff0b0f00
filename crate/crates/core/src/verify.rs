//! Residual checks that certify a solved (or externally supplied) offer
//! distribution as an equilibrium.
//!
//! Every check yields a [`CheckOutcome`]; a [`VerificationReport`] passes only
//! if all of them do. Integrals here use composite Gauss–Legendre rules in
//! the original variables, never the solver's adaptive Simpson, so that the
//! two quadratures check each other.

use alloc::format;
use alloc::vec::Vec;

use crate::demand::SurplusMap;
use crate::error::{Error, Result};
use crate::noisy::NoisyEquilibrium;
use crate::numeric::{closed_grid, find_root, interior_grid, GaussLegendre};
use crate::offer::{Clientele, OfferDistribution, SupportCdf, TabulatedCdf};
use crate::stahl::{Regime, SequentialEquilibrium, SurplusKey};

pub const SUPPORT_GRID: usize = 1000;
pub const DEVIATION_GRID: usize = 2000;
const MONOTONE_GRID: usize = 40;
const ATOM_BISECTIONS: usize = 45;
const GAUSS_ORDER: usize = 10;

/// Whether a check passes when its residual is at most or at least the
/// tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

impl Bound {
    pub fn symbol(self) -> &'static str {
        match self {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub residual: f64,
    /// Where the worst residual occurred; NaN when not meaningful.
    pub location: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl CheckOutcome {
    pub fn at_most(name: &'static str, residual: f64, location: f64, tolerance: f64) -> Self {
        CheckOutcome {
            name,
            residual,
            location,
            tolerance,
            bound: Bound::AtMost,
            pass: residual <= tolerance,
        }
    }

    pub fn at_least(name: &'static str, residual: f64, location: f64, tolerance: f64) -> Self {
        CheckOutcome {
            name,
            residual,
            location,
            tolerance,
            bound: Bound::AtLeast,
            pass: residual >= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Default tolerances. `scale` multiplies the residual tolerances
/// (equal profit, deviation, reservation); the structural thresholds are
/// fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub equal_profit: f64,
    pub deviation: f64,
    pub reservation: f64,
    /// Minimum scaled CDF slope accepted as "no flat region".
    pub min_slope: f64,
    /// Largest localized jump accepted as "no atom".
    pub atom: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equal_profit: 1e-8,
            deviation: 1e-9,
            reservation: 1e-8,
            min_slope: 1e-6,
            atom: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn scaled(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param("tolerance scale", format!("{scale} must be positive")));
        }
        let d = Tolerances::default();
        Ok(Tolerances {
            equal_profit: d.equal_profit * scale,
            deviation: d.deviation * scale,
            reservation: d.reservation * scale,
            ..d
        })
    }
}

/// A candidate equilibrium: an offer CDF plus everything needed to judge it.
#[derive(Debug, Clone)]
pub struct Profile<C> {
    pub cdf: C,
    pub clientele: Clientele,
    pub regime: Regime,
    pub reservation: f64,
    pub s: f64,
}

fn cap_for(regime: Regime, map: &SurplusMap) -> f64 {
    match regime {
        Regime::TwoPart => map.v0(),
        Regime::Linear => map.monopoly_revenue(),
    }
}

/// Weight of `F` in the expected benefit of one more search.
fn search_weight(clientele: &Clientele, y: f64) -> f64 {
    match clientele {
        Clientele::Shoppers(_) => y,
        Clientele::Noisy(p) => p.response_weight(y),
    }
}

// ---------------------------------------------------------------- profit

/// `max |x·share(F(x)) − profit(upper)| / profit(upper)` over `grid` support
/// points (or over the rows of a tabulated CDF).
pub fn equal_profit_residual<C: SupportCdf>(
    cdf: &C,
    clientele: &Clientele,
    grid: usize,
    tol: f64,
) -> CheckOutcome {
    let (a, b) = (cdf.lower(), cdf.upper());
    let profit = |x: f64| x * clientele.share(cdf.cdf(x));
    let reference = profit(b);
    let mut worst = (0.0, b);
    let mut visit = |x: f64| {
        let r = ((profit(x) - reference) / reference).abs();
        if !(r <= worst.0) {
            worst = (r, x);
        }
    };
    match cdf.knots() {
        Some(xs) => xs.iter().copied().for_each(&mut visit),
        None => closed_grid(a, b, grid).for_each(&mut visit),
    }
    CheckOutcome::at_most("equal-profit", worst.0, worst.1, tol)
}

// ------------------------------------------------------------ deviations

/// Expected profit of a firm posting offer `x` against rivals drawing from
/// `cdf`, when consumers accept offers up to `reservation`.
fn offer_profit<C: SupportCdf>(cdf: &C, clientele: &Clientele, reservation: f64, x: f64) -> f64 {
    if x > reservation {
        return 0.0;
    }
    clientele.share(cdf.cdf(x))
}

/// Deviations to offers outside the support: below `lower`, and between
/// `upper` and `min(reservation, cap)`. Gain relative to the equilibrium
/// profit `captive·upper`.
pub fn offer_deviation_scan<C: SupportCdf>(
    cdf: &C,
    clientele: &Clientele,
    reservation: f64,
    cap: f64,
    grid: usize,
    tol: f64,
) -> CheckOutcome {
    let (a, b) = (cdf.lower(), cdf.upper());
    let eq = clientele.captive_share() * b;
    let top = reservation.min(cap);
    let below = interior_grid(0.0, a, grid / 2).chain(core::iter::once(a));
    let above = closed_grid(b, top, grid / 2).filter(move |_| top > b);
    let mut worst = (f64::NEG_INFINITY, f64::NAN);
    for x in below.chain(above) {
        let gain = offer_profit(cdf, clientele, reservation, x) * x - eq;
        if gain > worst.0 {
            worst = (gain, x);
        }
    }
    CheckOutcome::at_most("offer-deviation", worst.0, worst.1, tol)
}

/// Result of scanning one-off linear-price deviations against a fee
/// equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDeviation {
    /// `max_p [share(H(τ(p)))·π(p)] − captive·t̄`, with `τ(p) = ∫₀^p q`.
    pub max_gain: f64,
    pub argmax_price: f64,
    pub foc: FocScan,
}

/// Sign analysis of `q′(p)p + q(p) − q(p)²p / ∫₀^p q` on `(0, p̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FocScan {
    /// Interior sign changes, refined by root finding.
    pub roots: Vec<f64>,
    /// Largest value of the expression on `[p_m, p̄)`; negative means no
    /// root can lie at or above the monopoly price.
    pub max_at_or_above_monopoly: f64,
    pub monopoly_price: f64,
}

impl FocScan {
    pub fn roots_below_monopoly(&self) -> bool {
        self.roots.iter().all(|&p| p < self.monopoly_price) && self.max_at_or_above_monopoly < 0.0
    }
}

pub fn foc_deviation(map: &SurplusMap, p: f64) -> f64 {
    let d = map.demand();
    let q = d.quantity(p);
    d.marginal_revenue(p) - q * q * p / d.cumulative(p)
}

pub fn foc_scan(map: &SurplusMap, grid: usize) -> FocScan {
    let choke = map.demand().choke_price();
    let p_m = map.monopoly_price();
    let pts: Vec<f64> = interior_grid(0.0, choke, grid).collect();
    let vals: Vec<f64> = pts.iter().map(|&p| foc_deviation(map, p)).collect();
    let mut roots = Vec::new();
    for i in 1..pts.len() {
        if vals[i - 1] == 0.0 {
            roots.push(pts[i - 1]);
        } else if vals[i - 1] * vals[i] < 0.0 {
            if let Ok(r) = find_root(|p| foc_deviation(map, p), pts[i - 1], pts[i], 1e-13) {
                roots.push(r);
            }
        }
    }
    let max_at_or_above_monopoly = core::iter::once(p_m)
        .chain(pts.iter().copied().filter(|&p| p >= p_m))
        .map(|p| foc_deviation(map, p))
        .fold(f64::NEG_INFINITY, f64::max);
    FocScan {
        roots,
        max_at_or_above_monopoly,
        monopoly_price: p_m,
    }
}

/// Deviation profit of linear price `p` against fee distribution `cdf`.
pub fn linear_deviation_profit<C: SupportCdf>(
    cdf: &C,
    clientele: &Clientele,
    reservation: f64,
    map: &SurplusMap,
    p: f64,
) -> f64 {
    let d = map.demand();
    let tau = d.cumulative(p);
    offer_profit(cdf, clientele, reservation, tau) * d.revenue_at(p)
}

pub fn linear_deviation_scan<C: SupportCdf>(
    cdf: &C,
    clientele: &Clientele,
    reservation: f64,
    map: &SurplusMap,
    grid: usize,
) -> LinearDeviation {
    let eq = clientele.captive_share() * cdf.upper();
    let choke = map.demand().choke_price();
    let mut worst = (f64::NEG_INFINITY, f64::NAN);
    for p in interior_grid(0.0, choke, grid) {
        let gain = linear_deviation_profit(cdf, clientele, reservation, map, p) - eq;
        if gain > worst.0 {
            worst = (gain, p);
        }
    }
    LinearDeviation {
        max_gain: worst.0,
        argmax_price: worst.1,
        foc: foc_scan(map, grid),
    }
}

// ----------------------------------------------------------- reservation

/// `∫ w(F)` over the support (fees) or `∫ q(p) w(F(π(p))) dp` over the
/// prices that generate the support (revenues), by composite
/// Gauss–Legendre. The revenue form is taken along the price axis because
/// `−v′(π)` is singular at `π_m` and the revenue axis cannot resolve the
/// singular layer in floating point.
pub fn independent_benefit<C: SupportCdf>(
    cdf: &C,
    clientele: &Clientele,
    regime: Regime,
    map: &SurplusMap,
) -> f64 {
    let rule = GaussLegendre::new(GAUSS_ORDER);
    let d = map.demand();
    let weight = |x: f64| search_weight(clientele, cdf.cdf(x));
    let fee = |t: f64| weight(t);
    let price = |p: f64| d.quantity(p) * weight(d.revenue_at(p));
    // Breakpoints on the integration axis.
    let to_axis = |x: f64| match regime {
        Regime::TwoPart => x,
        Regime::Linear => map.price_for_revenue_clamped(x),
    };
    let graded = |a: f64, b: f64, middle: usize| match regime {
        Regime::TwoPart => rule.graded(fee, a, b, 50, 0.5, middle),
        Regime::Linear => rule.graded(price, a, b, 50, 0.5, middle),
    };
    let panel = |a: f64, b: f64| match regime {
        Regime::TwoPart => rule.panel(&fee, a, b),
        Regime::Linear => rule.panel(&price, a, b),
    };
    match cdf.knots() {
        Some(xs) => {
            let ps: Vec<f64> = xs.iter().map(|&x| to_axis(x)).collect();
            let last = ps.len() - 1;
            ps.windows(2)
                .enumerate()
                .map(|(i, w)| {
                    if i + 1 == last && regime == Regime::Linear {
                        graded(w[0], w[1], 2)
                    } else {
                        panel(w[0], w[1])
                    }
                })
                .sum()
        }
        None => graded(to_axis(cdf.lower()), to_axis(cdf.upper()), 32),
    }
}

/// `|benefit(reservation) − s|` for an interior profile. Errors in the
/// boundary regime, where [`boundary_benefit_check`] applies instead.
pub fn reservation_consistency<C: SupportCdf>(
    profile: &Profile<C>,
    map: &SurplusMap,
    tol: f64,
) -> Result<CheckOutcome> {
    let cap = cap_for(profile.regime, map);
    if profile.reservation >= cap {
        return Err(Error::domain("reservation", profile.reservation, 0.0, cap));
    }
    let b = independent_benefit(&profile.cdf, &profile.clientele, profile.regime, map);
    let tol = tol.max(table_allowance(profile, map));
    Ok(CheckOutcome::at_most(
        "reservation-consistency",
        (b - profile.s).abs(),
        profile.reservation,
        tol,
    ))
}

/// Boundary regime: the benefit of searching with the cap in hand must not
/// exceed `s`. Residual is `benefit(upper) − s`.
pub fn boundary_benefit_check<C: SupportCdf>(
    profile: &Profile<C>,
    map: &SurplusMap,
    tol: f64,
) -> CheckOutcome {
    let b = independent_benefit(&profile.cdf, &profile.clientele, profile.regime, map);
    let tol = tol.max(table_allowance(profile, map));
    CheckOutcome::at_most("boundary-benefit", b - profile.s, profile.cdf.upper(), tol)
}

/// For tabulated CDFs, an allowance for the interpolation error of the
/// benefit integral: twice the change when every other row is dropped, which
/// bounds the error whenever it shrinks at least linearly with row spacing.
fn table_allowance<C: SupportCdf>(profile: &Profile<C>, map: &SurplusMap) -> f64 {
    let Some(xs) = profile.cdf.knots() else {
        return 0.0;
    };
    if xs.len() < 5 {
        return f64::INFINITY;
    }
    let cs: Vec<f64> = xs.iter().map(|&x| profile.cdf.cdf(x)).collect();
    let Ok(table) = TabulatedCdf::new(xs.to_vec(), cs) else {
        return 0.0;
    };
    let fine = independent_benefit(&table, &profile.clientele, profile.regime, map);
    let coarse = independent_benefit(&table.coarsened(), &profile.clientele, profile.regime, map);
    2.0 * (fine - coarse).abs()
}

/// The benefit of search under the equilibrium distribution family is
/// strictly increasing in the reservation value on a grid of `(0, cap]`.
pub fn benefit_monotone(clientele: &Clientele, regime: Regime, map: &SurplusMap) -> CheckOutcome {
    let cap = cap_for(regime, map);
    let mut prev = 0.0;
    let mut worst = (f64::INFINITY, f64::NAN);
    for r in interior_grid(0.0, cap, MONOTONE_GRID - 1).chain(core::iter::once(cap)) {
        let b = match OfferDistribution::new(clientele.clone(), r) {
            Ok(dist) => independent_benefit(&dist, clientele, regime, map),
            Err(_) => f64::NAN,
        };
        let step = b - prev;
        if !(step >= worst.0) {
            worst = (step, r);
        }
        prev = b;
    }
    CheckOutcome::at_least("benefit-monotone", worst.0, worst.1, f64::MIN_POSITIVE)
}

// ------------------------------------------------------------- structure

/// Minimum of `ΔF/Δx·(upper − lower)` over `grid` cells of the support.
pub fn no_flat_region<C: SupportCdf>(cdf: &C, grid: usize, tol: f64) -> CheckOutcome {
    let (a, b) = (cdf.lower(), cdf.upper());
    let width = b - a;
    let pts: Vec<f64> = closed_grid(a, b, grid + 1).collect();
    let mut worst = (f64::INFINITY, f64::NAN);
    for w in pts.windows(2) {
        let slope = (cdf.cdf(w[1]) - cdf.cdf(w[0])) / (w[1] - w[0]) * width;
        if !(slope >= worst.0) {
            worst = (slope, 0.5 * (w[0] + w[1]));
        }
    }
    CheckOutcome::at_least("no-flat-region", worst.0, worst.1, tol)
}

/// Finds the largest jump between adjacent grid points (including just
/// outside each end of the support) and bisects toward it. A continuous CDF
/// loses most of the jump under refinement; an atom keeps it. Residual is
/// the localized jump, or 0 if it shrank below half its starting size.
pub fn no_atom<C: SupportCdf>(cdf: &C, grid: usize, tol: f64) -> CheckOutcome {
    let (a, b) = (cdf.lower(), cdf.upper());
    let pad = (b - a) * 1e-3;
    let mut pts: Vec<f64> = Vec::with_capacity(grid + 3);
    pts.push(a - pad);
    pts.extend(closed_grid(a, b, grid + 1));
    pts.push(b + pad);
    let jump = |lo: f64, hi: f64| cdf.cdf(hi) - cdf.cdf(lo);
    let (mut lo, mut hi) = pts
        .windows(2)
        .map(|w| (w[0], w[1]))
        .fold((a, a), |acc, c| if jump(c.0, c.1) > jump(acc.0, acc.1) { c } else { acc });
    let start = jump(lo, hi);
    for _ in 0..ATOM_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if jump(lo, mid) >= jump(mid, hi) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let end = jump(lo, hi);
    let residual = if end >= 0.5 * start { end } else { 0.0 };
    CheckOutcome::at_most("no-atom", residual, 0.5 * (lo + hi), tol)
}

/// `upper − min(reservation, cap)`: every offer is accepted on the first
/// search and never exceeds the cap.
pub fn upper_within_reservation<C: SupportCdf>(cdf: &C, reservation: f64, cap: f64) -> CheckOutcome {
    let limit = reservation.min(cap);
    CheckOutcome::at_most(
        "upper-within-reservation",
        cdf.upper() - limit,
        cdf.upper(),
        1e-12 * cap,
    )
}

pub fn structure_checks<C: SupportCdf>(
    cdf: &C,
    reservation: f64,
    cap: f64,
    tol: &Tolerances,
) -> Vec<CheckOutcome> {
    alloc::vec![
        no_flat_region(cdf, SUPPORT_GRID, tol.min_slope),
        no_atom(cdf, SUPPORT_GRID, tol.atom),
        upper_within_reservation(cdf, reservation, cap),
    ]
}

// ---------------------------------------------------------------- certify

/// Runs every applicable check on a profile. `boundary` selects the
/// boundary-regime form of the reservation check.
pub fn certify_profile<C: SupportCdf>(
    profile: &Profile<C>,
    boundary: bool,
    map: &SurplusMap,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let cap = cap_for(profile.regime, map);
    let cdf = &profile.cdf;
    let mut checks = Vec::new();

    // Equal profit at the default grid and at twice its resolution.
    let coarse = equal_profit_residual(cdf, &profile.clientele, SUPPORT_GRID, tol.equal_profit);
    let fine = equal_profit_residual(cdf, &profile.clientele, 2 * SUPPORT_GRID, tol.equal_profit);
    checks.push(if fine.residual > coarse.residual { fine } else { coarse });

    checks.push(offer_deviation_scan(
        cdf,
        &profile.clientele,
        profile.reservation,
        cap,
        DEVIATION_GRID,
        tol.deviation,
    ));
    if profile.regime == Regime::TwoPart {
        let dev = linear_deviation_scan(cdf, &profile.clientele, profile.reservation, map, DEVIATION_GRID);
        checks.push(CheckOutcome::at_most(
            "linear-deviation",
            dev.max_gain,
            dev.argmax_price,
            tol.deviation,
        ));
        checks.push(CheckOutcome {
            name: "foc-below-monopoly",
            residual: dev.foc.max_at_or_above_monopoly,
            location: dev.foc.monopoly_price,
            tolerance: 0.0,
            bound: Bound::AtMost,
            pass: dev.foc.roots_below_monopoly(),
        });
    }

    if boundary {
        checks.push(boundary_benefit_check(profile, map, tol.reservation));
    } else {
        checks.push(reservation_consistency(profile, map, tol.reservation)?);
    }
    checks.push(benefit_monotone(&profile.clientele, profile.regime, map));
    checks.extend(structure_checks(cdf, profile.reservation, cap, tol));
    Ok(VerificationReport { checks })
}

fn check_key(key: SurplusKey, map: &SurplusMap) -> Result<()> {
    if key != SurplusKey::of(map) {
        return Err(Error::ParameterMismatch(
            "equilibrium was solved against a different demand curve".into(),
        ));
    }
    Ok(())
}

pub fn certify_sequential(
    eq: &SequentialEquilibrium,
    map: &SurplusMap,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_key(eq.key, map)?;
    let profile = Profile {
        cdf: eq.distribution(),
        clientele: eq.params().clientele(),
        regime: eq.regime(),
        reservation: eq.reservation(),
        s: eq.params().s(),
    };
    certify_profile(&profile, eq.is_boundary(), map, tol)
}

pub fn certify_noisy(
    eq: &NoisyEquilibrium,
    map: &SurplusMap,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_key(eq.key, map)?;
    let profile = Profile {
        cdf: eq.distribution(),
        clientele: eq.params().clientele(),
        regime: eq.regime(),
        reservation: eq.reservation(),
        s: eq.params().s(),
    };
    certify_profile(&profile, eq.is_boundary(), map, tol)
}

/// Certifies an externally supplied CDF table. The profile claims its upper
/// support is the reservation value (or the cap, in the boundary regime).
pub fn certify_table(
    table: TabulatedCdf,
    clientele: Clientele,
    regime: Regime,
    s: f64,
    map: &SurplusMap,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let cap = cap_for(regime, map);
    let upper = table.upper();
    if !(table.lower() > 0.0) {
        return Err(Error::param("cdf table", "offers must be positive"));
    }
    let boundary = upper >= cap * (1.0 - 1e-9);
    let profile = Profile {
        cdf: table,
        clientele,
        regime,
        reservation: if boundary { cap } else { upper },
        s,
    };
    certify_profile(&profile, boundary, map, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{DemandCurve, DemandFamily};
    use crate::noisy::{solve_noisy_linear, solve_noisy_two_part, NoisyParams};
    use crate::stahl::{solve_linear, solve_two_part, MarketParams};
    use alloc::vec;

    fn map() -> SurplusMap {
        SurplusMap::new(DemandCurve::new(DemandFamily::Linear, &[1.0, 1.0]).unwrap()).unwrap()
    }

    struct Powered<'a>(&'a OfferDistribution, f64);
    impl SupportCdf for Powered<'_> {
        fn lower(&self) -> f64 {
            self.0.lower()
        }
        fn upper(&self) -> f64 {
            self.0.upper()
        }
        fn cdf(&self, x: f64) -> f64 {
            libm::pow(self.0.cdf(x), self.1)
        }
    }

    /// Uniform on `[1, 2]` with an optional plateau or jump.
    struct Handmade {
        plateau: bool,
        jump: bool,
    }
    impl SupportCdf for Handmade {
        fn lower(&self) -> f64 {
            1.0
        }
        fn upper(&self) -> f64 {
            2.0
        }
        fn cdf(&self, x: f64) -> f64 {
            let u = (x - 1.0).clamp(0.0, 1.0);
            let mut c = if self.plateau {
                if u < 0.4 { u } else if u < 0.6 { 0.4 } else { 0.4 + (u - 0.6) * 1.5 }
            } else {
                u
            };
            if self.jump {
                c = if u < 0.5 { 0.9 * u } else { 0.1 + 0.9 * u };
            }
            c
        }
    }

    #[test]
    fn solved_equilibria_pass_every_check() {
        let m = map();
        let tol = Tolerances::default();
        for s in [0.05, 0.1, 0.3] {
            let p = MarketParams::new(2, 0.5, s).unwrap();
            for eq in [solve_two_part(&p, &m).unwrap(), solve_linear(&p, &m).unwrap()] {
                let r = certify_sequential(&eq, &m, &tol).unwrap();
                assert!(r.passed(), "s={s} {:?}: {:?}", eq.regime(), r.failures().collect::<Vec<_>>());
            }
        }
        let np = NoisyParams::new(vec![0.5, 0.5], 0.1).unwrap();
        for eq in [solve_noisy_two_part(&np, &m).unwrap(), solve_noisy_linear(&np, &m).unwrap()] {
            let r = certify_noisy(&eq, &m, &tol).unwrap();
            assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn perturbed_cdf_fails_equal_profit() {
        let m = map();
        let eq = solve_two_part(&MarketParams::new(2, 0.5, 0.1).unwrap(), &m).unwrap();
        let bent = Powered(eq.distribution(), 1.05);
        let c = equal_profit_residual(&bent, &eq.params().clientele(), SUPPORT_GRID, 1e-8);
        assert!(c.residual > 1e-3 && !c.pass);
        let exact = equal_profit_residual(eq.distribution(), &eq.params().clientele(), SUPPORT_GRID, 1e-8);
        assert!(exact.pass);
    }

    #[test]
    fn linear_deviation_examples() {
        let m = map();
        let p = MarketParams::new(2, 0.5, 0.3).unwrap();
        let eq = solve_two_part(&p, &m).unwrap();
        let c = p.clientele();
        let dev = linear_deviation_scan(eq.distribution(), &c, eq.reservation(), &m, DEVIATION_GRID);
        assert!(dev.max_gain <= 0.0);
        assert!(dev.foc.roots_below_monopoly());
        let at_pm = linear_deviation_profit(eq.distribution(), &c, eq.reservation(), &m, 0.5);
        assert!(at_pm < 0.5 * eq.upper() / 2.0);
        assert_eq!(m.demand().cumulative(1.0), m.v0());
    }

    #[test]
    fn reservation_examples() {
        let m = map();
        let tol = Tolerances::default();
        let eq = solve_two_part(&MarketParams::new(2, 0.5, 0.1).unwrap(), &m).unwrap();
        let profile = Profile {
            cdf: eq.distribution(),
            clientele: eq.params().clientele(),
            regime: eq.regime(),
            reservation: eq.reservation(),
            s: 0.1,
        };
        assert!(reservation_consistency(&profile, &m, tol.reservation).unwrap().pass);

        let eq = solve_two_part(&MarketParams::new(2, 0.5, 0.3).unwrap(), &m).unwrap();
        let profile = Profile {
            cdf: eq.distribution(),
            clientele: eq.params().clientele(),
            regime: eq.regime(),
            reservation: eq.reservation(),
            s: 0.3,
        };
        assert!(matches!(
            reservation_consistency(&profile, &m, tol.reservation),
            Err(Error::Domain { .. })
        ));
        let b = boundary_benefit_check(&profile, &m, tol.reservation);
        assert!(b.pass);
        assert!((b.residual + 0.3 - 0.225_346_927_832_972_6).abs() < 1e-12);
        assert!(benefit_monotone(&eq.params().clientele(), Regime::TwoPart, &m).pass);
    }

    #[test]
    fn handmade_counterexamples_fail_only_their_check() {
        let tol = Tolerances::default();
        let smooth = structure_checks(&Handmade { plateau: false, jump: false }, 2.0, 3.0, &tol);
        assert!(smooth.iter().all(|c| c.pass));
        let flat = structure_checks(&Handmade { plateau: true, jump: false }, 2.0, 3.0, &tol);
        let failing: Vec<_> = flat.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        assert_eq!(failing, ["no-flat-region"]);
        let atom = structure_checks(&Handmade { plateau: false, jump: true }, 2.0, 3.0, &tol);
        let failing: Vec<_> = atom.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        assert_eq!(failing, ["no-atom"]);
        let c = no_atom(&Handmade { plateau: false, jump: true }, SUPPORT_GRID, tol.atom);
        assert!((c.residual - 0.1).abs() < 1e-9 && (c.location - 1.5).abs() < 1e-9);
    }

    #[test]
    fn steep_continuous_cdf_is_not_an_atom() {
        let m = map();
        let eq = solve_two_part(&MarketParams::new(10, 0.9, 0.01).unwrap(), &m).unwrap();
        assert!(no_atom(eq.distribution(), SUPPORT_GRID, 1e-6).pass);
    }

    #[test]
    fn sampled_solver_output_certifies() {
        let m = map();
        let tol = Tolerances::default();
        let p = MarketParams::new(3, 0.4, 0.08).unwrap();
        for eq in [solve_two_part(&p, &m).unwrap(), solve_linear(&p, &m).unwrap()] {
            let table = TabulatedCdf::sample(eq.distribution(), 512);
            let r = certify_table(table, p.clientele(), eq.regime(), p.s(), &m, &tol).unwrap();
            assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn tolerance_scale_validates() {
        assert!(Tolerances::scaled(0.0).is_err());
        assert_eq!(Tolerances::scaled(10.0).unwrap().deviation, 1e-8);
    }
}
