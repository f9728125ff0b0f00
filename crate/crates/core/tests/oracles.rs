//! Frozen reference values, computed independently with 30-digit
//! arithmetic (closed forms where they exist, otherwise high-precision
//! quadrature and root finding) before the solvers were written.

// Reference values keep the digits they were computed with.
#![allow(clippy::excessive_precision)]

use approx::assert_abs_diff_eq;
use tariffsearch_core::extcost::{self, SearchCostDist};
use tariffsearch_core::noisy::{solve_noisy_linear, solve_noisy_two_part, NoisyParams};
use tariffsearch_core::stahl::{solve_linear, solve_two_part};
use tariffsearch_core::welfare::{welfare_noisy, welfare_sequential};
use tariffsearch_core::{DemandCurve, DemandFamily, MarketParams, SurplusMap};

const T_R_S01: f64 = 0.221880104960028841;
const S_BAR_FEE: f64 = 0.225346927832972577;
const T_LOW_S01: f64 = 0.07396003498667628;
const FIRM_PROFIT_S01: f64 = 0.05547002624000721;
const NOISY_T_R_S01: f64 = 0.226593082521703768;
const NOISY_S_BAR_FEE: f64 = 0.220659869416847045;
const S_BAR_LINEAR: f64 = 0.219245970458566800;
const PI_R_S005: f64 = 0.100937924447841342;
const NOISY_S_BAR_LINEAR: f64 = 0.177834493335981440;
const NOISY_PI_R_S002: f64 = 0.0439769830166262628;
const P_STAR_G4: f64 = 0.228155493653961819;
const PI_STAR_G4: f64 = 0.176100564369478807;
const V_PI_STAR_G4: f64 = 0.297871970988279687;
const TS_LINEAR_G4: f64 = 0.473972535357758494;
const BOUNDARY_PROFIT_L: f64 = 0.125;
const BOUNDARY_CS_L: f64 = 0.360956763736489087;
const BOUNDARY_TS_L: f64 = 0.485956763736489087;
const NOISY_BOUNDARY_PROFIT_NL: f64 = 0.25;

fn map() -> SurplusMap {
    SurplusMap::new(DemandCurve::new(DemandFamily::Linear, &[1.0, 1.0]).unwrap()).unwrap()
}

#[test]
fn sequential_fee_equilibrium() {
    let m = map();
    let eq = solve_two_part(&MarketParams::new(2, 0.5, 0.1).unwrap(), &m).unwrap();
    assert_abs_diff_eq!(eq.reservation(), T_R_S01, epsilon = 1e-9);
    assert_abs_diff_eq!(eq.s_bar(), S_BAR_FEE, epsilon = 1e-9);
    assert_abs_diff_eq!(eq.s_bar(), 0.5 * (1.0 - 0.5 * 3f64.ln()), epsilon = 1e-12);
    assert_abs_diff_eq!(eq.lower(), T_LOW_S01, epsilon = 1e-9);
    assert_abs_diff_eq!(eq.per_firm_profit(), FIRM_PROFIT_S01, epsilon = 1e-9);
    assert!(!eq.is_boundary());
}

#[test]
fn sequential_linear_equilibrium() {
    let m = map();
    let eq = solve_linear(&MarketParams::new(2, 0.5, 0.05).unwrap(), &m).unwrap();
    assert_abs_diff_eq!(eq.reservation(), PI_R_S005, epsilon = 1e-9);
    assert_abs_diff_eq!(eq.s_bar(), S_BAR_LINEAR, epsilon = 1e-9);
}

#[test]
fn noisy_equilibria() {
    let m = map();
    let p = NoisyParams::new(vec![0.5, 0.5], 0.1).unwrap();
    let fee = solve_noisy_two_part(&p, &m).unwrap();
    assert_abs_diff_eq!(fee.reservation(), NOISY_T_R_S01, epsilon = 1e-9);
    assert_abs_diff_eq!(fee.s_bar(), NOISY_S_BAR_FEE, epsilon = 1e-9);
    let lin = solve_noisy_linear(&p.with_search_cost(0.02).unwrap(), &m).unwrap();
    assert_abs_diff_eq!(lin.reservation(), NOISY_PI_R_S002, epsilon = 1e-9);
    assert_abs_diff_eq!(lin.s_bar(), NOISY_S_BAR_LINEAR, epsilon = 1e-9);
}

#[test]
fn continuous_cost_equilibrium() {
    let m = map();
    let g = SearchCostDist::uniform_with_density(4.0).unwrap();
    let rev = extcost::solve_pi_star(&g, &m).unwrap();
    assert_abs_diff_eq!(rev.price, P_STAR_G4, epsilon = 1e-10);
    assert_abs_diff_eq!(rev.revenue, PI_STAR_G4, epsilon = 1e-10);
    let w = extcost::welfare_cont(&g, &m).unwrap();
    assert_abs_diff_eq!(w.linear.consumer_surplus, V_PI_STAR_G4, epsilon = 1e-10);
    assert_abs_diff_eq!(w.linear.total_surplus, TS_LINEAR_G4, epsilon = 1e-10);
    assert_eq!(w.two_part.industry_profit, 0.25);
}

#[test]
fn boundary_welfare() {
    let m = map();
    let p = MarketParams::new(2, 0.5, 0.3).unwrap();
    let w = welfare_sequential(&solve_two_part(&p, &m).unwrap(), &solve_linear(&p, &m).unwrap(), &p, &m)
        .unwrap();
    assert_abs_diff_eq!(w.linear.industry_profit, BOUNDARY_PROFIT_L, epsilon = 1e-9);
    assert_abs_diff_eq!(w.linear.consumer_surplus, BOUNDARY_CS_L, epsilon = 1e-9);
    assert_abs_diff_eq!(w.linear.total_surplus, BOUNDARY_TS_L, epsilon = 1e-9);
    assert_abs_diff_eq!(w.two_part.industry_profit, 0.25, epsilon = 1e-9);

    let np = NoisyParams::new(vec![0.5, 0.5], 0.3).unwrap();
    let w = welfare_noisy(
        &solve_noisy_two_part(&np, &m).unwrap(),
        &solve_noisy_linear(&np, &m).unwrap(),
        &np,
        &m,
    )
    .unwrap();
    assert_abs_diff_eq!(w.two_part.industry_profit, NOISY_BOUNDARY_PROFIT_NL, epsilon = 1e-9);
}
