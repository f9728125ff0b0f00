//! Demand primitives and the surplus map.
//!
//! Marginal cost is normalized to zero everywhere, so the revenue a linear
//! price `p` extracts from one consumer is `π(p) = q(p)·p` and the surplus
//! left to the consumer is `∫_p^p̄ q(z) dz`. On the increasing branch
//! `[0, p_m]` of revenue this defines the surplus map `v(π)`.

use alloc::format;

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, closed_grid, find_root, interior_grid, scan_bracket};

/// Points used to validate monotonicity and the increasing-elasticity
/// condition at construction.
pub const VALIDATION_GRID: usize = 1000;
const ELASTICITY_MARGIN: f64 = 1e-12;

/// Numerical tolerances shared by every solver that consumes a [`SurplusMap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute tolerance of adaptive Simpson quadrature.
    pub quad_tol: f64,
    /// Bracket width at which root finding stops.
    pub root_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            quad_tol: 1e-10,
            root_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DemandFamily {
    /// `q(p) = a − b·p`, parameters `[a, b]`.
    Linear,
    /// `q(p) = a − b·p²`, parameters `[a, b]`.
    Quadratic,
    /// `q(p) = (p̄ − p)^γ`, parameters `[p̄, γ]`.
    TruncatedIsoelastic,
}

impl DemandFamily {
    pub fn name(self) -> &'static str {
        match self {
            DemandFamily::Linear => "linear",
            DemandFamily::Quadratic => "quadratic",
            DemandFamily::TruncatedIsoelastic => "truncated-isoelastic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linear" => Some(DemandFamily::Linear),
            "quadratic" => Some(DemandFamily::Quadratic),
            "truncated-isoelastic" | "isoelastic" => Some(DemandFamily::TruncatedIsoelastic),
            _ => None,
        }
    }
}

/// A validated demand curve with a finite choke price.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandCurve {
    family: DemandFamily,
    params: [f64; 2],
    choke: f64,
    max_surplus: f64,
    quad_tol: f64,
}

/// Builds and validates a demand curve.
pub fn make_demand(family: DemandFamily, params: &[f64]) -> Result<DemandCurve> {
    DemandCurve::new(family, params)
}

impl DemandCurve {
    pub fn new(family: DemandFamily, params: &[f64]) -> Result<Self> {
        Self::with_tolerance(family, params, SolverOptions::default().quad_tol)
    }

    pub fn with_tolerance(family: DemandFamily, params: &[f64], quad_tol: f64) -> Result<Self> {
        let [x, y] = match params {
            [x, y] => [*x, *y],
            _ => {
                return Err(Error::InvalidDemand(format!(
                    "{} demand takes 2 parameters, got {}",
                    family.name(),
                    params.len()
                )))
            }
        };
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidDemand("parameters must be finite".into()));
        }
        let choke = match family {
            DemandFamily::Linear | DemandFamily::Quadratic => {
                if y <= 0.0 {
                    return Err(Error::InvalidDemand(format!(
                        "slope coefficient b = {y} makes demand increasing or flat"
                    )));
                }
                if x <= 0.0 {
                    return Err(Error::InvalidDemand(format!("intercept a = {x} must be positive")));
                }
                match family {
                    DemandFamily::Linear => x / y,
                    _ => libm::sqrt(x / y),
                }
            }
            DemandFamily::TruncatedIsoelastic => {
                if x <= 0.0 {
                    return Err(Error::InvalidDemand(format!("choke price {x} must be positive")));
                }
                if y <= 0.0 {
                    return Err(Error::InvalidDemand(format!("exponent γ = {y} must be positive")));
                }
                x
            }
        };
        if !(choke.is_finite() && choke > 0.0) {
            return Err(Error::InvalidDemand(format!("choke price {choke} is not finite and positive")));
        }
        let mut curve = DemandCurve {
            family,
            params: [x, y],
            choke,
            max_surplus: 0.0,
            quad_tol,
        };
        curve.validate()?;
        curve.max_surplus = curve.cumulative(choke);
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        if self.quantity(self.choke).abs() > 1e-12 {
            return Err(Error::InvalidDemand("q(choke price) is not zero".into()));
        }
        let mut prev_q = self.quantity(0.0);
        let mut prev_e = 0.0;
        if prev_q <= 0.0 {
            return Err(Error::InvalidDemand("q(0) must be positive".into()));
        }
        for p in interior_grid(0.0, self.choke, VALIDATION_GRID) {
            let q = self.quantity(p);
            if q <= 0.0 {
                return Err(Error::InvalidDemand(format!("q({p}) = {q} is not positive below the choke price")));
            }
            if q > prev_q {
                return Err(Error::InvalidDemand(format!("demand increases at p = {p}")));
            }
            let e = self.elasticity(p);
            if !(e > prev_e + ELASTICITY_MARGIN) {
                return Err(Error::InvalidDemand(format!(
                    "elasticity not strictly increasing at p = {p}"
                )));
            }
            prev_q = q;
            prev_e = e;
        }
        Ok(())
    }

    pub fn family(&self) -> DemandFamily {
        self.family
    }

    pub fn params(&self) -> [f64; 2] {
        self.params
    }

    pub fn choke_price(&self) -> f64 {
        self.choke
    }

    /// `v(0) = ∫₀^p̄ q`, the largest attainable social surplus.
    pub fn max_surplus(&self) -> f64 {
        self.max_surplus
    }

    pub fn quantity(&self, p: f64) -> f64 {
        let [x, y] = self.params;
        match self.family {
            DemandFamily::Linear => (x - y * p).max(0.0),
            DemandFamily::Quadratic => (x - y * p * p).max(0.0),
            DemandFamily::TruncatedIsoelastic => {
                if p >= x {
                    0.0
                } else {
                    libm::pow(x - p, y)
                }
            }
        }
    }

    /// `q′(p)`.
    pub fn slope(&self, p: f64) -> f64 {
        let [x, y] = self.params;
        match self.family {
            DemandFamily::Linear => -y,
            DemandFamily::Quadratic => -2.0 * y * p,
            DemandFamily::TruncatedIsoelastic => {
                if p >= x {
                    if y >= 1.0 { 0.0 } else { f64::NEG_INFINITY }
                } else {
                    -y * libm::pow(x - p, y - 1.0)
                }
            }
        }
    }

    /// `−q′(p)p / q(p)`.
    pub fn elasticity(&self, p: f64) -> f64 {
        -self.slope(p) * p / self.quantity(p)
    }

    /// `q(p) + q′(p)p`.
    pub fn marginal_revenue(&self, p: f64) -> f64 {
        self.quantity(p) + self.slope(p) * p
    }

    pub(crate) fn revenue_at(&self, p: f64) -> f64 {
        self.quantity(p) * p
    }

    /// `π(p_ref) − π(p)` without cancellation when the two prices are close,
    /// by integrating marginal revenue with a 5-point Gauss rule. Near the
    /// monopoly price the direct difference is pure rounding noise.
    pub(crate) fn revenue_gap(&self, p_ref: f64, p: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            0.538_469_310_105_683_1,
            -0.538_469_310_105_683_1,
            0.906_179_845_938_664,
            -0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        if (p_ref - p).abs() > 1e-2 * self.choke {
            return self.revenue_at(p_ref) - self.revenue_at(p);
        }
        let half = 0.5 * (p_ref - p);
        let mid = 0.5 * (p_ref + p);
        half * NODES
            .iter()
            .zip(WEIGHTS)
            .map(|(x, w)| w * self.marginal_revenue(mid + half * x))
            .sum::<f64>()
    }

    pub fn revenue(&self, p: f64) -> Result<f64> {
        self.check_price(p)?;
        Ok(self.revenue_at(p))
    }

    /// `∫₀^p q(z) dz`: the lump-sum fee that leaves a consumer as well off
    /// as the linear price `p`.
    pub fn cumulative(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, self.choke);
        adaptive_simpson(|z| self.quantity(z), 0.0, p, self.quad_tol)
    }

    /// Consumer surplus `∫_p^p̄ q(z) dz` at linear price `p`.
    pub fn surplus_at_price(&self, p: f64) -> Result<f64> {
        self.check_price(p)?;
        Ok(self.surplus_unchecked(p))
    }

    pub(crate) fn surplus_unchecked(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.max_surplus;
        }
        self.max_surplus - self.cumulative(p)
    }

    fn check_price(&self, p: f64) -> Result<()> {
        if !(0.0..=self.choke).contains(&p) {
            return Err(Error::domain("price", p, 0.0, self.choke));
        }
        Ok(())
    }

    /// Price maximizing revenue and the revenue it yields.
    pub fn monopoly_point(&self) -> Result<(f64, f64)> {
        let grid = closed_grid(0.0, self.choke, 4 * VALIDATION_GRID)
            .map(|p| if p >= self.choke { self.choke * (1.0 - 1e-12) } else { p });
        let (lo, hi) = scan_bracket(|p| self.marginal_revenue(p), grid).ok_or_else(|| {
            Error::SolveFailure("marginal revenue never changes sign below the choke price".into())
        })?;
        let p = find_root(|p| self.marginal_revenue(p), lo, hi, 1e-14)?;
        Ok((p, self.revenue_at(p)))
    }
}

/// `v(π)` and friends for a validated demand curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SurplusMap {
    demand: DemandCurve,
    p_m: f64,
    pi_m: f64,
    opts: SolverOptions,
}

impl SurplusMap {
    pub fn new(demand: DemandCurve) -> Result<Self> {
        Self::with_options(demand, SolverOptions::default())
    }

    pub fn with_options(demand: DemandCurve, opts: SolverOptions) -> Result<Self> {
        if !(opts.quad_tol > 0.0 && opts.root_tol > 0.0) {
            return Err(Error::param("solver tolerances", "must be positive"));
        }
        let demand = if demand.quad_tol == opts.quad_tol {
            demand
        } else {
            DemandCurve::with_tolerance(demand.family, &demand.params, opts.quad_tol)?
        };
        let (p_m, pi_m) = demand.monopoly_point()?;
        Ok(SurplusMap {
            demand,
            p_m,
            pi_m,
            opts,
        })
    }

    pub fn demand(&self) -> &DemandCurve {
        &self.demand
    }

    pub fn options(&self) -> SolverOptions {
        self.opts
    }

    pub fn monopoly_price(&self) -> f64 {
        self.p_m
    }

    pub fn monopoly_revenue(&self) -> f64 {
        self.pi_m
    }

    pub fn v0(&self) -> f64 {
        self.demand.max_surplus
    }

    /// The unique price in `[0, p_m]` that extracts revenue `pi`.
    pub fn price_for_revenue(&self, pi: f64) -> Result<f64> {
        if !(pi >= 0.0 && pi <= self.pi_m * (1.0 + 1e-12)) {
            return Err(Error::domain("revenue", pi, 0.0, self.pi_m));
        }
        Ok(self.price_for_revenue_clamped(pi))
    }

    pub(crate) fn price_for_revenue_clamped(&self, pi: f64) -> f64 {
        if pi <= 0.0 {
            return 0.0;
        }
        if pi >= self.pi_m {
            return self.p_m;
        }
        find_root(
            |p| self.demand.revenue_at(p) - pi,
            0.0,
            self.p_m,
            self.opts.root_tol,
        )
        .unwrap_or(self.p_m)
    }

    pub fn v_of_pi(&self, pi: f64) -> Result<f64> {
        let p = self.price_for_revenue(pi)?;
        Ok(self.demand.surplus_unchecked(p))
    }

    /// `v′(π) = −1 / (1 + q′(p)p/q(p))` at `p = p(π)`.
    pub fn v_prime(&self, pi: f64) -> Result<f64> {
        if !(pi >= 0.0 && pi < self.pi_m) {
            return Err(Error::domain("revenue", pi, 0.0, self.pi_m));
        }
        Ok(self.v_prime_at_price(self.price_for_revenue_clamped(pi)))
    }

    pub(crate) fn v_prime_at_price(&self, p: f64) -> f64 {
        let q = self.demand.quantity(p);
        -1.0 / (1.0 + self.demand.slope(p) * p / q)
    }

    /// `v″(π)`: central difference of `v′` along the price axis, divided by
    /// `dπ/dp`. Only defined where `v′` is, i.e. below `π_m`.
    pub fn v_second(&self, pi: f64) -> Result<f64> {
        if !(pi >= 0.0 && pi < self.pi_m) {
            return Err(Error::domain("revenue", pi, 0.0, self.pi_m));
        }
        let p = self.price_for_revenue_clamped(pi);
        let h = 1e-6 * self.p_m.min(self.p_m - p).max(1e-9 * self.p_m);
        let lo = (p - h).max(0.0);
        let hi = p + h;
        let dv_dp = (self.v_prime_at_price(hi) - self.v_prime_at_price(lo)) / (hi - lo);
        Ok(dv_dp / self.demand.marginal_revenue(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn linear() -> DemandCurve {
        make_demand(DemandFamily::Linear, &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn linear_choke_price() {
        assert_eq!(linear().choke_price(), 1.0);
    }

    #[test]
    fn increasing_demand_rejected() {
        assert!(matches!(
            make_demand(DemandFamily::Linear, &[1.0, -1.0]),
            Err(Error::InvalidDemand(_))
        ));
    }

    #[test]
    fn bad_parameter_counts_and_values_rejected() {
        assert!(make_demand(DemandFamily::Linear, &[1.0]).is_err());
        assert!(make_demand(DemandFamily::Quadratic, &[f64::NAN, 1.0]).is_err());
        assert!(make_demand(DemandFamily::TruncatedIsoelastic, &[1.0, 0.0]).is_err());
        assert!(make_demand(DemandFamily::TruncatedIsoelastic, &[f64::INFINITY, 1.0]).is_err());
    }

    #[test]
    fn linear_elasticity_is_strictly_increasing() {
        // p/(1-p) has derivative 1/(1-p)^2 > 0.
        let d = linear();
        let es: Vec<f64> = interior_grid(0.0, 1.0, 50).map(|p| d.elasticity(p)).collect();
        assert!(es.windows(2).all(|w| w[1] > w[0]));
        assert_relative_eq!(d.elasticity(0.25), 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn revenue_examples() {
        let d = linear();
        assert_eq!(d.revenue(0.0).unwrap(), 0.0);
        assert_eq!(d.revenue(0.5).unwrap(), 0.25);
        assert_eq!(d.revenue(1.0).unwrap(), 0.0);
        assert!(matches!(d.revenue(1.5), Err(Error::Domain { .. })));
        assert!(d.revenue(-0.1).is_err());
    }

    #[test]
    fn monopoly_points() {
        let (p, pi) = linear().monopoly_point().unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pi, 0.25, epsilon = 1e-12);
        let q = make_demand(DemandFamily::Quadratic, &[1.0, 1.0]).unwrap();
        let (p, pi) = q.monopoly_point().unwrap();
        assert_abs_diff_eq!(p, 1.0 / libm::sqrt(3.0), epsilon = 1e-12);
        assert_abs_diff_eq!(pi, 0.384_900_179_459_750_5, epsilon = 1e-12);
        let iso = make_demand(DemandFamily::TruncatedIsoelastic, &[2.0, 0.5]).unwrap();
        let (p, _) = iso.monopoly_point().unwrap();
        assert_abs_diff_eq!(p, 2.0 / 1.5, epsilon = 1e-12);
    }

    #[test]
    fn surplus_examples() {
        let d = linear();
        assert_abs_diff_eq!(d.surplus_at_price(0.0).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d.surplus_at_price(0.5).unwrap(), 0.125, epsilon = 1e-14);
        assert_eq!(d.surplus_at_price(1.0).unwrap(), 0.0);
        assert!(d.surplus_at_price(1.01).is_err());
    }

    #[test]
    fn v_examples() {
        let m = SurplusMap::new(linear()).unwrap();
        assert_eq!(m.v_of_pi(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(m.v_of_pi(0.25).unwrap(), 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(m.v_of_pi(0.1875).unwrap(), 0.28125, epsilon = 1e-12);
        assert!(m.v_of_pi(0.3).is_err());
        assert_abs_diff_eq!(m.v_prime(0.0).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.v_prime(0.1875).unwrap(), -1.5, epsilon = 1e-10);
        assert!(m.v_prime(0.25).is_err());
    }

    #[test]
    fn v_second_matches_closed_form_for_linear() {
        // v'(p) = -(1-p)/(1-2p); dv'/dp = -1/(1-2p)^2; dπ/dp = 1-2p.
        let m = SurplusMap::new(linear()).unwrap();
        let p: f64 = 0.25;
        let expected = -1.0 / libm::pow(1.0 - 2.0 * p, 3.0);
        assert_relative_eq!(m.v_second(0.1875).unwrap(), expected, max_relative = 1e-6);
    }

    #[test]
    fn surplus_at_zero_matches_v_at_zero() {
        for (fam, params) in [
            (DemandFamily::Linear, [2.0, 3.0]),
            (DemandFamily::Quadratic, [1.0, 2.0]),
            (DemandFamily::TruncatedIsoelastic, [1.5, 0.7]),
        ] {
            let d = make_demand(fam, &params).unwrap();
            let m = SurplusMap::new(d.clone()).unwrap();
            assert_eq!(d.surplus_at_price(0.0).unwrap(), m.v_of_pi(0.0).unwrap());
        }
    }
}
