//! Equal-profit offer distributions.
//!
//! Every mixed-strategy equilibrium in this crate has the same shape: a firm
//! posting offer `x` (a fee or a per-consumer revenue) sells to a mass
//! proportional to `share(F(x))`, and indifference across the support pins
//! `share(F(x))·x = share(1)·x̄`. Only the share function differs between
//! the shoppers/nonshoppers market and noisy search.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::noisy::NoisyParams;
use crate::numeric::find_root;
use crate::stahl::MarketParams;

/// Relative slack allowed when checking that a point lies in the support.
const SUPPORT_SLACK: f64 = 1e-12;

/// A CDF with compact support `[lower, upper]`. Outside the support `cdf`
/// returns 0 or 1.
pub trait SupportCdf {
    fn lower(&self) -> f64;
    fn upper(&self) -> f64;
    fn cdf(&self, x: f64) -> f64;
    /// Sample points at which the CDF is known exactly, for tabulated CDFs.
    fn knots(&self) -> Option<&[f64]> {
        None
    }
}

/// A [`SupportCdf`] that can also be sampled through its quantile function.
pub trait OfferLaw: SupportCdf {
    fn quantile(&self, u: f64) -> f64;
}

impl<T: SupportCdf + ?Sized> SupportCdf for &T {
    fn lower(&self) -> f64 {
        (**self).lower()
    }
    fn upper(&self) -> f64 {
        (**self).upper()
    }
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn knots(&self) -> Option<&[f64]> {
        (**self).knots()
    }
}

impl<T: OfferLaw + ?Sized> OfferLaw for &T {
    fn quantile(&self, u: f64) -> f64 {
        (**self).quantile(u)
    }
}

/// Who buys from a firm, as a function of the rank its offer attains.
#[derive(Debug, Clone, PartialEq)]
pub enum Clientele {
    /// `n` firms; a share `λ` of consumers sees every offer, the rest buy at
    /// the first firm they visit.
    Shoppers(MarketParams),
    /// Infinitely many firms; a consumer receives `k` offers with
    /// probability `μ(k)`.
    Noisy(NoisyParams),
}

impl Clientele {
    /// Sales weight of an offer beaten by a fraction `y` of rival offers:
    /// `(1−λ)/n + λ(1−y)^{n−1}` or `Σ k μ(k)(1−y)^{k−1}`.
    pub fn share(&self, y: f64) -> f64 {
        let keep = 1.0 - y;
        match self {
            Clientele::Shoppers(m) => {
                (1.0 - m.lambda()) / m.n() as f64 + m.lambda() * powi(keep, m.n() - 1)
            }
            Clientele::Noisy(p) => {
                // Horner in (1−y): Σ_k k μ(k) keep^{k−1}.
                p.mu()
                    .iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (i, mu)| acc * keep + (i + 1) as f64 * mu)
            }
        }
    }

    /// Sales weight at the top of the support, where the offer is beaten by
    /// every rival.
    pub fn captive_share(&self) -> f64 {
        match self {
            Clientele::Shoppers(m) => (1.0 - m.lambda()) / m.n() as f64,
            Clientele::Noisy(p) => p.mu()[0],
        }
    }

    /// `lower / upper` of any equilibrium support for this clientele.
    pub fn support_ratio(&self) -> f64 {
        self.captive_share() / self.share(0.0)
    }

    /// Solves `share(y)·x = captive_share·upper` for `y`, given the gap
    /// `upper − x`. Works with `share(y) − captive_share`, which has no
    /// cancellation as `x → upper`.
    fn rank_from_gap(&self, x: f64, gap: f64) -> f64 {
        let target = self.captive_share() * gap / x;
        match self {
            Clientele::Shoppers(m) => {
                let base = target / m.lambda();
                1.0 - libm::pow(base.max(0.0), 1.0 / (m.n() - 1) as f64)
            }
            Clientele::Noisy(p) => {
                // Σ_{k≥2} k μ(k) (1−y)^{k−1}, by Horner in (1−y).
                let excess = |y: f64| {
                    let keep = 1.0 - y;
                    p.mu()
                        .iter()
                        .enumerate()
                        .skip(1)
                        .rev()
                        .fold(0.0, |acc, (i, mu)| acc * keep + (i + 1) as f64 * mu)
                        * keep
                };
                if target >= excess(0.0) {
                    return 0.0;
                }
                if target <= 0.0 {
                    return 1.0;
                }
                find_root(|y| excess(y) - target, 0.0, 1.0, 1e-14).unwrap_or(1.0)
            }
        }
    }
}

fn powi(x: f64, k: u32) -> f64 {
    libm::pow(x, k as f64)
}

/// The equilibrium offer distribution for a clientele and an upper support
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct OfferDistribution {
    clientele: Clientele,
    lower: f64,
    upper: f64,
}

impl OfferDistribution {
    pub fn new(clientele: Clientele, upper: f64) -> Result<Self> {
        if !(upper.is_finite() && upper > 0.0) {
            return Err(Error::param("upper support", format!("{upper} must be finite and positive")));
        }
        let lower = upper * clientele.support_ratio();
        Ok(OfferDistribution {
            clientele,
            lower,
            upper,
        })
    }

    pub fn clientele(&self) -> &Clientele {
        &self.clientele
    }

    /// CDF on the support; errors outside it.
    pub fn cdf_checked(&self, x: f64) -> Result<f64> {
        let slack = SUPPORT_SLACK * self.upper;
        if !(x >= self.lower - slack && x <= self.upper + slack) {
            return Err(Error::domain("offer", x, self.lower, self.upper));
        }
        Ok(self.cdf(x))
    }

    /// `F(x)` given `gap = upper − x` computed independently, which keeps
    /// full relative accuracy in `1 − F` next to the top of the support.
    pub fn cdf_with_gap(&self, x: f64, gap: f64) -> f64 {
        if x <= self.lower {
            return 0.0;
        }
        if gap <= 0.0 {
            return 1.0;
        }
        self.clientele.rank_from_gap(x, gap).clamp(0.0, 1.0)
    }

    /// Equal-profit sales weight of offer `x`, i.e. `share(F(x))`.
    pub fn share_at(&self, x: f64) -> f64 {
        self.clientele.share(self.cdf(x))
    }
}

impl SupportCdf for OfferDistribution {
    fn lower(&self) -> f64 {
        self.lower
    }

    fn upper(&self) -> f64 {
        self.upper
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        self.clientele.rank_from_gap(x, self.upper - x).clamp(0.0, 1.0)
    }
}

impl OfferLaw for OfferDistribution {
    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lower;
        }
        if u >= 1.0 {
            return self.upper;
        }
        (self.clientele.captive_share() * self.upper / self.clientele.share(u))
            .clamp(self.lower, self.upper)
    }
}

/// A CDF sampled as `(x, F(x))` rows and linearly interpolated between them.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    cs: Vec<f64>,
}

impl TabulatedCdf {
    /// Rows must have strictly increasing `x` and nondecreasing `F` in `[0, 1]`.
    pub fn new(xs: Vec<f64>, cs: Vec<f64>) -> Result<Self> {
        if xs.len() != cs.len() || xs.len() < 2 {
            return Err(Error::param("cdf table", "needs at least two (x, cdf) rows"));
        }
        for (i, (&x, &c)) in xs.iter().zip(&cs).enumerate() {
            if !x.is_finite() {
                return Err(Error::param("cdf table", format!("row {i}: x is not finite")));
            }
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::param("cdf table", format!("row {i}: cdf {c} outside [0, 1]")));
            }
            if i > 0 && !(x > xs[i - 1]) {
                return Err(Error::param("cdf table", format!("row {i}: x not strictly increasing")));
            }
            if i > 0 && c < cs[i - 1] {
                return Err(Error::param("cdf table", format!("row {i}: cdf decreases")));
            }
        }
        Ok(TabulatedCdf { xs, cs })
    }

    /// Samples `law` at `rows` evenly spaced points of its support.
    pub fn sample<L: SupportCdf>(law: &L, rows: usize) -> Self {
        let (a, b) = (law.lower(), law.upper());
        let last = rows.max(2) - 1;
        let xs: Vec<f64> = (0..=last)
            .map(|i| if i == last { b } else { a + (b - a) * i as f64 / last as f64 })
            .collect();
        let cs = xs.iter().map(|&x| law.cdf(x)).collect();
        TabulatedCdf { xs, cs }
    }

    /// Every other row counted from the top, always keeping the first one.
    pub fn coarsened(&self) -> Self {
        let last = self.xs.len() - 1;
        let keep: Vec<usize> = (0..=last).filter(|i| (last - i).is_multiple_of(2) || *i == 0).collect();
        TabulatedCdf {
            xs: keep.iter().map(|&i| self.xs[i]).collect(),
            cs: keep.iter().map(|&i| self.cs[i]).collect(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.cs.iter().copied())
    }
}

impl SupportCdf for TabulatedCdf {
    fn lower(&self) -> f64 {
        self.xs[0]
    }

    fn upper(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    fn cdf(&self, x: f64) -> f64 {
        if x < self.xs[0] {
            return 0.0;
        }
        if x >= self.upper() {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (c0, c1) = (self.cs[i - 1], self.cs[i]);
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }

    fn knots(&self) -> Option<&[f64]> {
        Some(&self.xs)
    }
}

impl OfferLaw for TabulatedCdf {
    fn quantile(&self, u: f64) -> f64 {
        if u <= self.cs[0] {
            return self.xs[0];
        }
        let i = self.cs.partition_point(|&c| c < u);
        if i >= self.cs.len() {
            return self.upper();
        }
        let (c0, c1) = (self.cs[i - 1], self.cs[i]);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        if c1 == c0 {
            return x1;
        }
        x0 + (x1 - x0) * (u - c0) / (c1 - c0)
    }
}
