use alloc::vec::Vec;
use core::f64::consts::PI;

const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute tolerance
/// `tol`. Recursion stops at depth 60; the Richardson-corrected panel value
/// is returned at every accepted leaf.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -adaptive_simpson(f, b, a, tol);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// Same as [`adaptive_simpson`] but integrates each piece between
/// consecutive `breaks` separately, with the tolerance shared evenly. Use it
/// to keep known kinks and endpoint singularities on panel boundaries.
pub fn adaptive_simpson_split<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> f64 {
    if breaks.len() < 2 {
        return 0.0;
    }
    let pieces = (breaks.len() - 1) as f64;
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], tol / pieces))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    // Panels narrower than the float grid cannot be refined further.
    if !(a < lm && lm < m && m < rm && rm < b) {
        return whole;
    }
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Gauss–Legendre rule of fixed order, used for composite integration on
/// meshes that are geometrically graded toward both endpoints.
///
/// This is deliberately a different rule family from the adaptive Simpson
/// solver quadrature so that the two can cross-check each other.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on `[-1, 1]` by Newton iteration on `P_order`.
    pub fn new(order: usize) -> Self {
        let order = order.max(1);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        let n = order as f64;
        for i in 0..order {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre(order, x);
                    dp = d;
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Single-panel rule on `[a, b]`.
    pub fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule on `[a, b]`: `layers` geometric panels (ratio
    /// `grading`) crowd each endpoint and `middle` uniform panels fill the
    /// rest. Integrable endpoint singularities converge geometrically.
    pub fn graded<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        layers: usize,
        grading: f64,
        middle: usize,
    ) -> f64 {
        if a == b {
            return 0.0;
        }
        let width = b - a;
        let edge = 0.25;
        let mut breaks: Vec<f64> = Vec::with_capacity(2 * layers + middle + 3);
        // Left cluster: a + width*edge*grading^k for k = layers..1.
        breaks.push(0.0);
        for k in (1..=layers).rev() {
            breaks.push(edge * libm::pow(grading, k as f64));
        }
        for j in 0..=middle {
            breaks.push(edge + (1.0 - 2.0 * edge) * j as f64 / middle.max(1) as f64);
        }
        for k in 1..=layers {
            breaks.push(1.0 - edge * libm::pow(grading, k as f64));
        }
        breaks.push(1.0);
        breaks
            .windows(2)
            .map(|w| (a + width * w[0], a + width * w[1]))
            .filter(|(lo, hi)| hi > lo)
            .map(|(lo, hi)| self.panel(&f, lo, hi))
            .sum()
    }
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = adaptive_simpson(|x| 1.0 - 3.0 * x * x + x * x * x, 0.0, 2.0, 1e-10);
        assert_abs_diff_eq!(v, 2.0 - 8.0 + 4.0, epsilon = 1e-14);
    }

    #[test]
    fn simpson_handles_reversed_and_empty_ranges() {
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-10), 0.0);
        assert_abs_diff_eq!(adaptive_simpson(|x| x, 1.0, 0.0, 1e-10), -0.5, epsilon = 1e-14);
    }

    #[test]
    fn simpson_refines_root_singularity() {
        // ∫₀¹ (1-x)^{1/9} dx = 9/10
        let v = adaptive_simpson(|x| libm::pow(1.0 - x, 1.0 / 9.0), 0.0, 1.0, 1e-10);
        assert_abs_diff_eq!(v, 0.9, epsilon = 1e-9);
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        for order in [1, 2, 5, 10, 16] {
            let g = GaussLegendre::new(order);
            let sum: f64 = g.weights.iter().sum();
            assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn gauss_is_exact_to_degree_2n_minus_1() {
        let g = GaussLegendre::new(5);
        let v = g.panel(&|x: f64| libm::pow(x, 9.0) + x * x, 0.0, 1.0);
        assert_abs_diff_eq!(v, 0.1 + 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn graded_gauss_handles_endpoint_singularities() {
        let g = GaussLegendre::new(16);
        // ∫₀¹ 1/sqrt(x) dx = 2
        let v = g.graded(|x| 1.0 / libm::sqrt(x), 0.0, 1.0, 60, 0.25, 8);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        // ∫₀¹ (1-x)^{1/9} dx = 9/10
        let v = g.graded(|x| libm::pow(1.0 - x, 1.0 / 9.0), 0.0, 1.0, 40, 0.25, 8);
        assert_abs_diff_eq!(v, 0.9, epsilon = 1e-12);
    }
}
