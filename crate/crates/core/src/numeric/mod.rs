//! Quadrature, bracketed root finding and summation helpers.

mod quad;
mod roots;

pub use quad::{adaptive_simpson, adaptive_simpson_split, GaussLegendre};
pub use roots::{find_root, scan_bracket};

/// Pairwise (cascade) summation. The result depends only on the order of
/// `xs`, which keeps aggregated Monte Carlo estimates reproducible.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `count` evenly spaced points strictly inside `(a, b)`.
pub(crate) fn interior_grid(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    let step = (b - a) / (count as f64 + 1.0);
    (1..=count).map(move |i| a + step * i as f64)
}

/// `count` evenly spaced points covering `[a, b]` including both ends.
pub(crate) fn closed_grid(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    let last = count.max(2) - 1;
    let step = (b - a) / last as f64;
    (0..=last).map(move |i| if i == last { b } else { a + step * i as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn grids_hit_the_requested_ends() {
        let g: Vec<f64> = closed_grid(0.0, 1.0, 5).collect();
        assert_eq!(g, [0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Vec<f64> = interior_grid(0.0, 1.0, 3).collect();
        assert_eq!(g, [0.25, 0.5, 0.75]);
    }
}
