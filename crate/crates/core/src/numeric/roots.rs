use alloc::format;

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;

/// Bracketed bisection–secant hybrid.
///
/// `f(lo)` and `f(hi)` must differ in sign (a zero at either end is returned
/// directly). A secant step is taken whenever it lands inside the bracket and
/// the bracket has at least halved over the previous two steps; otherwise the
/// step is a bisection. Terminates when the bracket is narrower than `xtol`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::SolveFailure(format!(
            "root not bracketed on [{a}, {b}]: f = ({fa}, {fb})"
        )));
    }
    let mut width_two_ago = f64::INFINITY;
    let mut width_prev = b - a;
    for _ in 0..MAX_ITER {
        let width = b - a;
        if width <= xtol {
            break;
        }
        let mid = 0.5 * (a + b);
        if !(a < mid && mid < b) {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let use_secant =
            secant.is_finite() && secant > a && secant < b && width <= 0.5 * width_two_ago;
        let mut x = if use_secant { secant } else { mid };
        // Keep secant probes off the bracket ends so the bracket keeps shrinking.
        let guard = 0.25 * xtol;
        if use_secant {
            x = x.clamp(a + guard, b - guard);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(Error::SolveFailure(format!("non-finite function value at {x}")));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        width_two_ago = width_prev;
        width_prev = width;
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Walks `points` left to right and returns the first adjacent pair on which
/// `f` changes sign (or the point where it vanishes, twice).
pub fn scan_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    points: impl IntoIterator<Item = f64>,
) -> Option<(f64, f64)> {
    let mut prev: Option<(f64, f64)> = None;
    for x in points {
        let fx = f(x);
        if fx == 0.0 {
            return Some((x, x));
        }
        if let Some((px, pf)) = prev {
            if pf.signum() != fx.signum() {
                return Some((px, x));
            }
        }
        prev = Some((x, fx));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_sqrt_two() {
        let r = find_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(r, libm::sqrt(2.0), epsilon = 1e-13);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(matches!(
            find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::SolveFailure(_))
        ));
    }

    #[test]
    fn tolerates_flat_tails() {
        // Highly asymmetric function where pure secant crawls.
        let r = find_root(|x| libm::pow(x, 9.0) - 1e-9, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(r, libm::pow(1e-9, 1.0 / 9.0), epsilon = 1e-12);
    }

    #[test]
    fn scan_finds_first_sign_change() {
        let b = scan_bracket(|x| x - 0.35, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert_eq!(b, (0.3, 0.4));
        assert!(scan_bracket(|x| x + 1.0, [0.0, 1.0]).is_none());
    }
}
