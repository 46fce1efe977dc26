//! Independent numerical oracles for the closed-form scalar quantities.
//!
//! These locate the selfish split and the social optimum by direct search on
//! the delay functions, never through the closed-form expressions.

use crate::model::OnRamp;
use crate::Scalar;

/// Root of `J1s(x) - J1b(x)` on `[0, 1]` by bisection, or `None` when the
/// difference does not change sign there.
pub fn bisect_selfish_split<T: Scalar>(ramp: &OnRamp<T>, tol: T) -> Option<T> {
    let gap = |x: T| {
        let j = ramp.delays_affine(x);
        j.j1s - j.j1b
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    let (g_lo, g_hi) = (gap(lo), gap(hi));
    if g_lo == T::zero() {
        return Some(lo);
    }
    if g_hi == T::zero() {
        return Some(hi);
    }
    if (g_lo > T::zero()) == (g_hi > T::zero()) {
        return None;
    }
    let half = T::lit(0.5);
    while hi - lo > tol {
        let mid = (lo + hi) * half;
        let g = gap(mid);
        if g == T::zero() {
            return Some(mid);
        }
        if (g > T::zero()) == (g_lo > T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * half)
}

/// Minimizes the social delay over an evenly spaced grid on `[lo, hi]`.
/// Returns the grid minimizer and its value.
pub fn grid_minimize_social_delay<T: Scalar>(ramp: &OnRamp<T>, lo: T, hi: T, step: T) -> (T, T) {
    let n = ((hi - lo) / step).round().to_usize().unwrap_or(0);
    let mut best = (lo, ramp.social_delay(lo));
    for i in 1..=n {
        let x = (lo + T::from_usize(i).unwrap() * step).min(hi);
        let v = ramp.social_delay(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}
