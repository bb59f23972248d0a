//! Brute-force estimates of Log-Lipschitz constants.

use rayon::prelude::*;

use super::CoefficientSpec;
use crate::scalar::Real;

/// Modulus of continuity used in the denominator of the difference quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogModulus<T> {
    /// `r (1 + |ln r|)`, non-degenerate at `r = 1`.
    Regularized,
    /// `r |ln r|`, restricted to separations `r ≤ max_sep < 1`.
    Local { max_sep: T },
}

/// First `n` points of a nested grid on `[lo, hi]`: both endpoints, then
/// the base-2 van der Corput sequence. Each grid is a prefix of the next,
/// so pair sets grow with `n`.
pub fn nested_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let mut pts = Vec::with_capacity(n);
    for k in 0..n {
        let u = match k {
            0 => 0.0,
            1 => 1.0,
            _ => radical_inverse((k - 1) as u64),
        };
        pts.push(lo + (hi - lo) * T::lit(u));
    }
    pts
}

fn radical_inverse(mut k: u64) -> f64 {
    let mut inv = 0.5;
    let mut acc = 0.0;
    while k > 0 {
        if k & 1 == 1 {
            acc += inv;
        }
        inv *= 0.5;
        k >>= 1;
    }
    acc
}

/// Sup of `|f(t) − f(s)| / modulus(|t − s|)` over all pairs of the nested grid.
pub fn ll_constant<T: Real, F>(f: F, lo: T, hi: T, grid_size: usize, modulus: LogModulus<T>) -> T
where
    F: Fn(T) -> T + Sync,
{
    let pts = nested_grid(lo, hi, grid_size.max(2));
    let vals: Vec<T> = pts.iter().map(|&t| f(t)).collect();
    (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut best = T::zero();
            for j in 0..i {
                let r = (pts[i] - pts[j]).abs();
                if r == T::zero() {
                    continue;
                }
                let denom = match modulus {
                    LogModulus::Regularized => r * (T::one() + r.ln().abs()),
                    LogModulus::Local { max_sep } => {
                        if r > max_sep {
                            continue;
                        }
                        r * r.ln().abs()
                    }
                };
                let q = (vals[i] - vals[j]).abs() / denom;
                if q > best {
                    best = q;
                }
            }
            best
        })
        .reduce(T::zero, |a, b| a.max(b))
}

/// Lower bound for the Log-Lipschitz seminorm of `a` on `[0, T]`.
pub fn ll_seminorm_estimate<T: Real>(spec: &CoefficientSpec<T>, grid_size: usize) -> T {
    ll_constant(|t| spec.eval(t), T::zero(), spec.t_final(), grid_size, LogModulus::Regularized)
}

/// Local Log-Lipschitz constant of `√a` for separations up to `max_sep`.
pub fn sqrt_ll_constant<T: Real>(spec: &CoefficientSpec<T>, grid_size: usize, max_sep: T) -> T {
    ll_constant(
        |t| spec.eval(t).sqrt(),
        T::zero(),
        spec.t_final(),
        grid_size,
        LogModulus::Local { max_sep },
    )
}
