//! Composite Gauss–Legendre quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Points per panel of the composite rule.
pub const PANEL_ORDER: usize = 8;

/// Default total node count on the mollifier support.
pub const DEFAULT_NODES: usize = 256;

/// Tolerance on the difference between successive refinements.
pub const REFINEMENT_TOL: f64 = 1e-9;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); order];
    let mut weights = vec![T::zero(); order];
    let n = T::count(order);
    let one = T::one();
    let two = T::lit(2.0);
    for i in 0..(order + 1) / 2 {
        // Chebyshev-like initial guess for the i-th root.
        let mut x = (T::PI() * (T::count(i) + T::lit(0.75)) / (n + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (one, x);
            for k in 2..=order {
                let k = T::count(k);
                let p2 = ((two * k - one) * x * p1 - (k - one) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 1 { x } else { p1 };
            let pm1 = if order == 1 { one } else { p0 };
            dp = n * (x * p - pm1) / (x * x - one);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let w = two / ((one - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// A fixed composite rule on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Composite Gauss–Legendre on `[lo, hi]` with `total_nodes` nodes
    /// (rounded up to a multiple of [`PANEL_ORDER`]).
    pub fn composite(lo: T, hi: T, total_nodes: usize) -> Self {
        let panels = total_nodes.div_ceil(PANEL_ORDER).max(1);
        let (gx, gw) = gauss_legendre::<T>(PANEL_ORDER);
        let width = (hi - lo) / T::count(panels);
        let half = width * T::lit(0.5);
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let mid = lo + width * (T::count(p) + T::lit(0.5));
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + half * *x);
                weights.push(half * *w);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(*x);
        }
        acc
    }
}

/// Integrates `f` on `[lo, hi]` with `nodes` points and checks the result
/// against one doubling of the node count.
pub fn integrate_checked<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, nodes: usize) -> Result<T> {
    let coarse = QuadratureRule::composite(lo, hi, nodes).integrate(&f);
    let fine = QuadratureRule::composite(lo, hi, 2 * nodes).integrate(&f);
    let tol = T::lit(REFINEMENT_TOL).max(T::epsilon() * T::lit(64.0));
    if (fine - coarse).abs() > tol * T::one().max(fine.abs()) {
        return Err(Error::Numerical(format!(
            "quadrature did not converge: {} vs {} with {} nodes",
            coarse, fine, nodes
        )));
    }
    Ok(fine)
}
