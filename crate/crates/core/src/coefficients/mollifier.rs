//! Nonnegative bumps supported in `[1, 2]` with unit mass.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_checked, QuadratureRule, DEFAULT_NODES};
use crate::scalar::Real;

/// Step for central differences when a shape has no analytic derivative.
const FD_STEP: f64 = 1e-6;

/// Tolerance on the unit-mass normalization.
const MASS_TOL: f64 = 1e-10;

/// Shape of the bump on `[1, 2]`.
#[derive(Clone)]
pub enum BumpShape<T> {
    /// `30 (s − 1)² (2 − s)²`.
    PolyBump,
    /// `c · exp(−1 / ((s − 1)(2 − s)))`, normalized numerically.
    ExpBump,
    /// User-supplied shape; derivative by central differences.
    Custom {
        name: String,
        f: Arc<dyn Fn(T) -> T + Send + Sync>,
    },
}

impl<T> fmt::Debug for BumpShape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PolyBump => f.write_str("PolyBump"),
            Self::ExpBump => f.write_str("ExpBump"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl<T: Real> BumpShape<T> {
    pub fn name(&self) -> &str {
        match self {
            Self::PolyBump => "poly_bump",
            Self::ExpBump => "exp_bump",
            Self::Custom { name, .. } => name,
        }
    }

    /// Looks up a built-in shape by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "poly_bump" => Ok(Self::PolyBump),
            "exp_bump" => Ok(Self::ExpBump),
            other => Err(Error::Config(format!("unknown mollifier '{other}'"))),
        }
    }

    fn raw(&self, s: T) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        if !(s > one && s < two) {
            return T::zero();
        }
        match self {
            Self::PolyBump => {
                let p = (s - one) * (two - s);
                T::lit(30.0) * p * p
            }
            Self::ExpBump => (-one / ((s - one) * (two - s))).exp(),
            Self::Custom { f, .. } => f(s),
        }
    }

    fn raw_derivative(&self, s: T) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        match self {
            Self::PolyBump | Self::ExpBump if !(s > one && s < two) => T::zero(),
            Self::PolyBump => T::lit(60.0) * (s - one) * (two - s) * (T::lit(3.0) - two * s),
            Self::ExpBump => {
                let g = (s - one) * (two - s);
                self.raw(s) * (T::lit(3.0) - two * s) / (g * g)
            }
            Self::Custom { .. } => {
                let h = T::lit(FD_STEP);
                (self.raw(s + h) - self.raw(s - h)) / (h + h)
            }
        }
    }
}

/// A normalized bump with its quadrature rule and moments.
#[derive(Debug, Clone)]
pub struct Mollifier<T> {
    shape: BumpShape<T>,
    scale: T,
    rule: QuadratureRule<T>,
    psi_nodes: Vec<T>,
    dpsi_nodes: Vec<T>,
    /// `∫ψ`
    pub moment_psi: T,
    /// `∫ s ψ(s) ds`
    pub moment_s_psi: T,
    /// `∫₁² |s ψ′(s)| ds`
    pub moment_abs_s_dpsi: T,
}

impl<T: Real> Mollifier<T> {
    /// The default polynomial bump.
    pub fn poly_bump() -> Self {
        Self::new(BumpShape::PolyBump).expect("polynomial bump is well formed")
    }

    pub fn new(shape: BumpShape<T>) -> Result<Self> {
        Self::with_nodes(shape, DEFAULT_NODES)
    }

    /// Builds the mollifier with `nodes` convolution quadrature points.
    pub fn with_nodes(shape: BumpShape<T>, nodes: usize) -> Result<Self> {
        let (one, two) = (T::one(), T::lit(2.0));
        let scale = match shape {
            BumpShape::ExpBump => one / integrate_checked(|s| shape.raw(s), one, two, DEFAULT_NODES)?,
            _ => one,
        };
        let rule = QuadratureRule::composite(one, two, nodes);
        let psi_nodes = rule.nodes.iter().map(|&s| scale * shape.raw(s)).collect();
        let dpsi_nodes = rule.nodes.iter().map(|&s| scale * shape.raw_derivative(s)).collect();
        let mut m = Self {
            shape,
            scale,
            rule,
            psi_nodes,
            dpsi_nodes,
            moment_psi: T::zero(),
            moment_s_psi: T::zero(),
            moment_abs_s_dpsi: T::zero(),
        };
        for i in 0..=256 {
            let s = one + T::count(i) / T::lit(256.0);
            if m.value(s) < T::zero() {
                return Err(Error::Config(format!("mollifier '{}' is negative at s = {}", m.name(), s)));
            }
        }
        let (mass, first, abs_deriv) = mollifier_moments(&m, DEFAULT_NODES)?;
        if (mass - one).abs() > T::lit(MASS_TOL).max(T::epsilon() * T::lit(64.0)) {
            return Err(Error::Config(format!("mollifier '{}' has mass {} != 1", m.name(), mass)));
        }
        m.moment_psi = mass;
        m.moment_s_psi = first;
        m.moment_abs_s_dpsi = abs_deriv;
        Ok(m)
    }

    pub fn name(&self) -> &str {
        self.shape.name()
    }

    pub fn shape(&self) -> &BumpShape<T> {
        &self.shape
    }

    /// `ψ(s)`; zero outside `[1, 2]`.
    pub fn value(&self, s: T) -> T {
        self.scale * self.shape.raw(s)
    }

    pub fn derivative(&self, s: T) -> T {
        self.scale * self.shape.raw_derivative(s)
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.rule.len()
    }

    /// `∫₁² g(s) ψ(s) ds` on the stored rule.
    pub fn convolve<F: FnMut(T) -> T>(&self, mut g: F) -> T {
        let mut acc = T::zero();
        for ((s, w), p) in self.rule.nodes.iter().zip(&self.rule.weights).zip(&self.psi_nodes) {
            acc += *w * *p * g(*s);
        }
        acc
    }

    /// `∫₁² g(s) ψ′(s) ds` on the stored rule.
    pub fn convolve_derivative<F: FnMut(T) -> T>(&self, mut g: F) -> T {
        let mut acc = T::zero();
        for ((s, w), p) in self.rule.nodes.iter().zip(&self.rule.weights).zip(&self.dpsi_nodes) {
            acc += *w * *p * g(*s);
        }
        acc
    }
}

/// `(∫ψ, ∫ s ψ, ∫₁² |s ψ′|)` by composite Gauss–Legendre with one refinement check.
pub fn mollifier_moments<T: Real>(psi: &Mollifier<T>, quad_points: usize) -> Result<(T, T, T)> {
    if quad_points < 64 {
        return Err(Error::Precondition(format!("need at least 64 quadrature points, got {quad_points}")));
    }
    let (one, two) = (T::one(), T::lit(2.0));
    let mass = integrate_checked(|s| psi.value(s), one, two, quad_points)?;
    let first = integrate_checked(|s| s * psi.value(s), one, two, quad_points)?;
    let abs_deriv = integrate_checked(|s| (s * psi.derivative(s)).abs(), one, two, quad_points)?;
    Ok((mass, first, abs_deriv))
}
