//! Time-dependent propagation speeds `a(t)` and their mollified square roots.
//!
//! A [`CoefficientSpec`] couples a parametric family with certified bounds
//! `a_inf ≤ a(t) ≤ a_sup` and `b0 ≤ √a(t)` on `[0, T]`. Outside `[0, T]` the
//! coefficient is extended by its endpoint values so that the backward
//! convolution window `[t − 2ε, t − ε]` is always defined.

mod mollifier;
mod seminorm;

pub use mollifier::{mollifier_moments, BumpShape, Mollifier};
pub use seminorm::{ll_constant, ll_seminorm_estimate, nested_grid, sqrt_ll_constant, LogModulus};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of grid points used to sanity-check certified bounds.
const BOUND_CHECK_POINTS: usize = 4097;

/// Parametric coefficient families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum CoefficientFamily<T> {
    Constant {
        a: T,
    },
    /// Linear interpolation through `(t, a)` knots, clamped beyond the end knots.
    PiecewiseLinear {
        knots: Vec<[T; 2]>,
    },
    /// `a_c + κ g(|t − t0|)` with `g(r) = r(1 − ln r)` for `r ≤ 1/e`, continued linearly (C¹) beyond.
    LoglipCusp {
        a_c: T,
        kappa: T,
        t0: T,
    },
    /// `a_c + κ |t − t0|^α`.
    HoelderCusp {
        a_c: T,
        kappa: T,
        alpha: T,
        t0: T,
    },
    /// `a_c + κ |t − t0|^α sin²(|t − t0|^{−β})`.
    OscillatoryHoelder {
        a_c: T,
        kappa: T,
        alpha: T,
        beta: T,
        t0: T,
    },
    /// Linear interpolation of samples at ascending `times`.
    CustomSampled {
        times: Vec<T>,
        values: Vec<T>,
    },
}

impl<T: Real> CoefficientFamily<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::PiecewiseLinear { .. } => "piecewise_linear",
            Self::LoglipCusp { .. } => "loglip_cusp",
            Self::HoelderCusp { .. } => "hoelder_cusp",
            Self::OscillatoryHoelder { .. } => "oscillatory_hoelder",
            Self::CustomSampled { .. } => "custom_sampled",
        }
    }

    /// Hölder exponent of the family, when it has one.
    pub fn hoelder_alpha(&self) -> Option<T> {
        match self {
            Self::HoelderCusp { alpha, .. } | Self::OscillatoryHoelder { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    fn eval_raw(&self, t: T) -> T {
        match self {
            Self::Constant { a } => *a,
            Self::PiecewiseLinear { knots } => {
                interp(knots.iter().map(|k| k[0]), knots.iter().map(|k| k[1]), knots.len(), t)
            }
            Self::LoglipCusp { a_c, kappa, t0 } => *a_c + *kappa * loglip_profile((t - *t0).abs()),
            Self::HoelderCusp { a_c, kappa, alpha, t0 } => {
                *a_c + *kappa * (t - *t0).abs().powf(*alpha)
            }
            Self::OscillatoryHoelder { a_c, kappa, alpha, beta, t0 } => {
                let r = (t - *t0).abs();
                if r == T::zero() {
                    *a_c
                } else {
                    let s = r.powf(-*beta).sin();
                    *a_c + *kappa * r.powf(*alpha) * s * s
                }
            }
            Self::CustomSampled { times, values } => {
                interp(times.iter().copied(), values.iter().copied(), times.len(), t)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("{}: {}", self.name(), msg)));
        let finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        match self {
            Self::Constant { a } => {
                if !(a.is_finite() && *a > T::zero()) {
                    return bad("a must be positive");
                }
            }
            Self::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return bad("at least one knot required");
                }
                if knots.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return bad("knot times must be strictly increasing");
                }
                if knots.iter().any(|k| !finite(k) || k[1] <= T::zero()) {
                    return bad("knot values must be finite and positive");
                }
            }
            Self::LoglipCusp { a_c, kappa, t0 } => {
                if !finite(&[*a_c, *kappa, *t0]) || *a_c <= T::zero() || *kappa < T::zero() {
                    return bad("need a_c > 0 and kappa >= 0");
                }
            }
            Self::HoelderCusp { a_c, kappa, alpha, t0 } => {
                if !finite(&[*a_c, *kappa, *alpha, *t0]) || *a_c <= T::zero() || *kappa < T::zero() {
                    return bad("need a_c > 0 and kappa >= 0");
                }
                if !(*alpha > T::zero() && *alpha < T::one()) {
                    return bad("alpha must lie in (0, 1)");
                }
            }
            Self::OscillatoryHoelder { a_c, kappa, alpha, beta, t0 } => {
                if !finite(&[*a_c, *kappa, *alpha, *beta, *t0])
                    || *a_c <= T::zero()
                    || *kappa < T::zero()
                    || *beta <= T::zero()
                {
                    return bad("need a_c > 0, kappa >= 0, beta > 0");
                }
                if !(*alpha > T::zero() && *alpha < T::one()) {
                    return bad("alpha must lie in (0, 1)");
                }
            }
            Self::CustomSampled { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return bad("times and values must be non-empty and of equal length");
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("sample times must be strictly increasing");
                }
                if !finite(times) || values.iter().any(|v| !v.is_finite() || *v <= T::zero()) {
                    return bad("samples must be finite and positive");
                }
            }
        }
        Ok(())
    }
}

/// `r(1 − ln r)` on `[0, 1/e]`, continued with matching value and slope.
fn loglip_profile<T: Real>(r: T) -> T {
    let r_star = (-T::one()).exp();
    if r == T::zero() {
        T::zero()
    } else if r <= r_star {
        r * (T::one() - r.ln())
    } else {
        // g(1/e) = 2/e and g'(1/e) = 1
        r + r_star
    }
}

fn interp<T: Real>(
    xs: impl Iterator<Item = T> + Clone,
    ys: impl Iterator<Item = T> + Clone,
    n: usize,
    t: T,
) -> T {
    let mut prev: Option<(T, T)> = None;
    for (x, y) in xs.zip(ys) {
        if t <= x {
            return match prev {
                None => y,
                Some((x0, y0)) => y0 + (y - y0) * (t - x0) / (x - x0),
            };
        }
        prev = Some((x, y));
    }
    debug_assert!(n > 0);
    prev.map(|p| p.1).unwrap_or_else(T::zero)
}

/// A coefficient family together with its certified bounds on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec<T>", into = "RawSpec<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct CoefficientSpec<T> {
    family: CoefficientFamily<T>,
    t_final: T,
    a_inf: T,
    b0: T,
    a_sup: T,
}

#[derive(Serialize, Deserialize)]
struct RawSpec<T> {
    #[serde(flatten)]
    family: CoefficientFamily<T>,
    #[serde(rename = "T")]
    t_final: T,
    a_inf: T,
    b0: T,
    a_sup: T,
}

impl<T: Real> TryFrom<RawSpec<T>> for CoefficientSpec<T> {
    type Error = Error;
    fn try_from(raw: RawSpec<T>) -> Result<Self> {
        Self::new(raw.family, raw.t_final, raw.a_inf, raw.b0, raw.a_sup)
    }
}

impl<T: Real> From<CoefficientSpec<T>> for RawSpec<T> {
    fn from(s: CoefficientSpec<T>) -> Self {
        RawSpec { family: s.family, t_final: s.t_final, a_inf: s.a_inf, b0: s.b0, a_sup: s.a_sup }
    }
}

impl<T: Real> CoefficientSpec<T> {
    /// Validates parameters and checks the supplied bounds on a dense grid.
    pub fn new(family: CoefficientFamily<T>, t_final: T, a_inf: T, b0: T, a_sup: T) -> Result<Self> {
        family.validate()?;
        if !(t_final.is_finite() && t_final > T::zero()) {
            return Err(Error::Config("T must be positive".into()));
        }
        if !(a_inf.is_finite() && a_inf > T::zero()) {
            return Err(Error::Config("a_inf must be positive".into()));
        }
        if !(b0.is_finite() && b0 > T::zero()) {
            return Err(Error::Config("b0 must be positive".into()));
        }
        let slack = T::one() + T::epsilon() * T::lit(8.0);
        if b0 * b0 > a_inf * slack {
            return Err(Error::Config("b0^2 must not exceed a_inf".into()));
        }
        if !(a_sup.is_finite() && a_sup >= a_inf) {
            return Err(Error::Config("a_sup must be finite and >= a_inf".into()));
        }
        let spec = Self { family, t_final, a_inf, b0, a_sup };
        let last = T::count(BOUND_CHECK_POINTS - 1);
        for i in 0..BOUND_CHECK_POINTS {
            let t = t_final * T::count(i) / last;
            let a = spec.family.eval_raw(t);
            if !(a >= a_inf) {
                return Err(Error::Config(format!("a({}) = {} is below a_inf = {}", t, a, a_inf)));
            }
            if a > a_sup * slack {
                return Err(Error::Config(format!("a({}) = {} exceeds a_sup = {}", t, a, a_sup)));
            }
        }
        Ok(spec)
    }

    pub fn constant(a: T, t_final: T) -> Result<Self> {
        Self::new(CoefficientFamily::Constant { a }, t_final, a, a.sqrt(), a)
    }

    /// Log-Lipschitz cusp with its exact extrema (minimum at `t0`, maximum at the farther endpoint).
    pub fn loglip_cusp(a_c: T, kappa: T, t0: T, t_final: T) -> Result<Self> {
        let r_max = t0.abs().max((t_final - t0).abs());
        let a_sup = a_c + kappa * loglip_profile(r_max);
        let a_inf = a_c + kappa * loglip_profile(dist_to_interval(t0, t_final));
        Self::new(CoefficientFamily::LoglipCusp { a_c, kappa, t0 }, t_final, a_inf, a_inf.sqrt(), a_sup)
    }

    pub fn hoelder_cusp(a_c: T, kappa: T, alpha: T, t0: T, t_final: T) -> Result<Self> {
        let r_max = t0.abs().max((t_final - t0).abs());
        let a_sup = a_c + kappa * r_max.powf(alpha);
        let a_inf = a_c + kappa * dist_to_interval(t0, t_final).powf(alpha);
        Self::new(
            CoefficientFamily::HoelderCusp { a_c, kappa, alpha, t0 },
            t_final,
            a_inf,
            a_inf.sqrt(),
            a_sup,
        )
    }

    /// Oscillatory Hölder family; bounds are `a_c` and `a_c + κ r_max^α`.
    pub fn oscillatory_hoelder(a_c: T, kappa: T, alpha: T, beta: T, t0: T, t_final: T) -> Result<Self> {
        let r_max = t0.abs().max((t_final - t0).abs());
        Self::new(
            CoefficientFamily::OscillatoryHoelder { a_c, kappa, alpha, beta, t0 },
            t_final,
            a_c,
            a_c.sqrt(),
            a_c + kappa * r_max.powf(alpha),
        )
    }

    /// Piecewise-linear coefficient; extrema over `[0, T]` are attained at knots or endpoints.
    pub fn piecewise_linear(knots: Vec<[T; 2]>, t_final: T) -> Result<Self> {
        let family = CoefficientFamily::PiecewiseLinear { knots };
        family.validate()?;
        let (lo, hi) = piecewise_extrema(&family, t_final);
        Self::new(family, t_final, lo, lo.sqrt(), hi)
    }

    pub fn custom_sampled(times: Vec<T>, values: Vec<T>, t_final: T) -> Result<Self> {
        let family = CoefficientFamily::CustomSampled { times, values };
        family.validate()?;
        let (lo, hi) = piecewise_extrema(&family, t_final);
        Self::new(family, t_final, lo, lo.sqrt(), hi)
    }

    pub fn family(&self) -> &CoefficientFamily<T> {
        &self.family
    }

    pub fn t_final(&self) -> T {
        self.t_final
    }

    pub fn a_inf(&self) -> T {
        self.a_inf
    }

    pub fn b0(&self) -> T {
        self.b0
    }

    pub fn a_sup(&self) -> T {
        self.a_sup
    }

    /// Same coefficient with a smaller certified `b0` (used by `b0` sweeps).
    pub fn with_b0(&self, b0: T) -> Result<Self> {
        Self::new(self.family.clone(), self.t_final, self.a_inf, b0, self.a_sup)
    }

    /// Evaluates `a(t)`, clamping `t` to `[0, T]`.
    #[inline]
    pub fn eval(&self, t: T) -> T {
        self.family.eval_raw(t.max(T::zero()).min(self.t_final))
    }
}

fn dist_to_interval<T: Real>(t0: T, t_final: T) -> T {
    if t0 < T::zero() {
        -t0
    } else if t0 > t_final {
        t0 - t_final
    } else {
        T::zero()
    }
}

fn piecewise_extrema<T: Real>(family: &CoefficientFamily<T>, t_final: T) -> (T, T) {
    let ts: Vec<T> = match family {
        CoefficientFamily::PiecewiseLinear { knots } => knots.iter().map(|k| k[0]).collect(),
        CoefficientFamily::CustomSampled { times, .. } => times.clone(),
        _ => Vec::new(),
    };
    let candidates = ts
        .into_iter()
        .filter(|t| *t > T::zero() && *t < t_final)
        .chain([T::zero(), t_final]);
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for t in candidates {
        let a = family.eval_raw(t);
        lo = lo.min(a);
        hi = hi.max(a);
    }
    (lo, hi)
}

/// `a(t)` with constant extension outside `[0, T]`.
pub fn eval_coefficient<T: Real>(spec: &CoefficientSpec<T>, t: T) -> T {
    spec.eval(t)
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if !(eps > T::zero() && eps < T::lit(0.25)) {
        return Err(Error::Precondition(format!("mollification width {} outside (0, 1/4)", eps)));
    }
    Ok(())
}

/// `λ₂(t) = ∫₁² √a(t − εs) ψ(s) ds`.
pub fn mollify_sqrt<T: Real>(spec: &CoefficientSpec<T>, psi: &Mollifier<T>, eps: T, t: T) -> Result<T> {
    check_eps(eps)?;
    Ok(psi.convolve(|s| spec.eval(t - eps * s).sqrt()))
}

/// `λ₂′(t) = ε⁻¹ ∫₁² √a(t − εs) ψ′(s) ds`.
pub fn mollify_sqrt_derivative<T: Real>(
    spec: &CoefficientSpec<T>,
    psi: &Mollifier<T>,
    eps: T,
    t: T,
) -> Result<T> {
    check_eps(eps)?;
    Ok(psi.convolve_derivative(|s| spec.eval(t - eps * s).sqrt()) / eps)
}
