//! Per-frequency evolution `∂ₜV = iλ A(t) V` with `A = [[0, 1], [a(t), 0]]`.
//!
//! `V = (iλ v̂, ∂ₜv̂)` for one mode `v̂'' + a(t) λ² v̂ = 0`. Time stepping is
//! classical RK4 on a uniform grid `t_k = k T / n`.

use std::io::Write;
use std::ops::{Add, Mul};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSpec;
use crate::error::{Error, Result};
use crate::linalg::complex_op_norm;
use crate::scalar::Real;
use crate::spectrum::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState<T> {
    /// `iλ v̂`
    pub v1: Complex<T>,
    /// `∂ₜv̂`
    pub v2: Complex<T>,
}

impl<T: Real> ModeState<T> {
    pub fn new(v1: Complex<T>, v2: Complex<T>) -> Self {
        Self { v1, v2 }
    }

    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self { v1: z, v2: z }
    }

    /// Builds `V(0)` from `(v̂₀, v̂₁)` at frequency `λ`.
    pub fn from_data(lambda: T, u0: Complex<T>, u1: Complex<T>) -> Self {
        Self { v1: Complex::new(T::zero(), lambda) * u0, v2: u1 }
    }

    /// Recovers `(v̂, ∂ₜv̂)`; requires `λ > 0`.
    pub fn to_data(&self, lambda: T) -> (Complex<T>, Complex<T>) {
        (self.v1 / Complex::new(T::zero(), lambda), self.v2)
    }

    pub fn norm_sqr(&self) -> T {
        self.v1.norm_sqr() + self.v2.norm_sqr()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.v1.re.is_finite() && self.v1.im.is_finite() && self.v2.re.is_finite() && self.v2.im.is_finite()
    }
}

impl<T: Real> Add for ModeState<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v1: self.v1 + o.v1, v2: self.v2 + o.v2 }
    }
}

impl<T: Real> Mul<T> for ModeState<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self { v1: self.v1 * k, v2: self.v2 * k }
    }
}

impl<T: Real> Mul<Complex<T>> for ModeState<T> {
    type Output = Self;
    fn mul(self, k: Complex<T>) -> Self {
        Self { v1: self.v1 * k, v2: self.v2 * k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
}

fn default_cfl<T: Real>() -> T {
    T::lit(0.1)
}

fn default_store_every() -> usize {
    1
}

fn default_report_samples() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct IntegratorConfig<T> {
    #[serde(default = "default_method")]
    pub method: Method,
    pub dt_max: T,
    #[serde(default = "default_cfl")]
    pub cfl_c: T,
    #[serde(default = "default_store_every")]
    pub store_every: usize,
    /// Common output grid size for multi-mode reports.
    #[serde(default = "default_report_samples")]
    pub report_samples: usize,
}

fn default_method() -> Method {
    Method::Rk4
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            dt_max: T::lit(1e-3),
            cfl_c: default_cfl(),
            store_every: 1,
            report_samples: default_report_samples(),
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_dt(dt_max: T) -> Self {
        Self { dt_max, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max.is_finite() && self.dt_max > T::zero()) {
            return Err(Error::Config("dt_max must be positive".into()));
        }
        if !(self.cfl_c.is_finite() && self.cfl_c > T::zero()) {
            return Err(Error::Config("cfl_c must be positive".into()));
        }
        if self.store_every == 0 || self.report_samples == 0 {
            return Err(Error::Config("store_every and report_samples must be at least 1".into()));
        }
        Ok(())
    }

    /// `min(dt_max, cfl_c / (λ √a_sup))`.
    pub fn target_dt(&self, lambda: T, a_sup: T) -> T {
        let cfl = self.cfl_c / (lambda * a_sup.sqrt());
        self.dt_max.min(cfl)
    }

    /// Number of uniform steps on `[0, T]`, rounded up to a multiple of `multiple`.
    pub fn steps(&self, lambda: T, a_sup: T, t_final: T, multiple: usize) -> usize {
        let raw = (t_final / self.target_dt(lambda, a_sup)).ceil().to_usize().unwrap_or(usize::MAX).max(1);
        raw.div_ceil(multiple) * multiple
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<ModeState<T>>,
    pub lambda: T,
    pub dt_used: T,
    /// Largest `|V|` seen over every step, not just the stored samples.
    pub peak_norm: T,
}

impl<T: Real> ModeTrajectory<T> {
    pub fn initial(&self) -> &ModeState<T> {
        &self.states[0]
    }

    pub fn last(&self) -> &ModeState<T> {
        self.states.last().expect("trajectory is never empty")
    }

    /// `max_t |V(t)| / |V(0)|` over every step.
    pub fn amplification(&self) -> Result<T> {
        let v0 = self.initial().norm();
        if v0 == T::zero() {
            return Err(Error::UndefinedRatio);
        }
        Ok(self.peak_norm / v0)
    }

    /// Writes `t,re_V1,im_V1,re_V2,im_V2` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re_V1", "im_V1", "re_V2", "im_V2"])?;
        for (t, v) in self.times.iter().zip(&self.states) {
            w.write_record([fmt_num(*t), fmt_num(v.v1.re), fmt_num(v.v1.im), fmt_num(v.v2.re), fmt_num(v.v2.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(iλ V2, iλ a(t) V1)`.
#[inline]
pub fn system_rhs<T: Real>(t: T, v: &ModeState<T>, lambda: T, a: &CoefficientSpec<T>) -> ModeState<T> {
    rhs_with(a.eval(t), v, lambda)
}

#[inline]
fn rhs_with<T: Real>(a_t: T, v: &ModeState<T>, lambda: T) -> ModeState<T> {
    let il = Complex::new(T::zero(), lambda);
    ModeState { v1: il * v.v2, v2: il * v.v1 * a_t }
}

#[inline]
fn rk4_step<T: Real>(v: ModeState<T>, a0: T, ah: T, a1: T, lambda: T, dt: T) -> ModeState<T> {
    let half = dt * T::lit(0.5);
    let k1 = rhs_with(a0, &v, lambda);
    let k2 = rhs_with(ah, &(v + k1 * half), lambda);
    let k3 = rhs_with(ah, &(v + k2 * half), lambda);
    let k4 = rhs_with(a1, &(v + k3 * dt), lambda);
    v + (k1 + k2 * T::lit(2.0) + k3 * T::lit(2.0) + k4) * (dt / T::lit(6.0))
}

fn check_mode_args<T: Real>(lambda: T, t_final: T) -> Result<()> {
    if !(lambda.is_finite() && lambda > T::zero()) {
        return Err(Error::Precondition(format!("mode frequency {lambda} must be positive")));
    }
    if !(t_final.is_finite() && t_final > T::zero()) {
        return Err(Error::Precondition(format!("final time {t_final} must be positive")));
    }
    Ok(())
}

/// Fixed-step RK4 with exactly `steps` uniform steps, storing every `store_every`-th state and the endpoint.
pub fn integrate_steps<T: Real>(
    lambda: T,
    a: &CoefficientSpec<T>,
    v0: ModeState<T>,
    t_final: T,
    steps: usize,
    store_every: usize,
) -> Result<ModeTrajectory<T>> {
    check_mode_args(lambda, t_final)?;
    let steps = steps.max(1);
    let store_every = store_every.max(1);
    let dt = t_final / T::count(steps);
    let n_store = steps / store_every + 2;
    let mut times = Vec::with_capacity(n_store);
    let mut states = Vec::with_capacity(n_store);
    times.push(T::zero());
    states.push(v0);
    let mut v = v0;
    let mut peak = v0.norm();
    let mut a_left = a.eval(T::zero());
    for k in 0..steps {
        let t = t_final * T::count(k) / T::count(steps);
        let t_next = t_final * T::count(k + 1) / T::count(steps);
        let a_mid = a.eval(t + dt * T::lit(0.5));
        let a_right = a.eval(t_next);
        v = rk4_step(v, a_left, a_mid, a_right, lambda, dt);
        a_left = a_right;
        if !v.is_finite() {
            return Err(Error::Instability { step: k + 1, t: t_next.to_f64_lossy() });
        }
        peak = peak.max(v.norm());
        if (k + 1) % store_every == 0 || k + 1 == steps {
            times.push(t_next);
            states.push(v);
        }
    }
    Ok(ModeTrajectory { times, states, lambda, dt_used: dt, peak_norm: peak })
}

/// RK4 with `dt = min(dt_max, cfl_c/(λ√a_sup))`, rounded so the grid lands on `T`.
pub fn integrate_mode<T: Real>(
    lambda: T,
    a: &CoefficientSpec<T>,
    v0: ModeState<T>,
    t_final: T,
    cfg: &IntegratorConfig<T>,
) -> Result<ModeTrajectory<T>> {
    cfg.validate()?;
    check_mode_args(lambda, t_final)?;
    let steps = cfg.steps(lambda, a.a_sup(), t_final, 1);
    integrate_steps(lambda, a, v0, t_final, steps, cfg.store_every)
}

/// Closed form for constant `a`: `(v̂(t), ∂ₜv̂(t))`.
pub fn exact_constant_mode<T: Real>(
    a: T,
    lambda: T,
    v0: Complex<T>,
    v1: Complex<T>,
    t: T,
) -> (Complex<T>, Complex<T>) {
    let w = a.sqrt() * lambda;
    let (s, c) = (w * t).sin_cos();
    (v0 * c + v1 * (s / w), v0 * (-w * s) + v1 * c)
}

/// Zero-frequency mode: `∂ₜ²v̂ = 0`.
pub fn zero_mode<T: Real>(v0: Complex<T>, v1: Complex<T>, t: T) -> (Complex<T>, Complex<T>) {
    (v0 + v1 * t, v1)
}

/// `a |V1|² + |V2|²`, conserved when `a` is constant.
pub fn constant_energy<T: Real>(v: &ModeState<T>, a: T, _lambda: T) -> T {
    a * v.v1.norm_sqr() + v.v2.norm_sqr()
}

/// Reference solution: the run at `dt/16` with its endpoint replaced by the
/// Richardson extrapolation of the `dt/16` and `dt/32` endpoints.
pub fn reference_oracle<T: Real>(
    lambda: T,
    a: &CoefficientSpec<T>,
    v0: ModeState<T>,
    t_final: T,
    cfg: &IntegratorConfig<T>,
) -> Result<ModeTrajectory<T>> {
    cfg.validate()?;
    check_mode_args(lambda, t_final)?;
    let base = cfg.steps(lambda, a.a_sup(), t_final, 1);
    let mut fine = integrate_steps(lambda, a, v0, t_final, 16 * base, 16 * cfg.store_every)?;
    let finer = integrate_steps(lambda, a, v0, t_final, 32 * base, 32 * cfg.store_every)?;
    let (e16, e32) = (*fine.last(), *finer.last());
    let extrapolated = e32 + (e32 + e16 * -T::one()) * (T::one() / T::lit(15.0));
    *fine.states.last_mut().expect("non-empty") = extrapolated;
    Ok(fine)
}

/// Worst-case amplification over initial data: `max_t ‖Φ(t)‖₂` for the
/// 2×2 propagator `Φ`, checked after every step.
pub fn propagator_amplification<T: Real>(
    lambda: T,
    a: &CoefficientSpec<T>,
    t_final: T,
    cfg: &IntegratorConfig<T>,
) -> Result<T> {
    cfg.validate()?;
    check_mode_args(lambda, t_final)?;
    let steps = cfg.steps(lambda, a.a_sup(), t_final, 1);
    let dt = t_final / T::count(steps);
    let (one, zero) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
    let mut c0 = ModeState::new(one, zero);
    let mut c1 = ModeState::new(zero, one);
    let mut peak = T::one();
    let mut a_left = a.eval(T::zero());
    for k in 0..steps {
        let t = t_final * T::count(k) / T::count(steps);
        let t_next = t_final * T::count(k + 1) / T::count(steps);
        let a_mid = a.eval(t + dt * T::lit(0.5));
        let a_right = a.eval(t_next);
        c0 = rk4_step(c0, a_left, a_mid, a_right, lambda, dt);
        c1 = rk4_step(c1, a_left, a_mid, a_right, lambda, dt);
        a_left = a_right;
        if !(c0.is_finite() && c1.is_finite()) {
            return Err(Error::Instability { step: k + 1, t: t_next.to_f64_lossy() });
        }
        peak = peak.max(complex_op_norm([c0.v1, c0.v2], [c1.v1, c1.v2]));
    }
    Ok(peak)
}
