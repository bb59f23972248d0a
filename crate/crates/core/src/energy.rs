//! The `H(t)` / `W(t)` energy transform and its explicit constants.
//!
//! `H(t) = [[1, 1], [λ₁, λ₂]]` with `λ₂ = √a ∗ ψ_ε` and `λ₁ = −λ₂`; a mode
//! state is written as `V = (det H)⁻¹ λ^{−ρ(t)} H W` with `ρ(t) = ρ₀ − δ t`.
//! For `δ > M₁ + M₂ + M₃` and `ε = 1/λ`, `|W|²` is nonincreasing in time.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coefficients::{mollify_sqrt, mollify_sqrt_derivative, sqrt_ll_constant, CoefficientSpec, Mollifier};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::mode_solver::{ModeState, ModeTrajectory};
use crate::scalar::Real;

/// Time grid size used to maximize the amplification chain over `[0, T]`.
pub const AMPLIFICATION_GRID: usize = 1025;

/// Default per-sample tolerance on the relative increase of `|W|²`.
pub const TOL_MONO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HFrame<T> {
    pub t: T,
    pub lambda1: T,
    pub lambda2: T,
    pub det_h: T,
    pub dlambda2: T,
}

impl<T: Real> HFrame<T> {
    pub fn h(&self) -> Mat2<T> {
        Mat2::new(T::one(), T::one(), self.lambda1, self.lambda2)
    }

    pub fn h_inv(&self) -> Mat2<T> {
        let d = self.det_h;
        Mat2::new(self.lambda2 / d, -T::one() / d, -self.lambda1 / d, T::one() / d)
    }

    /// `H⁻¹ ∂ₜH`.
    pub fn h_inv_dh(&self) -> Mat2<T> {
        let dl1 = -self.dlambda2;
        let dl2 = self.dlambda2;
        let d = self.det_h;
        Mat2::new(-dl1 / d, -dl2 / d, dl1 / d, dl2 / d)
    }

    /// `H⁻¹AH − (H⁻¹AH)*` for `A = [[0, 1], [a, 0]]`.
    pub fn skew_part(&self, a: T) -> Mat2<T> {
        let off = (self.lambda2 * self.lambda2 + self.lambda1 * self.lambda1 - T::lit(2.0) * a) / self.det_h;
        Mat2::new(T::zero(), off, -off, T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformParams<T> {
    pub eps: T,
    pub rho0: T,
    pub delta: T,
    pub lambda: T,
}

impl<T: Real> TransformParams<T> {
    /// `ε = 1/λ`, `ρ₀ = 0`.
    pub fn for_mode(lambda: T, delta: T) -> Result<Self> {
        let p = Self { eps: T::one() / lambda, rho0: T::zero(), delta, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::one()) {
            return Err(Error::Precondition(format!("transform needs λ > 1, got {}", self.lambda)));
        }
        if !(self.eps > T::zero() && self.eps < T::lit(0.25)) {
            return Err(Error::Precondition(format!("ε = {} outside (0, 1/4)", self.eps)));
        }
        if !(self.delta.is_finite() && self.delta >= T::zero() && self.rho0.is_finite()) {
            return Err(Error::Precondition("δ must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn rho(&self, t: T) -> T {
        self.rho0 - self.delta * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConstants<T> {
    #[serde(rename = "M1")]
    pub m1: T,
    #[serde(rename = "M2")]
    pub m2: T,
    #[serde(rename = "M3")]
    pub m3: T,
    pub delta_min: T,
    #[serde(rename = "M4_bound", skip_serializing_if = "Option::is_none")]
    pub m4_bound: Option<T>,
}

/// `M₁ = M₂ = b0⁻¹ ∫|sψ′|`, `M₃ = (2 b0²)⁻¹ ∫ sψ`.
pub fn compute_constants<T: Real>(psi: &Mollifier<T>, b0: T) -> Result<EnergyConstants<T>> {
    if !(b0.is_finite() && b0 > T::zero()) {
        return Err(Error::Precondition(format!("b0 = {b0} must be positive")));
    }
    let m1 = psi.moment_abs_s_dpsi / b0;
    let m3 = psi.moment_s_psi / (T::lit(2.0) * b0 * b0);
    Ok(EnergyConstants { m1, m2: m1, m3, delta_min: m1 + m1 + m3, m4_bound: None })
}

pub fn build_frame<T: Real>(a: &CoefficientSpec<T>, psi: &Mollifier<T>, eps: T, t: T) -> Result<HFrame<T>> {
    let l2 = mollify_sqrt(a, psi, eps, t)?;
    let dl2 = mollify_sqrt_derivative(a, psi, eps, t)?;
    Ok(HFrame { t, lambda1: -l2, lambda2: l2, det_h: l2 + l2, dlambda2: dl2 })
}

fn lambda_pow<T: Real>(p: &TransformParams<T>, t: T) -> T {
    (p.rho(t) * p.lambda.ln()).exp()
}

/// `W = λ^{ρ(t)} (λ₂V₁ − V₂, −λ₁V₁ + V₂)`.
pub fn to_w<T: Real>(v: &ModeState<T>, frame: &HFrame<T>, p: &TransformParams<T>, t: T) -> (Complex<T>, Complex<T>) {
    let k = lambda_pow(p, t);
    ((v.v1 * frame.lambda2 - v.v2) * k, (v.v2 - v.v1 * frame.lambda1) * k)
}

/// Inverse of [`to_w`]: `V = (det H)⁻¹ λ^{−ρ(t)} H W`.
pub fn from_w<T: Real>(w: (Complex<T>, Complex<T>), frame: &HFrame<T>, p: &TransformParams<T>, t: T) -> ModeState<T> {
    let k = T::one() / (lambda_pow(p, t) * frame.det_h);
    ModeState::new((w.0 + w.1) * k, (w.0 * frame.lambda1 + w.1 * frame.lambda2) * k)
}

/// The three terms bounded in the energy argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimates<T> {
    /// `|∂ₜ det H / det H|`
    pub e1: T,
    /// `‖H⁻¹ ∂ₜH‖`
    pub e2: T,
    /// `‖H⁻¹AH − (H⁻¹AH)*‖`
    pub e3: T,
}

pub fn measure_estimates<T: Real>(a: &CoefficientSpec<T>, psi: &Mollifier<T>, eps: T, t: T) -> Result<Estimates<T>> {
    let f = build_frame(a, psi, eps, t)?;
    let dl1 = -f.dlambda2;
    let e1 = ((f.dlambda2 - dl1) / f.det_h).abs();
    let e2 = f.h_inv_dh().op_norm();
    let e3 = f.skew_part(a.eval(t)).op_norm();
    Ok(Estimates { e1, e2, e3 })
}

/// Bounds on the estimate terms using a measured Log-Lipschitz constant of `√a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredBounds<T> {
    /// Local LL constant `L` of `√a` for separations up to `2 ε_max`.
    pub sqrt_ll: T,
    /// `e1, e2 ≤ m1 |ln ε|` with `m1 = L ∫|sψ′| / b0`.
    pub m1: T,
    /// `e3 ≤ m3 ε |ln ε|` with `m3 = (L ∫ sψ)(2 √a_sup) / b0`.
    pub m3: T,
}

pub fn measured_bounds<T: Real>(
    a: &CoefficientSpec<T>,
    psi: &Mollifier<T>,
    eps_max: T,
    grid_size: usize,
) -> Result<MeasuredBounds<T>> {
    if !(eps_max > T::zero() && eps_max < T::lit(0.25)) {
        return Err(Error::Precondition(format!("ε_max = {eps_max} outside (0, 1/4)")));
    }
    let l = sqrt_ll_constant(a, grid_size, eps_max + eps_max);
    let b0 = a.b0();
    Ok(MeasuredBounds {
        sqrt_ll: l,
        m1: l * psi.moment_abs_s_dpsi / b0,
        m3: l * psi.moment_s_psi * T::lit(2.0) * a.a_sup().sqrt() / b0,
    })
}

fn check_eps_matches<T: Real>(p: &TransformParams<T>, lambda: T) -> Result<()> {
    if (p.eps * lambda - T::one()).abs() > T::epsilon() * T::lit(16.0) {
        return Err(Error::Precondition(format!("ε = {} must equal 1/λ for λ = {}", p.eps, lambda)));
    }
    Ok(())
}

/// `(t, |W(t)|²)` at every stored sample.
pub fn w_energy_series<T: Real>(
    traj: &ModeTrajectory<T>,
    a: &CoefficientSpec<T>,
    psi: &Mollifier<T>,
    p: &TransformParams<T>,
) -> Result<Vec<(T, T)>> {
    p.validate()?;
    check_eps_matches(p, traj.lambda)?;
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, v)| {
            let frame = build_frame(a, psi, p.eps, t)?;
            let w = to_w(v, &frame, p, t);
            Ok((t, w.0.norm_sqr() + w.1.norm_sqr()))
        })
        .collect()
}

fn check_monotone_hypotheses<T: Real>(lambda: T, delta: T, psi: &Mollifier<T>, b0: T) -> Result<EnergyConstants<T>> {
    if !(lambda > T::lit(4.0)) {
        return Err(Error::Inapplicable(format!("λ = {lambda} must exceed 4")));
    }
    let k = compute_constants(psi, b0)?;
    if !(delta > k.delta_min) {
        return Err(Error::Inapplicable(format!("δ = {} does not exceed M1+M2+M3 = {}", delta, k.delta_min)));
    }
    Ok(k)
}

/// Largest relative increase of `|W|²` between consecutive stored samples.
pub fn verify_w_monotone<T: Real>(
    traj: &ModeTrajectory<T>,
    a: &CoefficientSpec<T>,
    psi: &Mollifier<T>,
    delta: T,
) -> Result<T> {
    check_monotone_hypotheses(traj.lambda, delta, psi, a.b0())?;
    let p = TransformParams::for_mode(traj.lambda, delta)?;
    let series = w_energy_series(traj, a, psi, &p)?;
    let mut worst = T::neg_infinity();
    for pair in series.windows(2) {
        let (w0, w1) = (pair[0].1, pair[1].1);
        if w0 == T::zero() {
            if w1 > T::zero() {
                return Ok(T::infinity());
            }
            continue;
        }
        worst = worst.max((w1 - w0) / w0);
    }
    Ok(if worst == T::neg_infinity() { T::zero() } else { worst })
}

/// `max_t (det H(0)/det H(t)) ‖H(t)‖ ‖H(0)⁻¹‖` with `ε = 1/λ` on a uniform grid.
pub fn amplification_constant<T: Real>(a: &CoefficientSpec<T>, psi: &Mollifier<T>, lambda: T, t_final: T) -> Result<T> {
    if !(lambda > T::lit(4.0)) {
        return Err(Error::Inapplicable(format!("λ = {lambda} must exceed 4")));
    }
    let eps = T::one() / lambda;
    let f0 = build_frame(a, psi, eps, T::zero())?;
    let inv0 = f0.h_inv().op_norm();
    let last = T::count(AMPLIFICATION_GRID - 1);
    let mut best = T::zero();
    for i in 0..AMPLIFICATION_GRID {
        let t = t_final * T::count(i) / last;
        let f = build_frame(a, psi, eps, t)?;
        best = best.max(f0.det_h / f.det_h * f.h().op_norm() * inv0);
    }
    Ok(best)
}

/// λ-independent bound `√a_sup (1 + a_sup) / b0²` for [`amplification_constant`].
pub fn uniform_amplification_bound<T: Real>(a: &CoefficientSpec<T>) -> T {
    a.a_sup().sqrt() * (T::one() + a.a_sup()) / (a.b0() * a.b0())
}

/// `(max_t |V(t)|/|V(0)|, M₄(λ) λ^{δT})`.
pub fn verify_amplification<T: Real>(
    traj: &ModeTrajectory<T>,
    a: &CoefficientSpec<T>,
    psi: &Mollifier<T>,
    delta: T,
    t_final: T,
) -> Result<(T, T)> {
    check_monotone_hypotheses(traj.lambda, delta, psi, a.b0())?;
    let observed = traj.amplification()?;
    let m4 = amplification_constant(a, psi, traj.lambda, t_final)?;
    Ok((observed, m4 * traj.lambda.powf(delta * t_final)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_solver::{integrate_mode, IntegratorConfig};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn poly_bump_constants() {
        let psi = Mollifier::<f64>::poly_bump();
        let k = compute_constants(&psi, 1.0).unwrap();
        assert!((k.m1 - 5.625).abs() < 1e-12 && k.m1 == k.m2);
        assert!((k.m3 - 0.75).abs() < 1e-12);
        assert!((k.delta_min - 12.0).abs() < 1e-12);
        let k2 = compute_constants(&psi, 2.0).unwrap();
        assert!((k2.m1 - 2.8125).abs() < 1e-12);
        assert!((k2.m3 - 3.0 / 16.0).abs() < 1e-12);
        assert!((k2.delta_min - 5.8125).abs() < 1e-12);
        assert!(compute_constants(&psi, 0.0).is_err());
    }

    #[test]
    fn constants_decrease_in_b0() {
        let psi = Mollifier::<f64>::poly_bump();
        let ks: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|b| compute_constants(&psi, *b).unwrap()).collect();
        for w in ks.windows(2) {
            assert!(w[1].m1 < w[0].m1 && w[1].m3 < w[0].m3 && w[1].delta_min < w[0].delta_min);
        }
    }

    #[test]
    fn constant_frame() {
        let a = CoefficientSpec::constant(4.0, 1.0).unwrap();
        let f = build_frame(&a, &Mollifier::<f64>::poly_bump(), 0.1, 0.5).unwrap();
        assert!((f.lambda1 + 2.0).abs() < 1e-14 && (f.lambda2 - 2.0).abs() < 1e-14);
        assert!((f.det_h - 4.0).abs() < 1e-14 && f.dlambda2.abs() < 1e-12);
    }

    #[test]
    fn eigenvector_aligned_state_has_one_w_component() {
        let a = CoefficientSpec::constant(1.0, 1.0).unwrap();
        let f = build_frame(&a, &Mollifier::<f64>::poly_bump(), 0.1, 0.5).unwrap();
        let p = TransformParams { eps: 0.1, rho0: 0.0, delta: 0.0, lambda: 10.0 };
        let w = to_w(&ModeState::new(c(0.0, 1.0), c(0.0, 1.0)), &f, &p, 0.3);
        assert!(w.0.norm() < 1e-14);
        assert!((w.1 - c(0.0, 2.0)).norm() < 1e-14);
        let z = to_w(&ModeState::zero(), &f, &p, 0.3);
        assert_eq!((z.0, z.1), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn constant_coefficient_estimates_vanish() {
        let a = CoefficientSpec::constant(3.0, 1.0).unwrap();
        let e = measure_estimates(&a, &Mollifier::<f64>::poly_bump(), 0.05, 0.6).unwrap();
        assert!(e.e1 < 1e-9 && e.e2 < 1e-9 && e.e3 < 1e-9);
    }

    #[test]
    fn frame_preconditions() {
        let a = CoefficientSpec::constant(1.0, 1.0).unwrap();
        assert!(build_frame(&a, &Mollifier::<f64>::poly_bump(), 0.3, 0.5).is_err());
        assert!(TransformParams::for_mode(3.0, 1.0).is_err());
    }

    #[test]
    fn unit_speed_w_decays_at_closed_form_rate() {
        let a = CoefficientSpec::constant(1.0, 1.0).unwrap();
        let psi = Mollifier::<f64>::poly_bump();
        let cfg = IntegratorConfig { dt_max: 1e-3, store_every: 10, ..Default::default() };
        let tr = integrate_mode(10.0, &a, ModeState::new(c(1.0, 0.0), c(0.5, 0.0)), 1.0, &cfg).unwrap();
        let delta = 12.01;
        let inc = verify_w_monotone(&tr, &a, &psi, delta).unwrap();
        assert!(inc <= 1e-9);
        // e1 = e2 = e3 = 0: |W(t)|² = |W(0)|² λ^{−2δt}
        let p = TransformParams::for_mode(10.0, delta).unwrap();
        let s = w_energy_series(&tr, &a, &psi, &p).unwrap();
        let (t, w) = *s.last().unwrap();
        let predicted = s[0].1 * (-2.0 * delta * t * 10f64.ln()).exp();
        assert!((w / predicted - 1.0).abs() < 1e-8);
    }

    #[test]
    fn monotone_check_inapplicable_cases() {
        let a = CoefficientSpec::constant(1.0, 1.0).unwrap();
        let psi = Mollifier::<f64>::poly_bump();
        let cfg = IntegratorConfig::with_dt(1e-3);
        let tr = integrate_mode(3.0, &a, ModeState::new(c(1.0, 0.0), c(0.0, 0.0)), 1.0, &cfg).unwrap();
        assert!(matches!(verify_w_monotone(&tr, &a, &psi, 13.0), Err(Error::Inapplicable(_))));
        let tr = integrate_mode(10.0, &a, ModeState::new(c(1.0, 0.0), c(0.0, 0.0)), 1.0, &cfg).unwrap();
        assert!(matches!(verify_w_monotone(&tr, &a, &psi, 6.0), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn unit_speed_amplification() {
        let a = CoefficientSpec::constant(1.0, 1.0).unwrap();
        let psi = Mollifier::<f64>::poly_bump();
        assert!((amplification_constant(&a, &psi, 10.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((amplification_constant(&a, &psi, 100.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let cfg = IntegratorConfig::with_dt(1e-4);
        let tr = integrate_mode(10.0, &a, ModeState::new(c(0.3, 0.0), c(1.0, 0.0)), 1.0, &cfg).unwrap();
        let (obs, bound) = verify_amplification(&tr, &a, &psi, 12.5, 1.0).unwrap();
        assert!(obs <= 1.0 + 1e-8 && obs <= bound);
        let tr0 = integrate_mode(10.0, &a, ModeState::zero(), 1.0, &cfg).unwrap();
        assert_eq!(verify_amplification(&tr0, &a, &psi, 12.5, 1.0), Err(Error::UndefinedRatio));
    }
}
