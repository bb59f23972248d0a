//! Full Cauchy problems over a spectrum: per-mode solves, Sobolev-norm time
//! series, the loss-of-derivatives check and the Hölder contrast experiment.

use std::io::Write;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSpec, Mollifier};
use crate::energy::{compute_constants, uniform_amplification_bound, EnergyConstants};
use crate::error::{Error, Result};
use crate::mode_solver::{integrate_steps, propagator_amplification, zero_mode, IntegratorConfig, ModeState};
use crate::scalar::{ls_slope, Real};
use crate::spectrum::{fmt_num, sobolev_weight, SobolevConvention, SpectralState, Spectrum};

/// Default relative growth allowed for the empirical constant under a truncation doubling.
pub const DEFAULT_THEOREM_TOL: f64 = 0.10;

/// Modes at or below this frequency are left out of exponent fits.
pub const FIT_LAMBDA_MIN: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// Compact Lie group: loss `δT/2`, velocity order 1.
    Compact,
    /// Graded Lie group with a Rockland operator of degree `ν`: loss `νδT/4`, velocity order `ν/2`.
    Graded,
    /// Positive operator on a Hilbert space with discrete spectrum; indexed like [`Setting::Compact`].
    Hilbert,
}

#[derive(Debug, Clone)]
pub struct CauchyProblem<T> {
    pub spectrum: Spectrum<T>,
    pub coefficient: CoefficientSpec<T>,
    pub mollifier: Mollifier<T>,
    /// `(û₀, û₁)` per mode.
    pub initial: SpectralState<T>,
    pub s: T,
    pub t_final: T,
    pub convention: SobolevConvention,
    pub setting: Setting,
}

impl<T: Real> CauchyProblem<T> {
    pub fn validate(&self) -> Result<()> {
        if self.initial.len() != self.spectrum.len() {
            return Err(Error::Contract(format!(
                "initial data has {} entries but spectrum has {} modes",
                self.initial.len(),
                self.spectrum.len()
            )));
        }
        if !self.s.is_finite() {
            return Err(Error::Config("Sobolev index must be finite".into()));
        }
        let tol = T::epsilon() * T::lit(8.0) * self.coefficient.t_final();
        if !(self.t_final > T::zero() && self.t_final <= self.coefficient.t_final() + tol) {
            return Err(Error::Config(format!(
                "final time {} must lie in (0, {}]",
                self.t_final,
                self.coefficient.t_final()
            )));
        }
        match self.setting {
            Setting::Graded => {
                if self.spectrum.nu().is_none() {
                    return Err(Error::Config("graded setting needs a spectrum with a homogeneity degree".into()));
                }
                if self.convention != SobolevConvention::Graded {
                    return Err(Error::Config("graded setting needs the graded Sobolev convention".into()));
                }
            }
            Setting::Compact | Setting::Hilbert => {
                if self.convention == SobolevConvention::Graded {
                    return Err(Error::Config("graded Sobolev convention needs the graded setting".into()));
                }
            }
        }
        Ok(())
    }

    /// `(loss, velocity order)` for the configured setting.
    pub fn indices(&self, delta: T) -> (T, T) {
        match self.setting {
            Setting::Compact | Setting::Hilbert => (delta * self.t_final / T::lit(2.0), T::one()),
            Setting::Graded => {
                let nu = self.spectrum.nu().unwrap_or_else(T::nan);
                (nu * delta * self.t_final / T::lit(4.0), nu / T::lit(2.0))
            }
        }
    }
}

/// `(û(t), ∂ₜû(t))` for one mode on the common report grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution<T> {
    pub label: String,
    pub lambda: T,
    pub weight: T,
    pub u: Vec<Complex<T>>,
    pub ut: Vec<Complex<T>>,
    /// `max_t |V(t)|/|V(0)|` over every step; `None` for zero modes and zero data.
    pub amplification: Option<T>,
}

impl<T: Real> ModeSolution<T> {
    /// Writes `t,re_V1,im_V1,re_V2,im_V2` rows with `V = (iλû, ∂ₜû)`.
    pub fn write_csv<W: Write>(&self, times: &[T], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re_V1", "im_V1", "re_V2", "im_V2"])?;
        for ((t, u), ut) in times.iter().zip(&self.u).zip(&self.ut) {
            let v = ModeState::from_data(self.lambda, *u, *ut);
            w.write_record([fmt_num(*t), fmt_num(v.v1.re), fmt_num(v.v1.im), fmt_num(v.v2.re), fmt_num(v.v2.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplification<T> {
    pub label: String,
    pub lambda: T,
    pub amplification: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport<T> {
    pub setting: Setting,
    pub convention: SobolevConvention,
    pub s: T,
    pub delta: T,
    pub t_final: T,
    /// Regularity lost over `[0, T]`.
    pub loss: T,
    pub velocity_order: T,
    pub times: Vec<T>,
    pub norm_u: Vec<T>,
    pub norm_ut: Vec<T>,
    /// `(‖u₀‖_s, ‖u₁‖_{s − order})`
    pub rhs_norms: (T, T),
    pub c_t: Vec<T>,
    pub per_mode_amplification: Vec<ModeAmplification<T>>,
    pub empirical_c: T,
    pub fitted_exponent: Option<T>,
    pub constants: EnergyConstants<T>,
}

#[derive(Serialize)]
struct Sidecar<'a, T> {
    setting: Setting,
    convention: SobolevConvention,
    s: T,
    delta: T,
    #[serde(rename = "T")]
    t_final: T,
    loss: T,
    velocity_order: T,
    rhs_u0: T,
    rhs_u1: T,
    empirical_c: T,
    fitted_exponent: Option<T>,
    constants: &'a EnergyConstants<T>,
    per_mode: &'a [ModeAmplification<T>],
}

impl<T: Real + Serialize> SolutionReport<T> {
    /// Writes `t,norm_u,norm_ut,rhs_u0,rhs_u1,C_t` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "norm_u", "norm_ut", "rhs_u0", "rhs_u1", "C_t"])?;
        for i in 0..self.times.len() {
            w.write_record([
                fmt_num(self.times[i]),
                fmt_num(self.norm_u[i]),
                fmt_num(self.norm_ut[i]),
                fmt_num(self.rhs_norms.0),
                fmt_num(self.rhs_norms.1),
                fmt_num(self.c_t[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Sidecar with constants, `δ`, the fitted exponent and the per-mode table.
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let side = Sidecar {
            setting: self.setting,
            convention: self.convention,
            s: self.s,
            delta: self.delta,
            t_final: self.t_final,
            loss: self.loss,
            velocity_order: self.velocity_order,
            rhs_u0: self.rhs_norms.0,
            rhs_u1: self.rhs_norms.1,
            empirical_c: self.empirical_c,
            fitted_exponent: self.fitted_exponent,
            constants: &self.constants,
            per_mode: &self.per_mode_amplification,
        };
        serde_json::to_writer_pretty(&mut out, &side).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }
}

/// `T·k/n` for `k = 0..=n`.
pub fn report_times<T: Real>(t_final: T, samples: usize) -> Vec<T> {
    (0..=samples).map(|k| t_final * T::count(k) / T::count(samples)).collect()
}

/// Integrates every mode on the common report grid; results follow spectrum order.
pub fn solve_modes<T: Real>(p: &CauchyProblem<T>, cfg: &IntegratorConfig<T>) -> Result<Vec<ModeSolution<T>>> {
    p.validate()?;
    cfg.validate()?;
    let n = cfg.report_samples;
    let times = report_times(p.t_final, n);
    let a_sup = p.coefficient.a_sup();
    p.spectrum
        .modes()
        .par_iter()
        .zip(p.initial.entries.par_iter())
        .map(|(m, &(u0, u1))| {
            if m.lambda == T::zero() {
                let (u, ut) = times.iter().map(|&t| zero_mode(u0, u1, t)).unzip();
                return Ok(ModeSolution {
                    label: m.label.clone(),
                    lambda: m.lambda,
                    weight: m.weight,
                    u,
                    ut,
                    amplification: None,
                });
            }
            let steps = cfg.steps(m.lambda, a_sup, p.t_final, n);
            let v0 = ModeState::from_data(m.lambda, u0, u1);
            let tr = integrate_steps(m.lambda, &p.coefficient, v0, p.t_final, steps, steps / n)?;
            debug_assert_eq!(tr.states.len(), n + 1);
            let (u, ut) = tr.states.iter().map(|v| v.to_data(m.lambda)).unzip();
            Ok(ModeSolution {
                label: m.label.clone(),
                lambda: m.lambda,
                weight: m.weight,
                u,
                ut,
                amplification: tr.amplification().ok(),
            })
        })
        .collect()
}

fn weight_or_skip<T: Real>(lambda: T, s: T, conv: SobolevConvention, nu: Option<T>) -> Result<T> {
    match sobolev_weight(lambda, s, conv, nu) {
        Ok(w) => Ok(w),
        Err(Error::ZeroModeExcluded) => Ok(T::zero()),
        Err(e) => Err(e),
    }
}

/// Assembles norms and ratios from per-mode solutions, summing in mode order.
pub fn assemble_report<T: Real>(
    p: &CauchyProblem<T>,
    modes: &[ModeSolution<T>],
    times: Vec<T>,
    delta: T,
) -> Result<SolutionReport<T>> {
    let (loss, order) = p.indices(delta);
    let (conv, nu) = (p.convention, p.spectrum.nu());
    let mut wu = Vec::with_capacity(modes.len());
    let mut wut = Vec::with_capacity(modes.len());
    let mut rhs0 = T::zero();
    let mut rhs1 = T::zero();
    for (m, &(u0, u1)) in modes.iter().zip(&p.initial.entries) {
        wu.push(m.weight * weight_or_skip(m.lambda, p.s - loss, conv, nu)?);
        wut.push(m.weight * weight_or_skip(m.lambda, p.s - loss - order, conv, nu)?);
        rhs0 += m.weight * weight_or_skip(m.lambda, p.s, conv, nu)? * u0.norm_sqr();
        rhs1 += m.weight * weight_or_skip(m.lambda, p.s - order, conv, nu)? * u1.norm_sqr();
    }
    let rhs = rhs0 + rhs1;
    let mut norm_u = Vec::with_capacity(times.len());
    let mut norm_ut = Vec::with_capacity(times.len());
    let mut c_t = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let mut su = T::zero();
        let mut sut = T::zero();
        for (j, m) in modes.iter().enumerate() {
            su += wu[j] * m.u[k].norm_sqr();
            sut += wut[j] * m.ut[k].norm_sqr();
        }
        if !(su.is_finite() && sut.is_finite()) {
            return Err(Error::Numerical(format!("non-finite norm at t = {}", times[k])));
        }
        let num = su + sut;
        let c = if rhs > T::zero() {
            num / rhs
        } else if num == T::zero() {
            T::zero()
        } else {
            return Err(Error::DegenerateData(format!(
                "data norms vanish but the solution norm at t = {} does not",
                times[k]
            )));
        };
        norm_u.push(su.sqrt());
        norm_ut.push(sut.sqrt());
        c_t.push(c);
    }
    let empirical_c = c_t.iter().copied().fold(T::zero(), T::max);
    let per_mode_amplification: Vec<_> = modes
        .iter()
        .filter_map(|m| {
            m.amplification.map(|a| ModeAmplification { label: m.label.clone(), lambda: m.lambda, amplification: a })
        })
        .collect();
    let fitted_exponent = fit_amplifications(&per_mode_amplification).ok();
    let mut constants = compute_constants(&p.mollifier, p.coefficient.b0())?;
    constants.m4_bound = Some(uniform_amplification_bound(&p.coefficient));
    Ok(SolutionReport {
        setting: p.setting,
        convention: p.convention,
        s: p.s,
        delta,
        t_final: p.t_final,
        loss,
        velocity_order: order,
        times,
        norm_u,
        norm_ut,
        rhs_norms: (rhs0.sqrt(), rhs1.sqrt()),
        c_t,
        per_mode_amplification,
        empirical_c,
        fitted_exponent,
        constants,
    })
}

pub fn solve_cauchy<T: Real>(p: &CauchyProblem<T>, cfg: &IntegratorConfig<T>, delta: T) -> Result<SolutionReport<T>> {
    if !(delta.is_finite() && delta > T::zero()) {
        return Err(Error::Precondition(format!("δ = {delta} must be positive")));
    }
    let modes = solve_modes(p, cfg)?;
    assemble_report(p, &modes, report_times(p.t_final, cfg.report_samples), delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck<T> {
    pub passed: bool,
    pub empirical_c: T,
    pub doubled_c: T,
    /// `(C_2K − C_K) / C_K`
    pub relative_change: T,
    /// `C_t` at `t = 0`; at most 1 under the inhomogeneous convention.
    pub initial_ratio: T,
    pub initial_ratio_ok: bool,
}

/// Finiteness of the empirical constant and its stability under a truncation doubling.
pub fn verify_theorem<T: Real>(base: &SolutionReport<T>, doubled: &SolutionReport<T>, tol: T) -> TheoremCheck<T> {
    let (c, c2) = (base.empirical_c, doubled.empirical_c);
    let relative_change = if c > T::zero() { (c2 - c) / c } else { T::infinity() };
    let initial_ratio = base.c_t.first().copied().unwrap_or_else(T::nan);
    let initial_ratio_ok = match base.convention {
        SobolevConvention::Inhomogeneous => initial_ratio <= T::one() + T::lit(1e-12),
        _ => initial_ratio.is_finite(),
    };
    let passed =
        c.is_finite() && c2.is_finite() && relative_change.abs() <= tol && initial_ratio_ok;
    TheoremCheck { passed, empirical_c: c, doubled_c: c2, relative_change, initial_ratio, initial_ratio_ok }
}

fn fit_amplifications<T: Real>(amps: &[ModeAmplification<T>]) -> Result<T> {
    let usable: Vec<_> = amps
        .iter()
        .filter(|m| m.lambda > T::lit(FIT_LAMBDA_MIN) && m.amplification > T::zero())
        .collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} modes with λ > {FIT_LAMBDA_MIN} and nonzero data; need 4",
            usable.len()
        )));
    }
    let xs: Vec<T> = usable.iter().map(|m| m.lambda.ln()).collect();
    let ys: Vec<T> = usable.iter().map(|m| m.amplification.ln()).collect();
    Ok(ls_slope(&xs, &ys))
}

/// Least-squares slope of `ln(amplification)` against `ln λ`.
pub fn fit_loss_exponent<T: Real>(report: &SolutionReport<T>) -> Result<T> {
    fit_amplifications(&report.per_mode_amplification)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastData<T> {
    pub lambdas: Vec<T>,
    pub amplifications: Vec<T>,
    /// `Δ ln(amp) / Δ ln λ` on consecutive grid pairs.
    pub local_slopes: Vec<T>,
}

impl<T: Real> ContrastData<T> {
    /// Whether the local slopes over the upper half of the grid are nondecreasing.
    pub fn upper_half_nondecreasing(&self) -> bool {
        let half = self.lambdas.len() / 2;
        // slope i joins grid points i and i + 1
        let upper = &self.local_slopes[half.min(self.local_slopes.len())..];
        upper.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn max_slope(&self) -> T {
        self.local_slopes.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// Worst-case amplification `max_t ‖Φ(t)‖₂` on an ascending `λ` grid.
pub fn amplification_sweep<T: Real>(
    a: &CoefficientSpec<T>,
    lambda_grid: &[T],
    t_final: T,
    cfg: &IntegratorConfig<T>,
) -> Result<ContrastData<T>> {
    if lambda_grid.len() < 2 || lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("λ grid must be strictly ascending with at least two points".into()));
    }
    let amplifications = lambda_grid
        .par_iter()
        .map(|&l| propagator_amplification(l, a, t_final, cfg))
        .collect::<Result<Vec<T>>>()?;
    let local_slopes = lambda_grid
        .windows(2)
        .zip(amplifications.windows(2))
        .map(|(l, m)| (m[1].ln() - m[0].ln()) / (l[1].ln() - l[0].ln()))
        .collect();
    Ok(ContrastData { lambdas: lambda_grid.to_vec(), amplifications, local_slopes })
}

/// Parameters of `a(t) = a_c + κ|t − t0|^α` and, with `beta`, of the oscillatory variant
/// `a_c + κ|t − t0|^α sin²(|t − t0|^{−β})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoelderParams<T> {
    pub a_c: T,
    pub kappa: T,
    pub t0: T,
    #[serde(default)]
    pub beta: Option<T>,
}

pub fn hoelder_contrast<T: Real>(
    alpha: T,
    lambda_grid: &[T],
    params: HoelderParams<T>,
    t_final: T,
    cfg: &IntegratorConfig<T>,
) -> Result<ContrastData<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Precondition(format!("Hölder exponent {alpha} outside (0, 1)")));
    }
    let a = match params.beta {
        Some(beta) => CoefficientSpec::oscillatory_hoelder(params.a_c, params.kappa, alpha, beta, params.t0, t_final)?,
        None => CoefficientSpec::hoelder_cusp(params.a_c, params.kappa, alpha, params.t0, t_final)?,
    };
    amplification_sweep(&a, lambda_grid, t_final, cfg)
}

/// Log-Lipschitz preset: cusp `1 + g(|t − 1/2|)` on `[0, 1]`.
pub fn ll_preset<T: Real>() -> CoefficientSpec<T> {
    CoefficientSpec::loglip_cusp(T::one(), T::one(), T::lit(0.5), T::one()).expect("preset parameters are valid")
}

/// Shipped oscillatory Hölder preset `(α, β, κ) = (0.3, 3, 3)`, `a_c = 1`, `t0 = 0`, `T = 1`.
pub fn oscillatory_preset<T: Real>() -> (T, HoelderParams<T>) {
    (T::lit(0.3), HoelderParams { a_c: T::one(), kappa: T::lit(3.0), t0: T::zero(), beta: Some(T::lit(3.0)) })
}

/// `λ = 8, 16, …, 1024`.
pub fn contrast_grid<T: Real>() -> Vec<T> {
    (3..=10).map(|k| T::count(1usize << k)).collect()
}

/// Integrator settings the contrast experiment is recorded with.
pub fn contrast_config<T: Real>() -> IntegratorConfig<T> {
    IntegratorConfig { dt_max: T::lit(2e-6), ..IntegratorConfig::default() }
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a: stable across platforms and releases.
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

fn decay<T: Real>(lambda: T, p: T) -> T {
    if lambda == T::zero() {
        T::one()
    } else {
        lambda.powf(-p)
    }
}

fn state_from_v<T: Real>(lambda: T, v1: Complex<T>, v2: Complex<T>) -> (Complex<T>, Complex<T>) {
    if lambda == T::zero() {
        (v1, v2)
    } else {
        ModeState::new(v1, v2).to_data(lambda)
    }
}

/// Complex Gaussian `V(0) = (iλû₀, û₁)` per mode, scaled by `λ^{−p}`.
///
/// Each mode draws from its own stream keyed by `seed` and its label, so a
/// larger truncation extends a smaller one. Zero modes take unit Gaussians
/// for `(û₀, û₁)` directly.
pub fn random_initial_data<T: Real>(spectrum: &Spectrum<T>, seed: u64, p: T) -> SpectralState<T> {
    let entries = spectrum
        .modes()
        .iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ label_hash(&m.label));
            let mut g = || -> T { T::lit(StandardNormal.sample(&mut rng)) };
            let k = decay(m.lambda, p) / T::lit(2.0).sqrt();
            let v1 = Complex::new(g(), g()) * k;
            let v2 = Complex::new(g(), g()) * k;
            state_from_v(m.lambda, v1, v2)
        })
        .collect();
    SpectralState { entries }
}

/// `V(0) = λ^{−p} (1, 1)/√2` per mode.
pub fn unit_initial_data<T: Real>(spectrum: &Spectrum<T>, p: T) -> SpectralState<T> {
    let entries = spectrum
        .modes()
        .iter()
        .map(|m| {
            let c = Complex::new(decay(m.lambda, p) / T::lit(2.0).sqrt(), T::zero());
            state_from_v(m.lambda, c, c)
        })
        .collect();
    SpectralState { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{abstract_spectrum, torus_spectrum};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn problem(spectrum: Spectrum<f64>, a: CoefficientSpec<f64>, initial: SpectralState<f64>) -> CauchyProblem<f64> {
        CauchyProblem {
            spectrum,
            coefficient: a,
            mollifier: Mollifier::poly_bump(),
            initial,
            s: 2.0,
            t_final: 1.0,
            convention: SobolevConvention::Inhomogeneous,
            setting: Setting::Compact,
        }
    }

    fn cfg() -> IntegratorConfig<f64> {
        IntegratorConfig { dt_max: 1e-3, report_samples: 50, ..Default::default() }
    }

    #[test]
    fn single_unit_mode_rotates() {
        let sp = abstract_spectrum(&[(1.0, 1.0)], None).unwrap();
        let mut p = problem(sp, CoefficientSpec::constant(1.0, 1.0).unwrap(), SpectralState {
            entries: vec![(c(1.0, 0.0), c(0.0, 0.0))],
        });
        p.s = 0.0;
        p.convention = SobolevConvention::Homogeneous;
        let r = solve_cauchy(&p, &IntegratorConfig { dt_max: 1e-4, ..cfg() }, 3.0).unwrap();
        for (t, n) in r.times.iter().zip(&r.norm_u) {
            // homogeneous weight at index −δT/2 with λ = 1 is 1
            assert!((n - t.cos().abs()).abs() < 1e-10);
        }
        assert!(r.empirical_c <= 1.0 + 1e-8);
    }

    #[test]
    fn graded_nu_two_matches_compact() {
        let entries = [(1.0, 2.0), (2.5, 1.0), (7.0, 3.0), (20.0, 1.0)];
        let a = ll_preset();
        let sp = abstract_spectrum(&entries, None).unwrap();
        let data = random_initial_data(&sp, 5, 2.0);
        let mut pc = problem(sp, a.clone(), data.clone());
        pc.convention = SobolevConvention::Homogeneous;
        let mut pg = problem(abstract_spectrum(&entries, Some(2.0)).unwrap(), a, data);
        pg.convention = SobolevConvention::Graded;
        pg.setting = Setting::Graded;
        let rc = solve_cauchy(&pc, &cfg(), 12.6).unwrap();
        let rg = solve_cauchy(&pg, &cfg(), 12.6).unwrap();
        for (x, y) in rc.norm_u.iter().chain(&rc.norm_ut).zip(rg.norm_u.iter().chain(&rg.norm_ut)) {
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
        assert!((rc.empirical_c - rg.empirical_c).abs() <= 1e-12 * rc.empirical_c);
    }

    #[test]
    fn graded_nu_three_indices() {
        let sp = abstract_spectrum(&[(2.0, 1.0), (5.0, 2.0), (9.0, 1.0)], Some(3.0)).unwrap();
        let data = unit_initial_data(&sp, 1.0);
        let mut p = problem(sp, ll_preset(), data);
        p.convention = SobolevConvention::Graded;
        p.setting = Setting::Graded;
        let r = solve_cauchy(&p, &cfg(), 12.6).unwrap();
        assert!((r.loss - 3.0 * 12.6 / 4.0).abs() < 1e-12);
        assert!((r.velocity_order - 1.5).abs() < 1e-15);
        // hand-computed: ‖u₁‖² at s − 3/2 with weights λ^{4(s−3/2)/3}
        let rhs1: f64 = [(2.0f64, 1.0), (5.0, 2.0), (9.0, 1.0)]
            .iter()
            .map(|&(l, w)| w * l.powf(4.0 * 0.5 / 3.0) * (1.0 / l) * (1.0 / l) / 2.0)
            .sum();
        assert!((r.rhs_norms.1 - rhs1.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn graded_setting_needs_nu_and_convention() {
        let sp = abstract_spectrum(&[(2.0, 1.0)], None).unwrap();
        let data = unit_initial_data(&sp, 1.0);
        let mut p = problem(sp, ll_preset(), data);
        p.setting = Setting::Graded;
        assert!(matches!(solve_cauchy(&p, &cfg(), 1.0), Err(Error::Config(_))));
        p.setting = Setting::Compact;
        p.convention = SobolevConvention::Graded;
        assert!(matches!(solve_cauchy(&p, &cfg(), 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn misaligned_data_and_bad_delta() {
        let sp = abstract_spectrum(&[(2.0, 1.0), (3.0, 1.0)], None).unwrap();
        let p = problem(sp.clone(), ll_preset(), SpectralState::zeros(1));
        assert!(matches!(solve_cauchy(&p, &cfg(), 1.0), Err(Error::Contract(_))));
        let p = problem(sp.clone(), ll_preset(), unit_initial_data(&sp, 0.0));
        assert!(solve_cauchy(&p, &cfg(), 0.0).is_err());
    }

    #[test]
    fn zero_data_gives_zero_ratios() {
        let sp = torus_spectrum(1, 4).unwrap();
        let p = problem(sp.clone(), ll_preset(), SpectralState::zeros(sp.len()));
        let r = solve_cauchy(&p, &cfg(), 12.6).unwrap();
        assert_eq!(r.empirical_c, 0.0);
        assert!(r.per_mode_amplification.is_empty() && r.fitted_exponent.is_none());
    }

    #[test]
    fn homogeneous_zero_mode_only_is_degenerate() {
        let sp = torus_spectrum(1, 2).unwrap();
        let mut data = SpectralState::zeros(sp.len());
        data.entries[0] = (c(0.0, 0.0), c(1.0, 0.0));
        let mut p = problem(sp, ll_preset(), data);
        p.convention = SobolevConvention::Homogeneous;
        assert!(solve_cauchy(&p, &cfg(), 12.6).unwrap().empirical_c == 0.0);
        p.convention = SobolevConvention::Inhomogeneous;
        assert!(solve_cauchy(&p, &cfg(), 12.6).unwrap().empirical_c > 0.0);
    }

    #[test]
    fn fit_needs_four_modes() {
        let sp = abstract_spectrum(&[(8.0, 1.0)], None).unwrap();
        let p = problem(sp.clone(), ll_preset(), unit_initial_data(&sp, 0.0));
        let r = solve_cauchy(&p, &cfg(), 12.6).unwrap();
        assert!(matches!(fit_loss_exponent(&r), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn constant_coefficient_exponent_is_flat() {
        let grid: Vec<(f64, f64)> = contrast_grid::<f64>().into_iter().map(|l| (l, 1.0)).collect();
        let sp = abstract_spectrum(&grid, None).unwrap();
        let p = problem(sp.clone(), CoefficientSpec::constant(4.0, 1.0).unwrap(), unit_initial_data(&sp, 2.0));
        let r = solve_cauchy(&p, &cfg(), 12.0).unwrap();
        assert!(fit_loss_exponent(&r).unwrap().abs() < 0.01);
    }

    #[test]
    fn random_data_extends_under_truncation_growth() {
        let small = torus_spectrum::<f64>(1, 8).unwrap();
        let large = torus_spectrum::<f64>(1, 16).unwrap();
        let ds = random_initial_data(&small, 42, 2.0);
        let dl = random_initial_data(&large, 42, 2.0);
        assert_eq!(&dl.entries[..small.len()], &ds.entries[..]);
        assert_ne!(random_initial_data(&small, 43, 2.0), ds);
    }

    #[test]
    fn report_csv_and_json() {
        let sp = torus_spectrum(1, 4).unwrap();
        let p = problem(sp.clone(), ll_preset(), random_initial_data(&sp, 1, 2.0));
        let r = solve_cauchy(&p, &IntegratorConfig { report_samples: 4, ..cfg() }, 12.6).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,norm_u,norm_ut,rhs_u0,rhs_u1,C_t\n"));
        assert_eq!(text.lines().count(), 6);
        let mut js = Vec::new();
        r.write_json(&mut js).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
        assert!(v["constants"]["delta_min"].as_f64().unwrap() > 11.9);
        assert_eq!(v["per_mode"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn theorem_check_flags_growth() {
        let sp = torus_spectrum(1, 4).unwrap();
        let p = problem(sp.clone(), ll_preset(), random_initial_data(&sp, 1, 2.0));
        let r = solve_cauchy(&p, &cfg(), 12.6).unwrap();
        assert!(verify_theorem(&r, &r, 0.1).passed);
        let mut grown = r.clone();
        grown.empirical_c *= 1.2;
        let chk = verify_theorem(&r, &grown, 0.1);
        assert!(!chk.passed && (chk.relative_change - 0.2).abs() < 1e-12);
    }

    #[test]
    fn contrast_preconditions() {
        let (_, params) = oscillatory_preset::<f64>();
        let cfg = IntegratorConfig::with_dt(1e-3);
        assert!(hoelder_contrast(1.0, &[8.0, 16.0], params, 1.0, &cfg).is_err());
        assert!(hoelder_contrast(0.5, &[16.0, 8.0], params, 1.0, &cfg).is_err());
    }

    #[test]
    fn upper_half_slope_monotonicity() {
        let d = ContrastData {
            lambdas: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            amplifications: vec![1.0; 5],
            local_slopes: vec![0.5, 0.1, 0.2, 0.3],
        };
        assert!(d.upper_half_nondecreasing());
        let d = ContrastData { local_slopes: vec![0.5, 0.1, 0.3, 0.2], ..d };
        assert!(!d.upper_half_nondecreasing());
    }
}
