//! Per-mode integration and energy estimates for the wave equation
//! `∂ₜ²u − a(t) Δu = 0` with a Log-Lipschitz time coefficient.
//!
//! The core is generic over the scalar type; `f64` aliases are exported at
//! the crate root.

pub mod cauchy;
pub mod coefficients;
pub mod energy;
pub mod error;
pub mod linalg;
pub mod mode_solver;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CoefficientSpec64 = coefficients::CoefficientSpec<f64>;
pub type CoefficientSpec32 = coefficients::CoefficientSpec<f32>;
pub type Mollifier64 = coefficients::Mollifier<f64>;
pub type Spectrum64 = spectrum::Spectrum<f64>;
pub type SpectralState64 = spectrum::SpectralState<f64>;
pub type ModeState64 = mode_solver::ModeState<f64>;
pub type ModeTrajectory64 = mode_solver::ModeTrajectory<f64>;
pub type IntegratorConfig64 = mode_solver::IntegratorConfig<f64>;
pub type EnergyConstants64 = energy::EnergyConstants<f64>;
pub type SolutionReport64 = cauchy::SolutionReport<f64>;
pub type CauchyProblem64 = cauchy::CauchyProblem<f64>;
