use std::path::{Path, PathBuf};

use loglip_wave::cauchy::{
    random_initial_data, unit_initial_data, CauchyProblem, HoelderParams, Setting,
};
use loglip_wave::coefficients::{BumpShape, CoefficientSpec, Mollifier};
use loglip_wave::energy::compute_constants;
use loglip_wave::mode_solver::IntegratorConfig;
use loglip_wave::spectrum::{
    abstract_spectrum, su2_spectrum, torus_spectrum, SobolevConvention, SpectralState, Spectrum,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierConfig {
    #[serde(default = "default_mollifier")]
    pub name: String,
    /// Total Gauss-Legendre nodes on the support.
    #[serde(default = "default_quad_points")]
    pub quad_points: usize,
}

fn default_mollifier() -> String {
    "poly_bump".into()
}

fn default_quad_points() -> usize {
    256
}

impl Default for MollifierConfig {
    fn default() -> Self {
        Self { name: default_mollifier(), quad_points: default_quad_points() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumGenerator {
    Torus { dim: usize, k_max: usize },
    Su2 { l_max: usize },
    Abstract { entries: Vec<[f64; 2]>, #[serde(default)] nu: Option<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumSource {
    Generated(SpectrumGenerator),
    Explicit(Spectrum<f64>),
}

impl SpectrumSource {
    pub fn build(&self) -> Result<Spectrum<f64>, CliError> {
        match self {
            SpectrumSource::Explicit(s) => Ok(s.clone()),
            SpectrumSource::Generated(g) => Ok(g.build()?),
        }
    }

    /// Same generator with the truncation doubled.
    pub fn doubled(&self) -> Result<Spectrum<f64>, CliError> {
        match self {
            SpectrumSource::Generated(SpectrumGenerator::Torus { dim, k_max }) => Ok(torus_spectrum(*dim, 2 * k_max)?),
            SpectrumSource::Generated(SpectrumGenerator::Su2 { l_max }) => Ok(su2_spectrum(2 * l_max)?),
            _ => Err(CliError::Config("theorem suite needs a torus or su2 spectrum generator".into())),
        }
    }
}

impl SpectrumGenerator {
    fn build(&self) -> loglip_wave::Result<Spectrum<f64>> {
        match self {
            SpectrumGenerator::Torus { dim, k_max } => torus_spectrum(*dim, *k_max),
            SpectrumGenerator::Su2 { l_max } => su2_spectrum(*l_max),
            SpectrumGenerator::Abstract { entries, nu } => {
                let pairs: Vec<(f64, f64)> = entries.iter().map(|e| (e[0], e[1])).collect();
                abstract_spectrum(&pairs, *nu)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDataConfig {
    /// Complex Gaussian `V(0)` per mode scaled by `λ^{-decay}`.
    Random {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_decay")]
        decay: f64,
    },
    /// `V(0) = λ^{-decay} (1, 1)/√2`.
    Unit {
        #[serde(default = "default_decay")]
        decay: f64,
    },
    /// CSV with `label,re_u,im_u,re_ut,im_ut`, relative to the config file.
    File { path: PathBuf },
}

fn default_decay() -> f64 {
    2.0
}

impl Default for InitialDataConfig {
    fn default() -> Self {
        InitialDataConfig::Random { seed: 0, decay: default_decay() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    #[serde(default)]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default)]
    pub b0: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    /// Time at which the estimate terms are measured.
    #[serde(default)]
    pub estimate_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContrastConfig {
    pub alpha: f64,
    pub a_c: f64,
    pub kappa: f64,
    pub t0: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Integrator step cap for the contrast runs.
    #[serde(default = "default_contrast_dt")]
    pub dt_max: f64,
}

fn default_contrast_dt() -> f64 {
    2e-6
}

impl Default for ContrastConfig {
    fn default() -> Self {
        let (alpha, p) = loglip_wave::cauchy::oscillatory_preset::<f64>();
        Self { alpha, a_c: p.a_c, kappa: p.kappa, t0: p.t0, beta: p.beta, dt_max: default_contrast_dt() }
    }
}

impl ContrastConfig {
    pub fn params(&self) -> HoelderParams<f64> {
        HoelderParams { a_c: self.a_c, kappa: self.kappa, t0: self.t0, beta: self.beta }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub coefficient: CoefficientSpec<f64>,
    #[serde(default)]
    pub mollifier: MollifierConfig,
    #[serde(default)]
    pub spectrum: Option<SpectrumSource>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(rename = "T", default)]
    pub t_final: Option<f64>,
    #[serde(default = "default_margin")]
    pub delta_margin: f64,
    /// Overrides `(1 + delta_margin) · delta_min`.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_convention")]
    pub convention: SobolevConvention,
    #[serde(default = "default_setting")]
    pub setting: Setting,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig<f64>>,
    #[serde(default)]
    pub initial_data: InitialDataConfig,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub contrast: Option<ContrastConfig>,
    #[serde(default = "default_theorem_tol")]
    pub theorem_tol: f64,
    /// Output directory used when `--out` is absent.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_margin() -> f64 {
    0.05
}

fn default_convention() -> SobolevConvention {
    SobolevConvention::Inhomogeneous
}

fn default_setting() -> Setting {
    Setting::Compact
}

fn default_theorem_tol() -> f64 {
    loglip_wave::cauchy::DEFAULT_THEOREM_TOL
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if !(cfg.delta_margin.is_finite() && cfg.delta_margin > -1.0) {
            return Err(CliError::Config("delta_margin must be finite and above -1".into()));
        }
        Ok(cfg)
    }

    pub fn mollifier(&self) -> Result<Mollifier<f64>, CliError> {
        let shape = BumpShape::by_name(&self.mollifier.name)?;
        Ok(Mollifier::with_nodes(shape, self.mollifier.quad_points)?)
    }

    pub fn delta_min(&self) -> Result<f64, CliError> {
        Ok(compute_constants(&self.mollifier()?, self.coefficient.b0())?.delta_min)
    }

    pub fn delta(&self) -> Result<f64, CliError> {
        match self.delta {
            Some(d) if d.is_finite() && d > 0.0 => Ok(d),
            Some(d) => Err(CliError::Config(format!("delta = {d} must be positive"))),
            None => Ok((1.0 + self.delta_margin) * self.delta_min()?),
        }
    }

    pub fn t_final(&self) -> f64 {
        self.t_final.unwrap_or_else(|| self.coefficient.t_final())
    }

    pub fn integrator(&self) -> IntegratorConfig<f64> {
        self.integrator.clone().unwrap_or_default()
    }

    pub fn spectrum(&self) -> Result<Spectrum<f64>, CliError> {
        self.spectrum.as_ref().ok_or_else(|| CliError::Config("config has no spectrum".into()))?.build()
    }

    pub fn initial_data(&self, spectrum: &Spectrum<f64>, seed: Option<u64>) -> Result<SpectralState<f64>, CliError> {
        match &self.initial_data {
            InitialDataConfig::Random { seed: s, decay } => Ok(random_initial_data(spectrum, seed.unwrap_or(*s), *decay)),
            InitialDataConfig::Unit { decay } => Ok(unit_initial_data(spectrum, *decay)),
            InitialDataConfig::File { path } => {
                let full = self.base_dir.join(path);
                let file = std::fs::File::open(&full)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", full.display())))?;
                Ok(SpectralState::read_csv(spectrum, file)?)
            }
        }
    }

    pub fn problem(&self, spectrum: Spectrum<f64>, seed: Option<u64>) -> Result<CauchyProblem<f64>, CliError> {
        let initial = self.initial_data(&spectrum, seed)?;
        let s = self.s.ok_or_else(|| CliError::Config("config has no Sobolev index s".into()))?;
        let p = CauchyProblem {
            spectrum,
            coefficient: self.coefficient.clone(),
            mollifier: self.mollifier()?,
            initial,
            s,
            t_final: self.t_final(),
            convention: self.convention,
            setting: self.setting,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        self.grids.lambda.clone().unwrap_or_else(loglip_wave::cauchy::contrast_grid)
    }

    pub fn epsilon_grid(&self) -> Vec<f64> {
        self.grids.epsilon.clone().unwrap_or_else(|| (3..=10).map(|k| 2f64.powi(-k)).collect())
    }

    pub fn estimate_time(&self) -> f64 {
        self.grids.estimate_time.unwrap_or(0.5 * self.coefficient.t_final())
    }

    pub fn contrast(&self) -> ContrastConfig {
        self.contrast.clone().unwrap_or_default()
    }
}
