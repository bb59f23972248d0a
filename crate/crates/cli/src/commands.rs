use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use loglip_wave::cauchy::{
    amplification_sweep, assemble_report, hoelder_contrast, report_times, solve_modes, verify_theorem,
    ContrastData,
};
use loglip_wave::coefficients::CoefficientSpec;
use loglip_wave::energy::{
    amplification_constant, compute_constants, measure_estimates, measured_bounds, verify_w_monotone, TOL_MONO,
};
use loglip_wave::mode_solver::{integrate_mode, IntegratorConfig, ModeState};
use loglip_wave::scalar::ls_slope;
use loglip_wave::spectrum::fmt_num;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Axis, CliError, Context, Format, Suite};

/// Estimate terms may exceed their bounds by this factor.
const ESTIMATE_SLACK: f64 = 1.05;
/// Allowed excess of a fitted or local amplification slope over `δT`.
const SLOPE_SLACK: f64 = 0.1;
const LL_GRID: usize = 2049;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn unit_state() -> ModeState<f64> {
    let c = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ModeState::new(c, c)
}

fn check_grid(name: &str, grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Config(format!("{name} grid has non-finite entries")));
    }
    Ok(())
}

#[derive(Serialize)]
struct ConstantsOut {
    mollifier: String,
    b0: f64,
    #[serde(rename = "M1")]
    m1: f64,
    #[serde(rename = "M2")]
    m2: f64,
    #[serde(rename = "M3")]
    m3: f64,
    delta_min: f64,
    delta: f64,
}

pub fn constants(ctx: &Context, format: Format) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let psi = cfg.mollifier()?;
    let k = compute_constants(&psi, cfg.coefficient.b0())?;
    let out = ConstantsOut {
        mollifier: psi.name().to_string(),
        b0: cfg.coefficient.b0(),
        m1: k.m1,
        m2: k.m2,
        m3: k.m3,
        delta_min: k.delta_min,
        delta: cfg.delta()?,
    };
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&out).map_err(|e| CliError::Config(e.to_string()))?)
        }
        Format::Text => {
            println!("mollifier  {}", out.mollifier);
            println!("b0         {}", out.b0);
            println!("M1         {}", out.m1);
            println!("M2         {}", out.m2);
            println!("M3         {}", out.m3);
            println!("delta_min  {}", out.delta_min);
            println!("delta      {}", out.delta);
        }
    }
    Ok(())
}

fn safe_name(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn solve_and_write(ctx: &Context, spectrum: loglip_wave::spectrum::Spectrum<f64>) -> Result<loglip_wave::SolutionReport64, CliError> {
    let cfg = &ctx.config;
    let problem = cfg.problem(spectrum, ctx.seed)?;
    let integ = cfg.integrator();
    let delta = cfg.delta()?;
    let modes = solve_modes(&problem, &integ)?;
    let times = report_times(problem.t_final, integ.report_samples);
    let report = assemble_report(&problem, &modes, times.clone(), delta)?;
    let mut csv_out = create(&ctx.out.join("report.csv"))?;
    report.write_csv(&mut csv_out)?;
    let mut json_out = create(&ctx.out.join("report.json"))?;
    report.write_json(&mut json_out)?;
    if ctx.dump_modes {
        for m in &modes {
            let path = ctx.out.join("modes").join(format!("{}.csv", safe_name(&m.label)));
            m.write_csv(&times, create(&path)?)?;
        }
    }
    Ok(report)
}

pub fn solve(ctx: &Context) -> Result<(), CliError> {
    let report = solve_and_write(ctx, ctx.config.spectrum()?)?;
    println!("delta           {}", report.delta);
    println!("loss            {}", report.loss);
    println!("empirical_C     {}", report.empirical_c);
    match report.fitted_exponent {
        Some(x) => println!("fitted_exponent {x}"),
        None => println!("fitted_exponent n/a"),
    }
    println!("wrote {}", ctx.out.join("report.csv").display());
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: Option<f64>,
    limit: Option<f64>,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl Check {
    fn at_most(name: String, value: f64, limit: f64) -> Self {
        Self { name, value: Some(value), limit: Some(limit), passed: value.is_finite() && value <= limit, note: None }
    }

    fn finite(name: String, value: f64) -> Self {
        Self { name, value: Some(value), limit: None, passed: value.is_finite(), note: None }
    }

    fn failed(name: String, limit: f64, note: String) -> Self {
        Self { name, value: None, limit: Some(limit), passed: false, note: Some(note) }
    }
}

#[derive(Serialize)]
struct VerifyOut {
    suite: &'static str,
    passed: bool,
    delta: f64,
    delta_min: f64,
    warnings: Vec<String>,
    checks: Vec<Check>,
}

pub fn verify(ctx: &Context, suite: Suite) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let delta = cfg.delta()?;
    let delta_min = cfg.delta_min()?;
    let mut warnings = Vec::new();
    let (name, checks) = match suite {
        Suite::WMonotone => ("w_monotone", w_monotone_checks(ctx, delta)?),
        Suite::Estimates => ("estimates", estimate_checks(ctx)?),
        Suite::Theorem => {
            if delta <= delta_min {
                let w = format!(
                    "delta = {delta} does not exceed delta_min = {delta_min}; the energy estimate's hypotheses are unmet"
                );
                eprintln!("warning: {w}");
                warnings.push(w);
            }
            ("theorem", theorem_checks(ctx)?)
        }
        Suite::Contrast => ("contrast", contrast_checks(ctx, delta)?),
    };
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        let value = c.value.map(fmt_num).unwrap_or_else(|| "n/a".into());
        let note = c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
        let limit = c.limit.map(|l| format!(" <= {}", fmt_num(l))).unwrap_or_else(|| " finite".into());
        println!("[{tag}] {}: {value}{limit}{note}", c.name);
    }
    let out = VerifyOut { suite: name, passed, delta, delta_min, warnings, checks };
    write_json(&ctx.out.join(format!("verify_{name}.json")), &out)?;
    if passed {
        Ok(())
    } else {
        let failed = out.checks.iter().filter(|c| !c.passed).count();
        Err(CliError::Check(format!("{failed} of {} {name} checks failed", out.checks.len())))
    }
}

fn w_monotone_checks(ctx: &Context, delta: f64) -> Result<Vec<Check>, CliError> {
    let cfg = &ctx.config;
    let grid = cfg.grids.lambda.clone().unwrap_or_else(|| vec![8.0, 16.0, 32.0, 64.0, 128.0]);
    check_grid("lambda", &grid)?;
    let psi = cfg.mollifier()?;
    let integ = cfg.integrator();
    let a = &cfg.coefficient;
    grid.par_iter()
        .map(|&lambda| {
            let name = format!("w_increment lambda={lambda}");
            let tr = integrate_mode(lambda, a, unit_state(), cfg.t_final(), &integ)?;
            match verify_w_monotone(&tr, a, &psi, delta) {
                Ok(inc) => Ok(Check::at_most(name, inc, TOL_MONO)),
                Err(e @ loglip_wave::Error::Inapplicable(_)) => Ok(Check::failed(name, TOL_MONO, e.to_string())),
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}

fn estimate_checks(ctx: &Context) -> Result<Vec<Check>, CliError> {
    let cfg = &ctx.config;
    let grid = cfg.epsilon_grid();
    check_grid("epsilon", &grid)?;
    let psi = cfg.mollifier()?;
    let a = &cfg.coefficient;
    let eps_max = grid.iter().copied().fold(0.0, f64::max);
    let bounds = measured_bounds(a, &psi, eps_max, LL_GRID)?;
    let t = cfg.estimate_time();
    let mut checks = Vec::new();
    for &eps in &grid {
        let e = measure_estimates(a, &psi, eps, t)?;
        let l = eps.ln().abs();
        checks.push(Check::at_most(format!("e1/|ln eps| eps={eps}"), e.e1 / l, ESTIMATE_SLACK * bounds.m1));
        checks.push(Check::at_most(format!("e2/|ln eps| eps={eps}"), e.e2 / l, ESTIMATE_SLACK * bounds.m1));
        checks.push(Check::at_most(format!("e3/(eps |ln eps|) eps={eps}"), e.e3 / (eps * l), ESTIMATE_SLACK * bounds.m3));
    }
    Ok(checks)
}

fn theorem_checks(ctx: &Context) -> Result<Vec<Check>, CliError> {
    let cfg = &ctx.config;
    let source = cfg.spectrum.as_ref().ok_or_else(|| CliError::Config("config has no spectrum".into()))?;
    let doubled_spectrum = source.doubled()?;
    let base = solve_and_write(ctx, source.build()?)?;
    let doubled = {
        let problem = cfg.problem(doubled_spectrum, ctx.seed)?;
        loglip_wave::cauchy::solve_cauchy(&problem, &cfg.integrator(), cfg.delta()?)?
    };
    let chk = verify_theorem(&base, &doubled, cfg.theorem_tol);
    let mut checks = vec![
        Check::finite("empirical_C".into(), chk.empirical_c),
        Check::finite("empirical_C doubled".into(), chk.doubled_c),
        Check::at_most("|relative change under doubling|".into(), chk.relative_change.abs(), cfg.theorem_tol),
    ];
    if base.convention == loglip_wave::spectrum::SobolevConvention::Inhomogeneous {
        checks.push(Check::at_most("C_t at t=0".into(), chk.initial_ratio, 1.0 + 1e-12));
    } else {
        checks.push(Check::finite("C_t at t=0".into(), chk.initial_ratio));
    }
    Ok(checks)
}

fn write_contrast(path: &Path, hoelder: &ContrastData<f64>, reference: &ContrastData<f64>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| CliError::Config(e.to_string());
    w.write_record(["lambda", "hoelder_amplification", "hoelder_local_slope", "coefficient_amplification", "coefficient_local_slope"])
        .map_err(io)?;
    for i in 0..hoelder.lambdas.len() {
        let slope = |d: &ContrastData<f64>| if i == 0 { String::new() } else { fmt_num(d.local_slopes[i - 1]) };
        w.write_record([
            fmt_num(hoelder.lambdas[i]),
            fmt_num(hoelder.amplifications[i]),
            slope(hoelder),
            fmt_num(reference.amplifications[i]),
            slope(reference),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn contrast_checks(ctx: &Context, delta: f64) -> Result<Vec<Check>, CliError> {
    let cfg = &ctx.config;
    let grid = cfg.lambda_grid();
    check_grid("lambda", &grid)?;
    let c = cfg.contrast();
    let t = cfg.t_final();
    let integ = IntegratorConfig { dt_max: c.dt_max, ..cfg.integrator() };
    let hoelder = hoelder_contrast(c.alpha, &grid, c.params(), t, &integ)?;
    let reference = amplification_sweep(&cfg.coefficient, &grid, t, &integ)?;
    write_contrast(&ctx.out.join("contrast.csv"), &hoelder, &reference)?;
    let nondecreasing = hoelder.upper_half_nondecreasing();
    Ok(vec![
        Check {
            name: "hoelder local slope nondecreasing on upper half-grid".into(),
            value: Some(if nondecreasing { 0.0 } else { 1.0 }),
            limit: Some(0.0),
            passed: nondecreasing,
            note: None,
        },
        Check::at_most("coefficient max local slope".into(), reference.max_slope(), delta * t + SLOPE_SLACK),
    ])
}

pub fn sweep(ctx: &Context, over: Axis) -> Result<(), CliError> {
    let (name, header, rows): (&str, Vec<&str>, Vec<Vec<String>>) = match over {
        Axis::Lambda => ("lambda", vec!["lambda", "amplification", "m4", "bound", "max_w_increment"], lambda_rows(ctx)?),
        Axis::Epsilon => ("epsilon", vec!["eps", "e1", "e2", "e3", "e1_over_log", "e3_over_eps_log"], epsilon_rows(ctx)?),
        Axis::B0 => ("b0", vec!["b0", "M1", "M2", "M3", "delta_min"], b0_rows(ctx)?),
        Axis::Alpha => ("alpha", vec!["alpha", "fitted_slope", "max_local_slope", "last_local_slope"], alpha_rows(ctx)?),
    };
    let path = ctx.out.join(format!("sweep_{name}.csv"));
    let mut w = csv::Writer::from_writer(create(&path)?);
    let io = |e: csv::Error| CliError::Config(e.to_string());
    w.write_record(&header).map_err(io)?;
    for r in &rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()?;
    if let Axis::Lambda = over {
        let xs: Vec<f64> = rows.iter().map(|r| r[0].parse::<f64>().unwrap_or(f64::NAN).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[1].parse::<f64>().unwrap_or(f64::NAN).ln()).collect();
        if xs.len() >= 2 {
            println!("fitted_exponent {}", ls_slope(&xs, &ys));
        }
    }
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn lambda_rows(ctx: &Context) -> Result<Vec<Vec<String>>, CliError> {
    let cfg = &ctx.config;
    let grid = cfg.lambda_grid();
    check_grid("lambda", &grid)?;
    let psi = cfg.mollifier()?;
    let integ = cfg.integrator();
    let delta = cfg.delta()?;
    let t = cfg.t_final();
    let a = &cfg.coefficient;
    grid.par_iter()
        .map(|&lambda| {
            let tr = integrate_mode(lambda, a, unit_state(), t, &integ)?;
            let amp = tr.amplification()?;
            let m4 = amplification_constant(a, &psi, lambda, t).ok();
            let bound = m4.map(|m| m * lambda.powf(delta * t));
            let inc = verify_w_monotone(&tr, a, &psi, delta).ok();
            Ok(vec![fmt_num(lambda), fmt_num(amp), opt(m4), opt(bound), opt(inc)])
        })
        .collect()
}

fn epsilon_rows(ctx: &Context) -> Result<Vec<Vec<String>>, CliError> {
    let cfg = &ctx.config;
    let grid = cfg.epsilon_grid();
    check_grid("epsilon", &grid)?;
    let psi = cfg.mollifier()?;
    let t = cfg.estimate_time();
    grid.iter()
        .map(|&eps| {
            let e = measure_estimates(&cfg.coefficient, &psi, eps, t)?;
            let l = eps.ln().abs();
            Ok(vec![fmt_num(eps), fmt_num(e.e1), fmt_num(e.e2), fmt_num(e.e3), fmt_num(e.e1 / l), fmt_num(e.e3 / (eps * l))])
        })
        .collect()
}

fn b0_rows(ctx: &Context) -> Result<Vec<Vec<String>>, CliError> {
    let cfg = &ctx.config;
    let grid = cfg.grids.b0.clone().unwrap_or_default();
    check_grid("b0", &grid)?;
    let psi = cfg.mollifier()?;
    grid.iter()
        .map(|&b0| {
            let spec: CoefficientSpec<f64> = cfg.coefficient.with_b0(b0)?;
            let k = compute_constants(&psi, spec.b0())?;
            Ok(vec![fmt_num(b0), fmt_num(k.m1), fmt_num(k.m2), fmt_num(k.m3), fmt_num(k.delta_min)])
        })
        .collect()
}

fn alpha_rows(ctx: &Context) -> Result<Vec<Vec<String>>, CliError> {
    let cfg = &ctx.config;
    let grid = cfg.grids.alpha.clone().unwrap_or_default();
    check_grid("alpha", &grid)?;
    let lambdas = cfg.lambda_grid();
    let c = cfg.contrast();
    let integ = IntegratorConfig { dt_max: c.dt_max, ..cfg.integrator() };
    grid.iter()
        .map(|&alpha| {
            let d = hoelder_contrast(alpha, &lambdas, c.params(), cfg.t_final(), &integ)?;
            let xs: Vec<f64> = d.lambdas.iter().map(|l| l.ln()).collect();
            let ys: Vec<f64> = d.amplifications.iter().map(|a| a.ln()).collect();
            let last = d.local_slopes.last().copied();
            Ok(vec![fmt_num(alpha), fmt_num(ls_slope(&xs, &ys)), fmt_num(d.max_slope()), opt(last)])
        })
        .collect()
}
