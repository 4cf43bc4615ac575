//! Subcommand bodies. Each returns the files it wrote and any soft failures.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{fit_relaxation, sample_trajectory, BandWindow, FullDressedState, RelaxationFit};
use crate::hamiltonian::AtomicOp;
use crate::pipeline::{flat_variant, run_point, PointResult};
use crate::rates::{HypothesisReport, RateSet};
use crate::spectrum::{evaluate_density, multiplet_ratio, quality_factor, QualityFactor, Spectrum};
use crate::Level;

use super::config::{Format, RunConfig};
use super::output::{float, write_csv, write_json};
use super::suites::{run_all, Status, Suite};
use super::{CliError, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipletSummary {
    pub q: i64,
    pub weight: f64,
    pub lines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub omega_l: f64,
    pub omega_gap: f64,
    pub n_levels: usize,
    pub pi_1: f64,
    pub pi_2: f64,
    pub gamma_coh: f64,
    pub gamma_pop: f64,
    pub total_emission_rate: f64,
    pub multiplets: Vec<MultipletSummary>,
    /// `I^(q)/I^(1)` for `0 ≤ q ≤ q_max`.
    pub ratios_to_mollow: BTreeMap<String, Option<f64>>,
    /// `I_+^(0)/I^(1)` with the true form factor and with it frozen at `ω_L`.
    pub low_frequency_ratio: Option<f64>,
    pub low_frequency_ratio_flat: Option<f64>,
    pub quality_factor: Option<QualityFactor>,
    pub hypothesis: HypothesisReport,
}

fn summarize(cfg: &RunConfig, p: &PointResult, flat: Option<&Spectrum>) -> Summary {
    let s = &p.spectrum;
    let r = &p.rates;
    let mut qs: Vec<i64> = s.lines.iter().map(|l| l.q).collect();
    qs.dedup();
    let multiplets = qs
        .iter()
        .map(|&q| MultipletSummary {
            q,
            weight: s.multiplet_weight(q),
            lines: s.multiplet(q).count(),
        })
        .collect();
    let ratios_to_mollow = (0..=cfg.numerics.q_max)
        .map(|q| (format!("I^({q})/I^(1)"), multiplet_ratio(s, q, 1).ok()))
        .collect();
    Summary {
        omega_l: r.omega_l,
        omega_gap: r.omega_gap,
        n_levels: p.solution.n_levels,
        pi_1: r.pi_1,
        pi_2: r.pi_2,
        gamma_coh: r.gamma_coh,
        gamma_pop: r.gamma_pop,
        total_emission_rate: r.emission_rate(),
        multiplets,
        ratios_to_mollow,
        low_frequency_ratio: multiplet_ratio(s, 0, 1).ok(),
        low_frequency_ratio_flat: flat.and_then(|f| multiplet_ratio(f, 0, 1).ok()),
        quality_factor: quality_factor(s).ok(),
        hypothesis: r.hypothesis.clone(),
    }
}

fn hypothesis_failures(r: &RateSet) -> Vec<String> {
    r.hypothesis
        .warnings()
        .map(|c| format!("hypothesis {}: {:.3e} > {}", c.name, c.value, c.threshold))
        .collect()
}

pub fn cmd_spectrum(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let pcfg = cfg.pipeline();
    let p = run_point(&cfg.spec(), &cfg.form_factor, &pcfg)?;
    let flat = flat_variant(&p, &cfg.form_factor, &pcfg)?;
    let density = evaluate_density(&p.spectrum, &cfg.grid()).map_err(crate::Error::from)?;
    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        let rows: Vec<Vec<String>> = p
            .spectrum
            .lines
            .iter()
            .map(|l| {
                vec![
                    l.q.to_string(),
                    l.kind.label().to_string(),
                    float(l.center),
                    float(l.width),
                    float(l.weight),
                ]
            })
            .collect();
        files.push(write_csv(dir.join("lines.csv"), &["q", "kind", "center", "width", "weight"], &rows)?);
        let rows: Vec<Vec<String>> = density.iter().map(|&(w, d)| vec![float(w), float(d)]).collect();
        files.push(write_csv(dir.join("density.csv"), &["omega", "density"], &rows)?);
    }
    if cfg.wants(Format::Json) {
        files.push(write_json(dir.join("rates.json"), &p.rates)?);
        files.push(write_json(dir.join("summary.json"), &summarize(cfg, &p, Some(&flat)))?);
    }
    Ok(Outcome {
        files,
        failures: hypothesis_failures(&p.rates),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub omega_gap: f64,
    /// Gap of the same point with the diagonal (permanent-dipole) terms removed.
    pub omega_gap_0: f64,
    pub pi_1: f64,
    pub pi_2: f64,
    pub multiplet_weights: Vec<f64>,
    pub ratio_true: Option<f64>,
    pub ratio_flat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub point: Option<SweepPoint>,
    pub error: Option<String>,
}

fn without_dipole(cfg: &RunConfig) -> RunConfig {
    let mut c = cfg.clone();
    c.hamiltonian.asym = 0.0;
    if let Some(terms) = &mut c.hamiltonian.terms {
        terms.retain(|t| !matches!(t.atomic_op, AtomicOp::ExcProj | AtomicOp::GndProj));
    }
    c
}

fn sweep_point(cfg: &RunConfig, parameter: &str, value: f64) -> Result<SweepPoint, CliError> {
    let c = cfg.with_parameter(parameter, value)?;
    let pcfg = c.pipeline();
    let p = run_point(&c.spec(), &c.form_factor, &pcfg)?;
    let flat = flat_variant(&p, &c.form_factor, &pcfg)?;
    let bare = without_dipole(&c);
    let omega_gap_0 = crate::dressing::dress(&bare.spec(), &pcfg.dressing)?.omega_gap;
    Ok(SweepPoint {
        omega_gap: p.omega_gap(),
        omega_gap_0,
        pi_1: p.rates.pi_1,
        pi_2: p.rates.pi_2,
        multiplet_weights: (0..=c.numerics.q_max).map(|q| p.spectrum.multiplet_weight(q)).collect(),
        ratio_true: multiplet_ratio(&p.spectrum, 0, 1).ok(),
        ratio_flat: multiplet_ratio(&flat, 0, 1).ok(),
    })
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("the sweep command needs a [sweep] section".into()))?;
    Ok(sweep
        .values
        .par_iter()
        .map(|&value| match sweep_point(cfg, &sweep.parameter, value) {
            Ok(point) => SweepRow {
                value,
                point: Some(point),
                error: None,
            },
            Err(e) => SweepRow {
                value,
                point: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

pub fn cmd_sweep(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let rows = run_sweep(cfg)?;
    let parameter = &cfg.sweep.as_ref().expect("checked by run_sweep").parameter;
    let q_max = cfg.numerics.q_max;
    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut header: Vec<String> = vec![
            parameter.clone(),
            "omega_gap".into(),
            "omega_gap_0".into(),
            "gap_ratio".into(),
            "pi_1".into(),
            "pi_2".into(),
        ];
        header.extend((0..=q_max).map(|q| format!("I_{q}")));
        header.extend(["ratio_true".into(), "ratio_flat".into(), "errors".into()]);
        let opt = |x: Option<f64>| x.map_or_else(String::new, float);
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|row| {
                let mut r = vec![float(row.value)];
                match &row.point {
                    Some(p) => {
                        r.extend([
                            float(p.omega_gap),
                            float(p.omega_gap_0),
                            float(p.omega_gap / p.omega_gap_0),
                            float(p.pi_1),
                            float(p.pi_2),
                        ]);
                        r.extend(p.multiplet_weights.iter().map(|&w| float(w)));
                        r.extend([opt(p.ratio_true), opt(p.ratio_flat)]);
                    }
                    None => r.extend(std::iter::repeat_n(String::new(), header.len() - 2)),
                }
                r.push(row.error.clone().unwrap_or_default());
                r
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        files.push(write_csv(dir.join("sweep.csv"), &header, &table)?);
    }
    if cfg.wants(Format::Json) {
        files.push(write_json(dir.join("sweep.json"), &rows)?);
    }
    let failures = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{parameter} = {}: {e}", r.value)))
        .collect();
    Ok(Outcome { files, failures })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub all_pass: bool,
    pub suites: Vec<Suite>,
}

pub fn cmd_validate(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let suites = run_all(cfg);
    for s in &suites {
        let worst = s
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect::<Vec<_>>()
            .join(", ");
        let status = match s.status {
            Status::Pass => "pass",
            Status::Warn => "warn",
            Status::Fail => "FAIL",
        };
        match (&s.error, worst.is_empty()) {
            (Some(e), _) => println!("{status:4} {}: {e}", s.name),
            (None, true) => println!("{status:4} {} ({} checks)", s.name, s.checks.len()),
            (None, false) => println!("{status:4} {}: {worst}", s.name),
        }
    }
    let failures: Vec<String> = suites
        .iter()
        .filter(|s| s.status != Status::Pass)
        .map(|s| format!("suite {} did not pass", s.name))
        .collect();
    let report = ValidationReport {
        all_pass: failures.is_empty(),
        suites,
    };
    let files = vec![write_json(dir.join("validate.json"), &report)?];
    Ok(Outcome { files, failures })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsReport {
    pub time_unit: f64,
    pub horizon: f64,
    pub dt: f64,
    pub window_bands: usize,
    pub fitted: RelaxationFit,
    pub analytic_gamma_pop: f64,
    pub analytic_gamma_coh: f64,
    pub final_pi_1: f64,
    pub steady_pi_1: f64,
    pub max_trace_error: f64,
}

pub fn cmd_dynamics(
    cfg: &RunConfig,
    dir: &Path,
    horizon: Option<f64>,
    dt: Option<f64>,
) -> Result<Outcome, CliError> {
    let d = &cfg.dynamics;
    let horizon = horizon.unwrap_or(d.horizon);
    let dt = dt.unwrap_or(d.dt);
    if !(horizon > 0.0 && dt > 0.0) {
        return Err(CliError::Config("horizon and dt must be positive".into()));
    }
    let p = run_point(&cfg.spec(), &cfg.form_factor, &cfg.pipeline())?;
    let r = &p.rates;
    let unit = if r.gamma_pop > 0.0 { 1.0 / r.gamma_pop } else { 1.0 / r.omega_l };
    let window = BandWindow::new(0, d.window_bands);
    let start = FullDressedState::pure(
        window,
        &[
            (Level::One, window.hi(), Complex64::new(d.initial_p1.sqrt(), 0.0)),
            (Level::Two, window.hi(), Complex64::new((1.0 - d.initial_p1).sqrt(), 0.0)),
        ],
        r.omega_l,
        r.omega_gap,
    )
    .map_err(crate::Error::from)?;
    let (traj, _) =
        sample_trajectory(&start, r, dt * unit, horizon * unit, d.samples).map_err(crate::Error::from)?;
    let fitted = fit_relaxation(&traj, r.pi_1);
    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        let rows: Vec<Vec<String>> = traj
            .iter()
            .map(|t| vec![float(t.t), float(t.pi_1), float(t.pi_2), float(t.coherence), float(t.trace_error)])
            .collect();
        files.push(write_csv(
            dir.join("trajectory.csv"),
            &["t", "pi_1", "pi_2", "abs_sigma_12", "trace_error"],
            &rows,
        )?);
    }
    let report = DynamicsReport {
        time_unit: unit,
        horizon: horizon * unit,
        dt: dt * unit,
        window_bands: d.window_bands,
        fitted,
        analytic_gamma_pop: r.gamma_pop,
        analytic_gamma_coh: r.gamma_coh,
        final_pi_1: traj.last().map_or(f64::NAN, |t| t.pi_1),
        steady_pi_1: r.pi_1,
        max_trace_error: traj.iter().map(|t| t.trace_error).fold(0.0, f64::max),
    };
    if cfg.wants(Format::Json) {
        files.push(write_json(dir.join("dynamics.json"), &report)?);
    }
    Ok(Outcome {
        files,
        failures: hypothesis_failures(r),
    })
}
