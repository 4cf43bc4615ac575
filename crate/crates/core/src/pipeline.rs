//! End-to-end evaluation of one parameter point.

use serde::Serialize;

use crate::dressing::{
    amplitudes, coefficients, dress, AmplitudeTable, DressedSolution, DressingConfig,
    TransitionCoefficients,
};
use crate::hamiltonian::HamiltonianSpec;
use crate::rates::{build_rates, FormFactor, RateSet, DEFAULT_THRESHOLD};
use crate::spectrum::{build_lines, Spectrum};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub dressing: DressingConfig,
    pub hypothesis_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dressing: DressingConfig::default(),
            hypothesis_threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub solution: DressedSolution,
    pub table: AmplitudeTable,
    pub coefficients: TransitionCoefficients,
    pub rates: RateSet,
    pub spectrum: Spectrum,
}

impl PointResult {
    pub fn omega_gap(&self) -> f64 {
        self.solution.omega_gap
    }
}

/// Dressing, coefficients, rates and lines for an already-built spec.
pub fn run_point(spec: &HamiltonianSpec, ff: &FormFactor, cfg: &PipelineConfig) -> Result<PointResult> {
    spec.validate()?;
    let solution = dress(spec, &cfg.dressing)?;
    let table = amplitudes(&solution, &cfg.dressing)?;
    let coefficients = coefficients(&table, &cfg.dressing);
    let rates = build_rates(
        &coefficients,
        ff,
        spec.omega_l,
        solution.omega_gap,
        cfg.hypothesis_threshold,
    )?;
    let spectrum = build_lines(&rates)?;
    Ok(PointResult {
        solution,
        table,
        coefficients,
        rates,
        spectrum,
    })
}

/// Rates rebuilt with the form factor frozen at its laser-frequency value,
/// i.e. ignoring how the decay rates depend on the dressed energies.
pub fn flat_variant(point: &PointResult, ff: &FormFactor, cfg: &PipelineConfig) -> Result<Spectrum> {
    let flat = FormFactor::flat(ff.eval(point.rates.omega_l));
    let rates = build_rates(
        &point.coefficients,
        &flat,
        point.rates.omega_l,
        point.rates.omega_gap,
        cfg.hypothesis_threshold,
    )?;
    Ok(build_lines(&rates)?)
}
