//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dressing::DressingConfig;
use crate::hamiltonian::{standard_spec, CouplingTerm, HamiltonianSpec, DEFAULT_LEVELS};
use crate::pipeline::PipelineConfig;
use crate::rates::{FormFactor, DEFAULT_THRESHOLD};

use super::CliError;

/// Env var that overrides `[output] directory`.
pub const OUT_ENV: &str = "DRESSED_CASCADE_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    pub omega_0: f64,
    #[serde(default = "one")]
    pub omega_l: f64,
    #[serde(default)]
    pub rabi: f64,
    #[serde(default)]
    pub asym: f64,
    #[serde(default = "yes")]
    pub counter_rotating: bool,
    /// Explicit term list; replaces `rabi`, `asym` and `counter_rotating`.
    #[serde(default)]
    pub terms: Option<Vec<CouplingTerm>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub n_levels: usize,
    pub edge_fraction: f64,
    /// Highest multiplet reported in summaries and sweep columns.
    pub q_max: i64,
    pub n_independence_tol: f64,
    pub tail_mass: f64,
    pub prune: f64,
    pub hypothesis_threshold: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let d = DressingConfig::default();
        Self {
            n_levels: DEFAULT_LEVELS,
            edge_fraction: d.edge_fraction,
            q_max: 3,
            n_independence_tol: d.n_independence_tol,
            tail_mass: d.tail_mass,
            prune: d.prune,
            hypothesis_threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path such as `hamiltonian.asym`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            omega_min: 0.01,
            omega_max: 3.5,
            points: 3500,
        }
    }
}

/// Times are in units of `1/Γ_pop` (of `1/ω_L` when `Γ_pop = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub horizon: f64,
    pub dt: f64,
    pub window_bands: usize,
    /// Initial population of the upper dressed level; the rest sits in the lower one.
    pub initial_p1: f64,
    pub samples: usize,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            horizon: 5.0,
            dt: 0.01,
            window_bands: 30,
            initial_p1: 0.8,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hamiltonian: HamiltonianSection,
    pub form_factor: FormFactor,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Sweepable scalar fields.
pub const SWEEP_PARAMETERS: [&str; 6] = [
    "hamiltonian.omega_0",
    "hamiltonian.rabi",
    "hamiltonian.asym",
    "form_factor.gamma_0",
    "form_factor.exponent",
    "numerics.n_levels",
];

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn check(&self) -> Result<(), CliError> {
        let h = &self.hamiltonian;
        if h.omega_l != 1.0 {
            return Err(CliError::Config(format!(
                "hamiltonian.omega_l = {} but frequencies are in units of the laser frequency",
                h.omega_l
            )));
        }
        if !(h.omega_0.is_finite() && h.omega_0 > 0.0) {
            return Err(CliError::Config(format!("hamiltonian.omega_0 = {}", h.omega_0)));
        }
        if !(h.rabi.is_finite() && h.rabi >= 0.0 && h.asym.is_finite() && h.asym >= 0.0) {
            return Err(CliError::Config("rabi and asym must be finite and non-negative".into()));
        }
        let n = &self.numerics;
        if !(0.0..0.5).contains(&n.edge_fraction) {
            return Err(CliError::Config(format!("numerics.edge_fraction = {}", n.edge_fraction)));
        }
        if n.q_max < 0 {
            return Err(CliError::Config("numerics.q_max must be non-negative".into()));
        }
        let s = &self.spectrum;
        if !(s.omega_min > 0.0 && s.omega_max > s.omega_min && s.points >= 2) {
            return Err(CliError::Config(
                "spectrum grid needs 0 < omega_min < omega_max and at least 2 points".into(),
            ));
        }
        let d = &self.dynamics;
        if !(d.horizon > 0.0 && d.dt > 0.0 && d.window_bands >= 2 && d.samples >= 2) {
            return Err(CliError::Config(
                "dynamics needs positive horizon and dt, window_bands ≥ 2 and samples ≥ 2".into(),
            ));
        }
        if !(0.0..=1.0).contains(&d.initial_p1) {
            return Err(CliError::Config(format!("dynamics.initial_p1 = {}", d.initial_p1)));
        }
        if let Some(sw) = &self.sweep {
            if !SWEEP_PARAMETERS.contains(&sw.parameter.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown sweep parameter `{}` (one of {})",
                    sw.parameter,
                    SWEEP_PARAMETERS.join(", ")
                )));
            }
            if sw.values.is_empty() {
                return Err(CliError::Config("sweep.values is empty".into()));
            }
        }
        self.form_factor.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn spec(&self) -> HamiltonianSpec {
        let h = &self.hamiltonian;
        let n = self.numerics.n_levels;
        match &h.terms {
            Some(terms) => HamiltonianSpec {
                omega_0: h.omega_0,
                omega_l: h.omega_l,
                terms: terms.clone(),
                n_levels: n,
            },
            None => standard_spec(h.omega_0, h.omega_l, h.rabi, h.asym, h.counter_rotating, n),
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        let n = &self.numerics;
        PipelineConfig {
            dressing: DressingConfig {
                edge_fraction: n.edge_fraction,
                n_independence_tol: n.n_independence_tol,
                tail_mass: n.tail_mass,
                prune: n.prune,
            },
            hypothesis_threshold: n.hypothesis_threshold,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let s = &self.spectrum;
        let step = (s.omega_max - s.omega_min) / (s.points - 1) as f64;
        (0..s.points).map(|k| s.omega_min + k as f64 * step).collect()
    }

    /// Copy with one sweep parameter replaced.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        match path {
            "hamiltonian.omega_0" => c.hamiltonian.omega_0 = value,
            "hamiltonian.rabi" => c.hamiltonian.rabi = value,
            "hamiltonian.asym" => c.hamiltonian.asym = value,
            "form_factor.gamma_0" | "form_factor.exponent" => match &mut c.form_factor {
                FormFactor::PowerLaw {
                    gamma_0, exponent, ..
                } => {
                    if path.ends_with("gamma_0") {
                        *gamma_0 = value;
                    } else {
                        *exponent = value;
                    }
                }
                FormFactor::Tabulated { .. } => {
                    return Err(CliError::Config(format!("{path} needs a power-law form factor")))
                }
            },
            "numerics.n_levels" => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(CliError::Config(format!("n_levels = {value}")));
                }
                c.numerics.n_levels = value as usize;
            }
            other => return Err(CliError::Config(format!("unknown sweep parameter `{other}`"))),
        }
        if path.starts_with("hamiltonian") && c.hamiltonian.terms.is_some() {
            return Err(CliError::Config(format!(
                "{path} cannot be swept with an explicit term list"
            )));
        }
        c.check()?;
        Ok(c)
    }

    /// Output directory, honouring the env override and then `--out`.
    pub fn output_dir(&self, cli_out: Option<&Path>) -> PathBuf {
        if let Some(p) = cli_out {
            return p.to_path_buf();
        }
        match std::env::var_os(OUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output.directory.clone(),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [hamiltonian]
        omega_0 = 1.0
        rabi = 0.2
        asym = 0.1

        [form_factor]
        kind = "power_law"
        gamma_0 = 1e-4
        omega_ref = 1.0
        exponent = 3.0
    "#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.numerics.n_levels, 50);
        assert!(c.hamiltonian.counter_rotating);
        assert_eq!(c.spec().terms.len(), 6);
        assert_eq!(c.grid().len(), 3500);
    }

    #[test]
    fn explicit_terms() {
        let text = r#"
            [hamiltonian]
            omega_0 = 1.0
            terms = [
                { atomic_op = "raise", photon_shift = -1, strength = 0.1, hermitian_close = true },
            ]
            [form_factor]
            kind = "tabulated"
            points = [[0.0, 0.0], [2.0, 2e-3]]
        "#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.spec().terms.len(), 1);
        assert!(c.with_parameter("hamiltonian.asym", 0.1).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::from_toml("[hamiltonian]\nomega_0 = 1.0").is_err());
        let bad = MINIMAL.replace("gamma_0 = 1e-4", "gamma_0 = -1.0");
        assert!(RunConfig::from_toml(&bad).is_err());
        let bad = format!("{MINIMAL}\n[sweep]\nparameter = \"hamiltonian.foo\"\nvalues = [1.0]");
        assert!(RunConfig::from_toml(&bad).is_err());
        let bad = MINIMAL.replace("rabi = 0.2", "rabi = 0.2\nbogus = 1");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn parameter_substitution() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.with_parameter("hamiltonian.asym", 0.3).unwrap().hamiltonian.asym, 0.3);
        assert_eq!(c.with_parameter("numerics.n_levels", 80.0).unwrap().numerics.n_levels, 80);
        assert!(c.with_parameter("numerics.n_levels", 8.5).is_err());
        match c.with_parameter("form_factor.exponent", 1.0).unwrap().form_factor {
            FormFactor::PowerLaw { exponent, .. } => assert_eq!(exponent, 1.0),
            _ => unreachable!(),
        }
    }
}
