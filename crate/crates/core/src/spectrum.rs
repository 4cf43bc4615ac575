//! Steady-state emission lines, spectral density and multiplet ratios.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::rates::{ChannelRates, RateSet};

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("negative {kind:?} weight {weight:e} at q = {q}")]
    NegativeWeight { q: i64, kind: LineKind, weight: f64 },
    #[error("frequency grid must be strictly increasing and positive ({0})")]
    Grid(String),
    #[error("ratio undefined: {0}")]
    Undefined(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    SidebandPlus,
    SidebandMinus,
    CentralLorentzian,
    CoherentDelta,
}

impl LineKind {
    pub fn label(self) -> &'static str {
        match self {
            LineKind::SidebandPlus => "sideband_plus",
            LineKind::SidebandMinus => "sideband_minus",
            LineKind::CentralLorentzian => "central_lorentzian",
            LineKind::CoherentDelta => "coherent_delta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralLine {
    pub q: i64,
    pub kind: LineKind,
    pub center: f64,
    /// Half width at half maximum; zero for coherent peaks.
    pub width: f64,
    pub weight: f64,
}

impl SpectralLine {
    pub fn is_lorentzian(&self) -> bool {
        self.kind != LineKind::CoherentDelta
    }

    /// Lorentzian profile value; coherent peaks contribute nothing.
    pub fn density(&self, omega: f64) -> f64 {
        if !self.is_lorentzian() {
            return 0.0;
        }
        let d = omega - self.center;
        self.weight * self.width / (PI * (d * d + self.width * self.width))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub lines: Vec<SpectralLine>,
    pub rates: RateSet,
    /// Pairs of line indices closer than ten maximal widths.
    pub overlaps: Vec<(usize, usize)>,
}

impl Spectrum {
    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|l| l.weight).sum()
    }

    pub fn multiplet(&self, q: i64) -> impl Iterator<Item = &SpectralLine> {
        self.lines.iter().filter(move |l| l.q == q)
    }

    pub fn multiplet_weight(&self, q: i64) -> f64 {
        self.multiplet(q).map(|l| l.weight).sum()
    }

    pub fn line(&self, q: i64, kind: LineKind) -> Option<&SpectralLine> {
        self.lines.iter().find(|l| l.q == q && l.kind == kind)
    }

    pub fn weight(&self, q: i64, kind: LineKind) -> f64 {
        self.line(q, kind).map_or(0.0, |l| l.weight)
    }

    /// Integrated central multiplet `I_c^(q)`: coherent plus Lorentzian part.
    pub fn central_weight(&self, q: i64) -> f64 {
        self.weight(q, LineKind::CoherentDelta) + self.weight(q, LineKind::CentralLorentzian)
    }

    pub fn coherent_peaks(&self) -> impl Iterator<Item = &SpectralLine> {
        self.lines.iter().filter(|l| !l.is_lorentzian())
    }
}

/// Unpruned line weights of one channel, in the order plus, minus, delta, Lorentzian.
pub fn channel_lines(ch: &ChannelRates, rates: &RateSet) -> [SpectralLine; 4] {
    let (p1, p2) = (rates.pi_1, rates.pi_2);
    let carrier = ch.q as f64 * rates.omega_l;
    let line = |kind, center, width, weight| SpectralLine {
        q: ch.q,
        kind,
        center,
        width,
        weight,
    };
    [
        line(
            LineKind::SidebandPlus,
            carrier + rates.omega_gap,
            rates.gamma_coh,
            ch.gamma_12 * p1,
        ),
        line(
            LineKind::SidebandMinus,
            carrier - rates.omega_gap,
            rates.gamma_coh,
            ch.gamma_21 * p2,
        ),
        line(
            LineKind::CoherentDelta,
            carrier,
            0.0,
            ch.gamma_11 * p1 * p1 + ch.gamma_22 * p2 * p2 + 2.0 * ch.k_12 * p1 * p2,
        ),
        line(
            LineKind::CentralLorentzian,
            carrier,
            rates.gamma_pop,
            (ch.gamma_11 + ch.gamma_22 - 2.0 * ch.k_12) * p1 * p2,
        ),
    ]
}

/// Relative weight below which a line counts as absent.
pub const PRUNE: f64 = 1e-12;

pub fn build_lines(rates: &RateSet) -> Result<Spectrum, SpectrumError> {
    let all: Vec<SpectralLine> = rates
        .channels
        .iter()
        .flat_map(|ch| channel_lines(ch, rates))
        .collect();
    let scale = rates.emission_rate().max(all.iter().map(|l| l.weight.abs()).fold(0.0, f64::max));
    let floor = PRUNE * scale;
    let mut lines = Vec::with_capacity(all.len());
    for l in all {
        if l.weight < -floor {
            return Err(SpectrumError::NegativeWeight {
                q: l.q,
                kind: l.kind,
                weight: l.weight,
            });
        }
        if l.weight > floor {
            lines.push(l);
        }
    }
    let max_width = lines.iter().map(|l| l.width).fold(0.0, f64::max);
    let mut overlaps = Vec::new();
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let same_center = lines[a].q == lines[b].q
                && lines[a].center == lines[b].center;
            if !same_center && (lines[a].center - lines[b].center).abs() < 10.0 * max_width {
                overlaps.push((a, b));
            }
        }
    }
    Ok(Spectrum {
        lines,
        rates: rates.clone(),
        overlaps,
    })
}

/// Lorentzian part of `𝒥(ω)` on a grid; coherent peaks are left to
/// [`Spectrum::coherent_peaks`].
pub fn evaluate_density(spectrum: &Spectrum, grid: &[f64]) -> Result<Vec<(f64, f64)>, SpectrumError> {
    check_grid(grid)?;
    Ok(grid
        .iter()
        .map(|&w| (w, spectrum.lines.iter().map(|l| l.density(w)).sum()))
        .collect())
}

pub fn check_grid(grid: &[f64]) -> Result<(), SpectrumError> {
    if grid.is_empty() {
        return Err(SpectrumError::Grid("empty grid".into()));
    }
    if let Some(w) = grid.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(SpectrumError::Grid(format!("frequency {w} is not positive")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SpectrumError::Grid("frequencies not increasing".into()));
    }
    Ok(())
}

/// `I^(q_num) / I^(q_den)` from integrated multiplet weights.
pub fn multiplet_ratio(spectrum: &Spectrum, q_num: i64, q_den: i64) -> Result<f64, SpectrumError> {
    let den = spectrum.multiplet_weight(q_den);
    if den <= 0.0 {
        return Err(SpectrumError::Undefined(format!("multiplet q = {q_den} is empty")));
    }
    Ok(spectrum.multiplet_weight(q_num) / den)
}

/// `Γ_12^(0) Γ_21 / [(Γ_11^(q)+Γ_12^(q)) Γ_21 + (Γ_22^(q)+Γ_21^(q)) Γ_12]`
pub fn ratio_from_rates(rates: &RateSet, q: i64) -> Result<f64, SpectrumError> {
    let zero = rates.channel(0).map_or(0.0, |c| c.gamma_12);
    let ch = rates
        .channel(q)
        .ok_or_else(|| SpectrumError::Undefined(format!("no channel q = {q}")))?;
    let den = (ch.gamma_11 + ch.gamma_12) * rates.gamma_21 + (ch.gamma_22 + ch.gamma_21) * rates.gamma_12;
    if den <= 0.0 {
        return Err(SpectrumError::Undefined(format!("multiplet q = {q} is empty")));
    }
    Ok(zero * rates.gamma_21 / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityFactor {
    /// `𝒥_+^(0)(Ω) / Σ_{q>0} 𝒥^(q)(Ω)` from the actual line shapes.
    pub exact: f64,
    /// `(ω_L/Γ_coh)² (Γ_12^(0)/Γ_12^(1)) / (4 − Γ_pop/Γ_coh)`
    pub closed_form: f64,
}

pub fn quality_factor(spectrum: &Spectrum) -> Result<QualityFactor, SpectrumError> {
    let rates = &spectrum.rates;
    let omega = rates.omega_gap;
    let singlet = spectrum
        .line(0, LineKind::SidebandPlus)
        .ok_or_else(|| SpectrumError::Undefined("no q = 0 line".into()))?;
    let background: f64 = spectrum
        .lines
        .iter()
        .filter(|l| l.q > 0)
        .map(|l| l.density(omega))
        .sum();
    if background <= 0.0 {
        return Err(SpectrumError::Undefined("no q > 0 emission at Ω".into()));
    }
    let g0 = rates.channel(0).map_or(0.0, |c| c.gamma_12);
    let g1 = rates.channel(1).map_or(0.0, |c| c.gamma_12);
    let closed_form = if g1 > 0.0 {
        (rates.omega_l / rates.gamma_coh).powi(2) * (g0 / g1) / (4.0 - rates.gamma_pop / rates.gamma_coh)
    } else {
        f64::NAN
    };
    Ok(QualityFactor {
        exact: singlet.density(omega) / background,
        closed_form,
    })
}
