//! GKLS rates from transition coefficients and a radiation form factor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dressing::TransitionCoefficients;
use crate::Level;

#[derive(Debug, Error, PartialEq)]
pub enum RatesError {
    #[error("invalid form factor: {0}")]
    FormFactor(String),
    #[error("doublet gap {omega_gap} must lie in (0, {omega_l})")]
    GapOutOfRange { omega_gap: f64, omega_l: f64 },
}

/// Density `Γ(ω)` of the radiation continuum seen by the atomic dipole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormFactor {
    /// `γ_0 (ω/ω_ref)^α` for `ω > 0`.
    PowerLaw {
        gamma_0: f64,
        omega_ref: f64,
        exponent: f64,
    },
    /// Linear interpolation through `(ω, Γ)` points, zero outside the table.
    Tabulated { points: Vec<(f64, f64)> },
}

impl FormFactor {
    pub fn power_law(gamma_0: f64, omega_ref: f64, exponent: f64) -> Self {
        FormFactor::PowerLaw {
            gamma_0,
            omega_ref,
            exponent,
        }
    }

    pub fn flat(gamma_0: f64) -> Self {
        Self::power_law(gamma_0, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<(), RatesError> {
        match self {
            FormFactor::PowerLaw {
                gamma_0,
                omega_ref,
                exponent,
            } => {
                if !(gamma_0.is_finite() && *gamma_0 >= 0.0) {
                    return Err(RatesError::FormFactor(format!("gamma_0 = {gamma_0}")));
                }
                if !(omega_ref.is_finite() && *omega_ref > 0.0) {
                    return Err(RatesError::FormFactor(format!("omega_ref = {omega_ref}")));
                }
                if !exponent.is_finite() {
                    return Err(RatesError::FormFactor(format!("exponent = {exponent}")));
                }
            }
            FormFactor::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(RatesError::FormFactor(
                        "a table needs at least two points".into(),
                    ));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(RatesError::FormFactor(
                        "table frequencies must be strictly increasing".into(),
                    ));
                }
                if points
                    .iter()
                    .any(|&(w, g)| !w.is_finite() || !g.is_finite() || g < 0.0)
                {
                    return Err(RatesError::FormFactor(
                        "table entries must be finite with Γ ≥ 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        match self {
            FormFactor::PowerLaw {
                gamma_0,
                omega_ref,
                exponent,
            } => gamma_0 * (omega / omega_ref).powf(*exponent),
            FormFactor::Tabulated { points } => {
                let k = points.partition_point(|&(w, _)| w <= omega);
                if k == 0 || k == points.len() {
                    // exactly on the last node still counts as inside
                    return match points.last() {
                        Some(&(w, g)) if k == points.len() && w == omega => g,
                        _ => 0.0,
                    };
                }
                let (w0, g0) = points[k - 1];
                let (w1, g1) = points[k];
                g0 + (g1 - g0) * (omega - w0) / (w1 - w0)
            }
        }
    }

    /// Overall rate scale: `γ_0`, or the table maximum.
    pub fn scale(&self) -> f64 {
        match self {
            FormFactor::PowerLaw { gamma_0, .. } => *gamma_0,
            FormFactor::Tabulated { points } => {
                points.iter().map(|p| p.1).fold(0.0, f64::max)
            }
        }
    }

    /// Same shape, every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            FormFactor::PowerLaw {
                gamma_0,
                omega_ref,
                exponent,
            } => FormFactor::PowerLaw {
                gamma_0: gamma_0 * c,
                omega_ref: *omega_ref,
                exponent: *exponent,
            },
            FormFactor::Tabulated { points } => FormFactor::Tabulated {
                points: points.iter().map(|&(w, g)| (w, g * c)).collect(),
            },
        }
    }
}

/// Rates of the multiplet `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelRates {
    pub q: i64,
    pub gamma_11: f64,
    pub gamma_22: f64,
    /// `1 → 2`, emitted at `qω_L + Ω`.
    pub gamma_12: f64,
    /// `2 → 1`, emitted at `qω_L − Ω`.
    pub gamma_21: f64,
    pub k_12: f64,
}

impl ChannelRates {
    pub fn total(&self) -> f64 {
        self.gamma_11 + self.gamma_22 + self.gamma_12 + self.gamma_21
    }

    fn is_zero(&self) -> bool {
        self.total() == 0.0 && self.k_12 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleCheck {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub gamma_0: f64,
    pub checks: Vec<ScaleCheck>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ScaleCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSet {
    pub omega_l: f64,
    pub omega_gap: f64,
    pub channels: Vec<ChannelRates>,
    pub gamma_12: f64,
    pub gamma_21: f64,
    pub gamma_pop: f64,
    pub gamma_coh: f64,
    pub pi_1: f64,
    pub pi_2: f64,
    pub hypothesis: HypothesisReport,
}

impl RateSet {
    /// Assembles aggregates and steady populations from per-channel rates.
    ///
    /// With `Γ_pop = 0` the steady state is not unique; populations are then
    /// reported as 1/2 each.
    pub fn from_channels(
        channels: Vec<ChannelRates>,
        omega_l: f64,
        omega_gap: f64,
        gamma_0: f64,
        threshold: f64,
    ) -> Self {
        let gamma_12: f64 = channels.iter().map(|c| c.gamma_12).sum();
        let gamma_21: f64 = channels.iter().map(|c| c.gamma_21).sum();
        let gamma_pop = gamma_12 + gamma_21;
        let gamma_coh = 0.5 * channels.iter().map(ChannelRates::total).sum::<f64>()
            - channels.iter().map(|c| c.k_12).sum::<f64>();
        let (pi_1, pi_2) = if gamma_pop > 0.0 {
            let pi_1 = gamma_21 / gamma_pop;
            (pi_1, 1.0 - pi_1)
        } else {
            (0.5, 0.5)
        };
        let hypothesis = check_hypotheses(gamma_0, omega_l, omega_gap, threshold);
        Self {
            omega_l,
            omega_gap,
            channels,
            gamma_12,
            gamma_21,
            gamma_pop,
            gamma_coh,
            pi_1,
            pi_2,
            hypothesis,
        }
    }

    pub fn channel(&self, q: i64) -> Option<&ChannelRates> {
        self.channels.iter().find(|c| c.q == q)
    }

    pub fn pi(&self, level: Level) -> f64 {
        match level {
            Level::One => self.pi_1,
            Level::Two => self.pi_2,
        }
    }

    /// Loss rate of level `j`: `Σ_q (Γ_jj + Γ_j→other)`.
    pub fn loss(&self, level: Level) -> f64 {
        self.channels
            .iter()
            .map(|c| match level {
                Level::One => c.gamma_11 + c.gamma_12,
                Level::Two => c.gamma_22 + c.gamma_21,
            })
            .sum()
    }

    /// Steady photon emission rate `Σ_q [(Γ_11+Γ_12)Π_1 + (Γ_22+Γ_21)Π_2]`.
    pub fn emission_rate(&self) -> f64 {
        self.loss(Level::One) * self.pi_1 + self.loss(Level::Two) * self.pi_2
    }

    /// Rebuilds the rate set with every rate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let channels = self
            .channels
            .iter()
            .map(|ch| ChannelRates {
                q: ch.q,
                gamma_11: ch.gamma_11 * c,
                gamma_22: ch.gamma_22 * c,
                gamma_12: ch.gamma_12 * c,
                gamma_21: ch.gamma_21 * c,
                k_12: ch.k_12 * c,
            })
            .collect();
        let threshold = self.hypothesis.checks.first().map_or(0.1, |c| c.threshold);
        Self::from_channels(
            channels,
            self.omega_l,
            self.omega_gap,
            self.hypothesis.gamma_0 * c,
            threshold,
        )
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// Rates of every multiplet present in `coeffs`; channels whose rates all
/// vanish (for instance `q < 0`, where the form factor is zero) are dropped.
pub fn build_rates(
    coeffs: &TransitionCoefficients,
    ff: &FormFactor,
    omega_l: f64,
    omega_gap: f64,
    threshold: f64,
) -> Result<RateSet, RatesError> {
    ff.validate()?;
    if !(omega_gap > 0.0 && omega_gap < omega_l) {
        return Err(RatesError::GapOutOfRange { omega_gap, omega_l });
    }
    let mut channels = Vec::new();
    for q in coeffs.q_values() {
        let a = |i, j| coeffs.get(i, j, q);
        let carrier = ff.eval(q as f64 * omega_l);
        let ch = ChannelRates {
            q,
            gamma_11: carrier * a(Level::One, Level::One).powi(2),
            gamma_22: carrier * a(Level::Two, Level::Two).powi(2),
            gamma_12: ff.eval(q as f64 * omega_l + omega_gap) * a(Level::One, Level::Two).powi(2),
            gamma_21: ff.eval(q as f64 * omega_l - omega_gap) * a(Level::Two, Level::One).powi(2),
            k_12: carrier * a(Level::One, Level::One) * a(Level::Two, Level::Two),
        };
        if !ch.is_zero() {
            channels.push(ch);
        }
    }
    Ok(RateSet::from_channels(
        channels,
        omega_l,
        omega_gap,
        ff.scale(),
        threshold,
    ))
}

/// Ratios `Γ_0/Ω`, `Γ_0/ω_L`, `Γ_0/(ω_L−Ω)`, each flagged against `threshold`.
pub fn check_hypotheses(
    gamma_0: f64,
    omega_l: f64,
    omega_gap: f64,
    threshold: f64,
) -> HypothesisReport {
    let check = |name, scale: f64| {
        let value = if scale > 0.0 { gamma_0 / scale } else { f64::INFINITY };
        ScaleCheck {
            name,
            value,
            threshold,
            pass: value <= threshold,
        }
    };
    HypothesisReport {
        gamma_0,
        checks: vec![
            check("gamma_0/omega_gap", omega_gap),
            check("gamma_0/omega_l", omega_l),
            check("gamma_0/(omega_l-omega_gap)", omega_l - omega_gap),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mollow_coefficients() -> TransitionCoefficients {
        let mut a = TransitionCoefficients::default();
        a.set(Level::One, Level::One, 1, 0.5);
        a.set(Level::Two, Level::Two, 1, -0.5);
        a.set(Level::One, Level::Two, 1, 0.5);
        a.set(Level::Two, Level::One, 1, -0.5);
        a
    }

    #[test]
    fn power_law_and_flat() {
        let ff = FormFactor::power_law(2.0, 0.5, 3.0);
        assert_eq!(ff.eval(1.0), 16.0);
        assert_eq!(ff.eval(0.0), 0.0);
        assert_eq!(ff.eval(-1.0), 0.0);
        assert_eq!(FormFactor::flat(0.3).eval(7.0), 0.3);
        assert_eq!(FormFactor::flat(0.3).eval(-7.0), 0.0);
    }

    #[test]
    fn tabulated_interpolates() {
        let ff = FormFactor::Tabulated {
            points: vec![(0.5, 1.0), (1.0, 3.0), (2.0, 1.0)],
        };
        ff.validate().unwrap();
        assert_eq!(ff.eval(0.75), 2.0);
        assert_eq!(ff.eval(1.5), 2.0);
        assert_eq!(ff.eval(2.0), 1.0);
        assert_eq!(ff.eval(0.5), 1.0);
        assert_eq!(ff.eval(0.4), 0.0);
        assert_eq!(ff.eval(2.1), 0.0);
        assert_eq!(ff.scale(), 3.0);
        let bad = FormFactor::Tabulated {
            points: vec![(1.0, 1.0), (1.0, 2.0)],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mollow_rates() {
        let g0 = 1e-3;
        let r = build_rates(&mollow_coefficients(), &FormFactor::flat(g0), 1.0, 0.4, 0.1).unwrap();
        assert!((r.gamma_pop - 0.5 * g0).abs() < 1e-18);
        assert!((r.gamma_coh - 0.75 * g0).abs() < 1e-18);
        assert_eq!((r.pi_1, r.pi_2), (0.5, 0.5));
        assert!((r.channel(1).unwrap().k_12 + 0.25 * g0).abs() < 1e-18);
        assert!((r.gamma_coh / r.gamma_pop - 1.5).abs() < 1e-12);
    }

    #[test]
    fn synthetic_populations() {
        let ch = ChannelRates {
            q: 1,
            gamma_11: 0.0,
            gamma_22: 0.0,
            gamma_12: 0.2,
            gamma_21: 0.3,
            k_12: 0.0,
        };
        let r = RateSet::from_channels(vec![ch], 1.0, 0.3, 0.0, 0.1);
        assert!((r.pi_1 - 0.6).abs() < 1e-15);
        assert!((r.pi_2 - 0.4).abs() < 1e-15);
        assert!((r.gamma_pop - 0.5).abs() < 1e-15);
        assert_eq!(r.pi_1 + r.pi_2, 1.0);
        assert!((r.gamma_12 * r.pi_1 - r.gamma_21 * r.pi_2).abs() < 1e-15);
    }

    #[test]
    fn zero_frequency_channel() {
        let mut a = mollow_coefficients();
        a.set(Level::One, Level::Two, 0, -0.05);
        a.set(Level::Two, Level::One, 0, 0.02);
        let ff = FormFactor::power_law(1e-3, 1.0, 3.0);
        let r = build_rates(&a, &ff, 1.0, 0.2, 0.1).unwrap();
        let c0 = r.channel(0).unwrap();
        assert!((c0.gamma_12 - 1e-3 * 0.2f64.powi(3) * 0.0025).abs() < 1e-20);
        assert_eq!(c0.gamma_21, 0.0);
        assert_eq!(c0.gamma_11, 0.0);
    }

    #[test]
    fn negative_q_channels_vanish() {
        let mut a = mollow_coefficients();
        a.set(Level::One, Level::Two, -1, 0.1);
        let r = build_rates(&a, &FormFactor::flat(1e-3), 1.0, 0.4, 0.1).unwrap();
        assert!(r.channel(-1).is_none());
    }

    #[test]
    fn rescaling_keeps_populations() {
        let r = build_rates(&mollow_coefficients(), &FormFactor::flat(1e-3), 1.0, 0.4, 0.1).unwrap();
        let s = r.scaled(7.0);
        assert!((s.gamma_coh - 7.0 * r.gamma_coh).abs() < 1e-15);
        assert_eq!(s.pi_1, r.pi_1);
    }

    #[test]
    fn hypothesis_thresholds() {
        assert!(check_hypotheses(1e-4, 1.0, 0.3, 0.1).all_pass());
        let warn = check_hypotheses(0.2 * 0.3, 1.0, 0.3, 0.1);
        let names: Vec<_> = warn.warnings().map(|c| c.name).collect();
        assert_eq!(names, vec!["gamma_0/omega_gap"]);
        let near = check_hypotheses(1e-2, 1.0, 0.95, 0.1);
        let names: Vec<_> = near.warnings().map(|c| c.name).collect();
        assert_eq!(names, vec!["gamma_0/(omega_l-omega_gap)"]);
    }

    #[test]
    fn gap_outside_range_is_rejected() {
        let err = build_rates(&mollow_coefficients(), &FormFactor::flat(1e-3), 1.0, 1.2, 0.1);
        assert!(matches!(err, Err(RatesError::GapOutOfRange { .. })));
    }
}
