//! First-order dressed states of the two-level model with permanent-dipole
//! and counter-rotating corrections, and the closed forms that follow.
//!
//! Slot bookkeeping: a ket component `|g,N+1−p⟩` is `α^(p)` and `|e,N−p⟩` is
//! `β^(p)`, so for `|j(N)⟩` the corrections sit at
//!
//! | bare state | slot |
//! |---|---|
//! | `|g,N⟩`, `|e,N−1⟩` | `α^(1)`, `β^(1)` |
//! | `|g,N+2⟩`, `|e,N+1⟩` | `α^(−1)`, `β^(−1)` |
//! | `|g,N+3⟩`, `|e,N+2⟩` | `α^(−2)`, `β^(−2)` |
//! | `|g,N−1⟩`, `|e,N−2⟩` | `α^(2)`, `β^(2)` |

use serde::Serialize;
use thiserror::Error;

use crate::dressing::{AmplitudeTable, TransitionCoefficients};
use crate::rates::FormFactor;
use crate::Level;

#[derive(Debug, Error, PartialEq)]
pub enum PerturbationError {
    #[error("mixing angle undefined: no coupling and no detuning")]
    UndefinedAngle,
    #[error("outside the perturbative regime: {0}")]
    Applicability(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbativeInput {
    pub omega_0: f64,
    pub omega_l: f64,
    pub rabi: f64,
    pub asym: f64,
}

impl PerturbativeInput {
    pub fn resonant(rabi: f64, asym: f64) -> Self {
        Self {
            omega_0: 1.0,
            omega_l: 1.0,
            rabi,
            asym,
        }
    }

    pub fn detuning(&self) -> f64 {
        self.omega_0 - self.omega_l
    }

    /// RWA doublet gap `√(Ω_R² + δ²)`.
    pub fn rwa_gap(&self) -> f64 {
        self.rabi.hypot(self.detuning())
    }

    pub fn check(&self) -> Result<(), PerturbationError> {
        let gap = self.rwa_gap();
        let wl = self.omega_l;
        if !(wl > 0.0) {
            return Err(PerturbationError::Applicability(format!("omega_l = {wl}")));
        }
        if gap >= wl {
            return Err(PerturbationError::Applicability(format!(
                "gap {gap} is not below omega_l = {wl}"
            )));
        }
        if self.rabi >= wl || self.asym >= wl {
            return Err(PerturbationError::Applicability(format!(
                "couplings ({}, {}) must stay below omega_l = {wl}",
                self.rabi, self.asym
            )));
        }
        Ok(())
    }
}

/// `θ ∈ (0, π/2)` with `tan 2θ = Ω_R / (ω_0 − ω_L)`, equal to π/4 at resonance.
pub fn mixing_angle(input: &PerturbativeInput) -> Result<f64, PerturbationError> {
    if input.rabi == 0.0 && input.detuning() == 0.0 {
        return Err(PerturbationError::UndefinedAngle);
    }
    Ok(0.5 * input.rabi.atan2(input.detuning()))
}

/// Raw first-order amplitudes for `p ∈ {−2, …, 2}`; `p = 0` holds the RWA
/// composition. Kets are not renormalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbativeStates {
    pub theta: f64,
    pub omega_gap: f64,
    alpha: [[f64; 5]; 2],
    beta: [[f64; 5]; 2],
}

impl PerturbativeStates {
    pub fn alpha(&self, j: Level, p: i64) -> f64 {
        if p.abs() > 2 {
            return 0.0;
        }
        self.alpha[j.index()][(p + 2) as usize]
    }

    pub fn beta(&self, j: Level, p: i64) -> f64 {
        if p.abs() > 2 {
            return 0.0;
        }
        self.beta[j.index()][(p + 2) as usize]
    }

    pub fn table(&self) -> AmplitudeTable {
        AmplitudeTable::from_parts(
            0,
            2,
            [self.alpha[0].to_vec(), self.alpha[1].to_vec()],
            [self.beta[0].to_vec(), self.beta[1].to_vec()],
        )
    }
}

pub fn perturbed_states(input: &PerturbativeInput) -> Result<PerturbativeStates, PerturbationError> {
    input.check()?;
    let theta = mixing_angle(input)?;
    let (s, c) = theta.sin_cos();
    let wl = input.omega_l;
    let om = input.rwa_gap() / wl;
    let a = input.asym / wl;
    let r = input.rabi / (4.0 * wl);

    // index p + 2
    let mut alpha = [[0.0; 5]; 2];
    let mut beta = [[0.0; 5]; 2];

    // |1(N)>
    alpha[0][2] = s;
    beta[0][2] = c;
    alpha[0][3] = a * om / (1.0 + om) * c * c * s;
    beta[0][3] = a * c * (1.0 - om * s * s / (1.0 + om));
    alpha[0][1] = a * om / (1.0 - om) * c * c * s;
    beta[0][1] = -a * c * (1.0 + om * s * s / (1.0 - om));
    alpha[0][0] = r * om * s * s * c / (2.0 - om);
    beta[0][0] = -r * s * (1.0 + om * s * s / (2.0 - om));
    alpha[0][4] = r * c * (1.0 - om * c * c / (2.0 + om));
    beta[0][4] = r * om * s * c * c / (2.0 + om);

    // |2(N)>
    alpha[1][2] = c;
    beta[1][2] = -s;
    alpha[1][3] = -a * om / (1.0 - om) * c * s * s;
    beta[1][3] = -a * s * (1.0 + om * c * c / (1.0 - om));
    alpha[1][1] = -a * om / (1.0 + om) * c * s * s;
    beta[1][1] = a * s * (1.0 - om * c * c / (1.0 + om));
    alpha[1][0] = r * om * s * c * c / (2.0 + om);
    beta[1][0] = -r * c * (1.0 - om * c * c / (2.0 + om));
    // first-order theory gives sinθ here; see the module tests
    alpha[1][4] = -r * s * (1.0 + om * s * s / (2.0 - om));
    beta[1][4] = -r * om * s * s * c / (2.0 - om);

    Ok(PerturbativeStates {
        theta,
        omega_gap: input.rwa_gap(),
        alpha,
        beta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticCoefficients {
    /// Leading-order values for `q ∈ {0, 1, 2}`.
    pub coefficients: TransitionCoefficients,
    /// Order of magnitude `Ω_R Ω / ω_L²` of every `A_ij^(3)`; not a value.
    pub q3_bound: f64,
}

pub fn analytic_coefficients(input: &PerturbativeInput) -> Result<AnalyticCoefficients, PerturbationError> {
    input.check()?;
    let theta = mixing_angle(input)?;
    let (s, c) = theta.sin_cos();
    let wl = input.omega_l;
    let a = input.asym / wl;
    let unperturbed = [[c * s, c * c], [-s * s, -c * s]];
    let mut out = TransitionCoefficients::default();
    for i in Level::BOTH {
        for j in Level::BOTH {
            let v = unperturbed[i.index()][j.index()];
            out.set(i, j, 1, v);
            if a != 0.0 {
                out.set(i, j, 2, a * v);
            }
        }
    }
    if a != 0.0 {
        out.set(Level::One, Level::Two, 0, -a * c * c);
    }
    Ok(AnalyticCoefficients {
        coefficients: out,
        q3_bound: input.rabi * input.rwa_gap() / (wl * wl),
    })
}

/// `A_12^(0)` including the `Ω/ω_L` correction inside the first-order kets.
pub fn low_frequency_coefficient(input: &PerturbativeInput) -> Result<f64, PerturbationError> {
    input.check()?;
    let (s, c) = mixing_angle(input)?.sin_cos();
    let om = input.rwa_gap() / input.omega_l;
    Ok(-(input.asym / input.omega_l) * c * c * (1.0 + 2.0 * om * s * s / (1.0 - om)))
}

/// Leading-order `I_+^(0)/I^(1)`:
/// `(Γ(Ω)/Γ(ω_L)) (Ω_AS/ω_L)² Ω_R² / (4[Ω_R² + δ²])`.
pub fn ratio_lowfreq_vs_mollow(input: &PerturbativeInput, ff: &FormFactor) -> Result<f64, PerturbationError> {
    input.check()?;
    let gap = input.rwa_gap();
    if gap == 0.0 {
        return Err(PerturbationError::UndefinedAngle);
    }
    let carrier = ff.eval(input.omega_l);
    if carrier <= 0.0 {
        return Err(PerturbationError::Applicability(
            "form factor vanishes at the laser frequency".into(),
        ));
    }
    let a = input.asym / input.omega_l;
    Ok(ff.eval(gap) / carrier * a * a * input.rabi.powi(2) / (4.0 * gap * gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultipletRow {
    pub q: i64,
    pub lines: usize,
    pub center: f64,
    pub scaling: f64,
}

/// Number of lines, central frequency and weight scaling of the four lowest
/// multiplets, for a form factor `∝ ω^α`.
pub fn multiplet_scalings(input: &PerturbativeInput, alpha_exponent: f64) -> Result<Vec<MultipletRow>, PerturbationError> {
    input.check()?;
    let wl = input.omega_l;
    let gap = input.rwa_gap();
    let a = input.asym / wl;
    let r = input.rabi / wl;
    let o = gap / wl;
    Ok(vec![
        MultipletRow {
            q: 0,
            lines: 1,
            center: gap,
            scaling: a * a * o.powf(alpha_exponent),
        },
        MultipletRow {
            q: 1,
            lines: 3,
            center: wl,
            scaling: 1.0,
        },
        MultipletRow {
            q: 2,
            lines: 3,
            center: 2.0 * wl,
            scaling: a * a,
        },
        MultipletRow {
            q: 3,
            lines: 3,
            center: 3.0 * wl,
            scaling: r * r * o * o,
        },
    ])
}
