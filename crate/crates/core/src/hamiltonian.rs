//! Atom–laser Hamiltonian on a truncated photon ladder.
//!
//! Bare states are ordered `flat = 2·n + [atom == e]`, so a coupling term with
//! photon shift `p` lands on a band of half-width `2|p| + 1` around the diagonal.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::DenseMatrix;

pub const DEFAULT_LEVELS: usize = 50;
pub const MIN_LEVELS: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error("term {index} ({term}) has no Hermitian partner: expected {partner} with strength {expected}, found {found}")]
    NonHermitian {
        index: usize,
        term: String,
        partner: String,
        expected: f64,
        found: f64,
    },
    #[error("term {index} ({term}) has photon shift {shift} outside a ladder of {n_levels} levels")]
    ShiftOutOfRange {
        index: usize,
        term: String,
        shift: i64,
        n_levels: usize,
    },
    #[error("term {index} ({term}) has non-finite strength")]
    NonFiniteStrength { index: usize, term: String },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("n_levels = {0} is below the minimum of {MIN_LEVELS}")]
    TooFewLevels(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Atom {
    #[serde(rename = "g")]
    Ground,
    #[serde(rename = "e")]
    Excited,
}

/// Atomic operator of a coupling term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicOp {
    /// `|e⟩⟨g|`
    Raise,
    /// `|g⟩⟨e|`
    Lower,
    /// `|e⟩⟨e|`
    ExcProj,
    /// `|g⟩⟨g|`
    GndProj,
}

impl AtomicOp {
    pub fn adjoint(self) -> Self {
        match self {
            AtomicOp::Raise => AtomicOp::Lower,
            AtomicOp::Lower => AtomicOp::Raise,
            other => other,
        }
    }

    /// (row atom, column atom) of the single nonzero entry.
    pub fn entry(self) -> (Atom, Atom) {
        match self {
            AtomicOp::Raise => (Atom::Excited, Atom::Ground),
            AtomicOp::Lower => (Atom::Ground, Atom::Excited),
            AtomicOp::ExcProj => (Atom::Excited, Atom::Excited),
            AtomicOp::GndProj => (Atom::Ground, Atom::Ground),
        }
    }
}

/// `strength · X ⊗ Σ_N |N+p⟩⟨N|`. Each matrix element equals `strength`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingTerm {
    pub atomic_op: AtomicOp,
    pub photon_shift: i64,
    pub strength: f64,
    #[serde(default)]
    pub hermitian_close: bool,
}

impl CouplingTerm {
    pub fn new(atomic_op: AtomicOp, photon_shift: i64, strength: f64) -> Self {
        Self {
            atomic_op,
            photon_shift,
            strength,
            hermitian_close: false,
        }
    }

    pub fn closed(mut self) -> Self {
        self.hermitian_close = true;
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            atomic_op: self.atomic_op.adjoint(),
            photon_shift: -self.photon_shift,
            strength: self.strength,
            hermitian_close: false,
        }
    }

    fn is_self_adjoint(&self) -> bool {
        self.atomic_op.adjoint() == self.atomic_op && self.photon_shift == 0
    }
}

impl fmt::Display for CouplingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} p={:+} strength={}",
            self.atomic_op, self.photon_shift, self.strength
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub omega_0: f64,
    pub omega_l: f64,
    pub terms: Vec<CouplingTerm>,
    pub n_levels: usize,
}

impl HamiltonianSpec {
    pub fn free(omega_0: f64, omega_l: f64, n_levels: usize) -> Self {
        Self {
            omega_0,
            omega_l,
            terms: Vec::new(),
            n_levels,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.n_levels
    }

    /// Checks the pipeline invariants (`ω_0, ω_L > 0`, at least eight levels).
    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if !(self.omega_0 > 0.0 && self.omega_0.is_finite()) {
            return Err(HamiltonianError::InvalidParameter {
                name: "omega_0",
                value: self.omega_0,
                reason: "must be positive and finite",
            });
        }
        if !(self.omega_l > 0.0 && self.omega_l.is_finite()) {
            return Err(HamiltonianError::InvalidParameter {
                name: "omega_l",
                value: self.omega_l,
                reason: "must be positive and finite",
            });
        }
        if self.n_levels < MIN_LEVELS {
            return Err(HamiltonianError::TooFewLevels(self.n_levels));
        }
        Ok(())
    }

    /// Term list with closures expanded. Self-adjoint terms are not doubled.
    pub fn expanded_terms(&self) -> Vec<(usize, CouplingTerm)> {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            out.push((i, *t));
            if t.hermitian_close && !t.is_self_adjoint() {
                out.push((i, t.adjoint()));
            }
        }
        out
    }

    fn check_terms(&self) -> Result<Vec<(usize, CouplingTerm)>, HamiltonianError> {
        let expanded = self.expanded_terms();
        for &(index, t) in &expanded {
            if !t.strength.is_finite() {
                return Err(HamiltonianError::NonFiniteStrength {
                    index,
                    term: t.to_string(),
                });
            }
            if t.photon_shift.unsigned_abs() as usize >= self.n_levels {
                return Err(HamiltonianError::ShiftOutOfRange {
                    index,
                    term: t.to_string(),
                    shift: t.photon_shift,
                    n_levels: self.n_levels,
                });
            }
        }
        let mut totals: BTreeMap<(AtomicOp, i64), (f64, usize)> = BTreeMap::new();
        for &(index, t) in &expanded {
            let slot = totals
                .entry((t.atomic_op, t.photon_shift))
                .or_insert((0.0, index));
            slot.0 += t.strength;
        }
        for (&(op, p), &(s, index)) in &totals {
            let partner = (op.adjoint(), -p);
            let found = totals.get(&partner).map_or(0.0, |v| v.0);
            if (found - s).abs() > 1e-14 * s.abs().max(found.abs()).max(1.0) {
                let term = self.terms[index];
                return Err(HamiltonianError::NonHermitian {
                    index,
                    term: term.to_string(),
                    partner: CouplingTerm::new(partner.0, partner.1, s).to_string(),
                    expected: s,
                    found,
                });
            }
        }
        Ok(expanded)
    }
}

/// Position of a bare state in the assembled matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BareBasisIndex {
    pub atom: Atom,
    pub n_photons: usize,
}

impl BareBasisIndex {
    pub fn new(atom: Atom, n_photons: usize) -> Self {
        Self { atom, n_photons }
    }

    pub fn flat(self) -> usize {
        2 * self.n_photons + usize::from(self.atom == Atom::Excited)
    }

    pub fn from_flat(flat: usize) -> Self {
        let atom = if flat % 2 == 1 {
            Atom::Excited
        } else {
            Atom::Ground
        };
        Self {
            atom,
            n_photons: flat / 2,
        }
    }

    /// Total excitation number `n + [e]`, conserved by the RWA coupling.
    pub fn excitations(self) -> usize {
        self.n_photons + usize::from(self.atom == Atom::Excited)
    }
}

/// Flat index of `(atom, n)` if `n` lies on the ladder.
pub fn flat_index(atom: Atom, n: i64, n_levels: usize) -> Option<usize> {
    (0..n_levels as i64)
        .contains(&n)
        .then(|| BareBasisIndex::new(atom, n as usize).flat())
}

/// Builds the real symmetric matrix of the spec on `2·n_levels` bare states.
/// Any `n_levels ≥ 1` is accepted; [`HamiltonianSpec::validate`] holds the
/// stricter pipeline limits.
pub fn assemble(spec: &HamiltonianSpec) -> Result<DenseMatrix, HamiltonianError> {
    let expanded = spec.check_terms()?;
    let n = spec.n_levels;
    let mut h = DenseMatrix::zeros(spec.dim());
    for k in 0..n {
        let ground = BareBasisIndex::new(Atom::Ground, k).flat();
        let excited = BareBasisIndex::new(Atom::Excited, k).flat();
        h.set(ground, ground, k as f64 * spec.omega_l);
        h.set(excited, excited, k as f64 * spec.omega_l + spec.omega_0);
    }
    for (_, t) in expanded {
        let (row_atom, col_atom) = t.atomic_op.entry();
        for k in 0..n as i64 {
            let (Some(col), Some(row)) = (
                flat_index(col_atom, k, n),
                flat_index(row_atom, k + t.photon_shift, n),
            ) else {
                continue;
            };
            h.add(row, col, t.strength);
        }
    }
    Ok(h)
}

/// Term list of the two-level model with Rabi coupling `rabi`, permanent-dipole
/// coupling `asym` on the excited state, and optional counter-rotating terms.
pub fn standard_spec(
    omega_0: f64,
    omega_l: f64,
    rabi: f64,
    asym: f64,
    include_counter_rotating: bool,
    n_levels: usize,
) -> HamiltonianSpec {
    let half = rabi / 2.0;
    let mut terms = vec![
        CouplingTerm::new(AtomicOp::Raise, -1, half),
        CouplingTerm::new(AtomicOp::Lower, 1, half),
    ];
    if asym > 0.0 {
        terms.push(CouplingTerm::new(AtomicOp::ExcProj, 1, asym));
        terms.push(CouplingTerm::new(AtomicOp::ExcProj, -1, asym));
    }
    if include_counter_rotating {
        terms.push(CouplingTerm::new(AtomicOp::Raise, 1, half));
        terms.push(CouplingTerm::new(AtomicOp::Lower, -1, half));
    }
    HamiltonianSpec {
        omega_0,
        omega_l,
        terms,
        n_levels,
    }
}
