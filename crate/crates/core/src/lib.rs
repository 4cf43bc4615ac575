//! Steady-state radiative cascade of a dressed two-level atom.
//!
//! The crate builds an atom–laser Hamiltonian on a truncated photon ladder,
//! diagonalizes it, extracts the doublet structure of the dressed states and
//! the transition coefficients of the atomic raising operator, and turns those
//! into GKLS decay rates, steady-state dressed populations and the full
//! fluorescence spectrum (sidebands, central Lorentzians and coherent peaks of
//! every multiplet `q`).
//!
//! Module map:
//!
//! - [`hamiltonian`]: term DSL and matrix assembly on the bare basis.
//! - [`linalg`]: dense matrices and the cyclic Jacobi eigensolver.
//! - [`dressing`]: doublet extraction, amplitude tables, coefficients `A_ij^(q)`.
//! - [`rates`]: form factors, rate sets, scale-separation checks.
//! - [`spectrum`]: line records, spectral density, multiplet ratios.
//! - [`dynamics`]: closed-form reduced evolution and a full GKLS integrator.
//! - [`perturbation`]: first-order analytic dressed states and coefficients.
//! - [`pipeline`]: glue that runs a parameter point end to end.
//! - [`cli`]: configuration, subcommands and output writers.
//!
//! Units: `ħ = 1`, every energy is an angular frequency.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dressing;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod perturbation;
pub mod pipeline;
pub mod rates;
pub mod spectrum;

pub use error::{Error, Result};

/// Dressed-state label within a doublet: `One` is the upper state
/// (`E = Nω_L + Ω/2`), `Two` the lower one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Level {
    One,
    Two,
}

impl Level {
    pub const BOTH: [Level; 2] = [Level::One, Level::Two];

    pub fn index(self) -> usize {
        match self {
            Level::One => 0,
            Level::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}
