use thiserror::Error;

use crate::dressing::DressingError;
use crate::dynamics::DynamicsError;
use crate::hamiltonian::HamiltonianError;
use crate::linalg::EigenError;
use crate::perturbation::PerturbationError;
use crate::rates::RatesError;
use crate::spectrum::SpectrumError;

/// Pipeline error tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hamiltonian: {0}")]
    Hamiltonian(#[from] HamiltonianError),
    #[error("eigensolver: {0}")]
    Eigen(#[from] EigenError),
    #[error("dressing: {0}")]
    Dressing(#[from] DressingError),
    #[error("rates: {0}")]
    Rates(#[from] RatesError),
    #[error("spectrum: {0}")]
    Spectrum(#[from] SpectrumError),
    #[error("dynamics: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("perturbation: {0}")]
    Perturbation(#[from] PerturbationError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
