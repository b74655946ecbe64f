use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::greens::GreensError;
use crate::hamiltonian::HamiltonianError;
use crate::lowdin::LowdinError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error(transparent)]
    Lowdin(#[from] LowdinError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{0}")]
    Setup(String),
}
