//! Exact-diagonalization simulator for a pair of entangled central spins
//! coupled to thermal, self-interacting spin baths.
//!
//! The pipeline is:
//!
//! 1. [`model`] assembles the total Hamiltonian on a [`register::SpinRegister`]
//!    (two system spins, a coupled bath pair, a single bath spin by default).
//! 2. [`states`] builds the product initial state: a pure two-spin system
//!    state tensored with Gibbs states of each bath.
//! 3. [`dynamics`] diagonalizes the Hamiltonian once and evolves the full
//!    density matrix over a time grid, tracing out the baths at each point.
//! 4. [`entanglement`] computes the Wootters concurrence of the reduced state.
//! 5. [`zeno`] simulates repeated projective measurements onto the initial
//!    system state.
//! 6. [`config`] and [`sweep`] drive parameter sweeps and write CSV/JSON.

pub mod config;
pub mod dynamics;
pub mod entanglement;
pub mod linalg;
pub mod model;
pub mod register;
pub mod states;
pub mod sweep;
pub mod zeno;

pub use num_complex::Complex64 as C64;

pub use config::{parse_config, ExperimentConfig};
pub use dynamics::{Evolver, Trajectory};
pub use entanglement::{concurrence, spin_flip, ConcurrenceResult};
pub use linalg::{ComplexMatrix, HermEigDecomp};
pub use model::{CouplingTopology, ModelParams, SystemHamiltonianForm};
pub use register::{SiteRole, SpinRegister};
pub use states::{SystemStateKind, SystemStateSpec, ThermalSpec};
pub use zeno::{ProjectorScope, ZenoResult, ZenoSchedule};

use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dimension {dim} exceeds the maximum register dimension {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian (relative residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("invalid site selection: {0}")]
    InvalidSites(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid projector: {0}")]
    InvalidProjector(String),
    #[error("measurement outcome has vanishing probability {probability:e}")]
    Extinction { probability: f64 },
    #[error("time grid is not ascending and finite")]
    InvalidTimeGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
