//! Free-fermion chain stirred by a moving bond-cutting obstacle.
//!
//! The crate builds the obstacle Hamiltonian family of an open hopping chain,
//! evolves Slater determinants under the periodic obstacle schedule and
//! measures energy, mode occupations, block entanglement, entanglement links
//! and Floquet level statistics. The [`rse`] module holds the random Slater
//! ensemble: a Haar sampler together with the Jacobi-ensemble laws for block
//! spectra and entropies.

pub mod checkpoint;
pub mod entanglement;
pub mod error;
pub mod evolve;
pub mod floquet;
pub mod harness;
pub mod lattice;
mod linalg;
pub mod observables;
pub mod quad;
pub mod rse;

pub use error::{Error, Result};
pub use evolve::{ModeMatrix, PropagatorCache, StepPropagator};
pub use lattice::{ChainParams, HoppingMatrix};

/// Complex scalar used for all amplitudes.
pub type C64 = num_complex::Complex64;
