//! Two-excitation physics of qubits coupled to a Kerr-nonlinear cavity array.
//!
//! Layers, from the bottom up:
//!
//! - [`params`], [`lattice`]: parameters, detunings, geometry and bases.
//! - [`bath`]: single-photon band and exact two-photon bound states on the ring.
//! - [`couplings`]: effective couplings `W`, `F`, `G`, `Y` from eliminating photons.
//! - [`hamiltonians`]: every level of description as a tagged Hermitian matrix.
//! - [`solver`]: eigensolvers, propagation, perturbation theory, variational ansatz.
//! - [`observables`]: correlations, overlaps, droplet classification, loss estimates.
//! - [`validation`]: brute-force reference constructions.
//!
//! Units: `J = ħ = a = 1`. Energies are reported relative to the bottom of
//! the bound-state band, `E − E_0b`.

pub mod bath;
pub mod couplings;
pub mod error;
pub mod hamiltonians;
pub mod lattice;
pub mod model;
pub mod observables;
pub mod params;
pub mod solver;
pub mod system;
pub mod validation;

pub use error::{Error, Result};
pub use model::{Model, Scenario};
pub use params::{RawParams, SystemParams};
pub use system::ArraySystem;

pub use num_complex::Complex64 as c64;

/// Sizes the global rayon pool and the dense linear algebra parallelism.
/// Only the first call can size the rayon pool; later calls report an error.
pub fn set_thread_count(threads: usize) -> std::result::Result<(), rayon::ThreadPoolBuildError> {
    faer::set_global_parallelism(if threads <= 1 { faer::Par::Seq } else { faer::Par::rayon(threads) });
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()
}
