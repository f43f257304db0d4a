//! Feasibility of state transitions and single-shot work for finite systems
//! in contact with a heat bath.
//!
//! States are probability vectors over the microstates of a
//! [`HamiltonianSpec`], flattened in canonical order (energy ascending, then
//! degeneracy index). Everything here is a pure function over immutable
//! values; the crate is `no_std` and only needs `alloc`.
//!
//! * [`model`]: Hamiltonians, classical and quantum states, Gibbs states,
//!   tensor products.
//! * [`quantum`]: dephasing and block diagonalization of density matrices.
//! * [`divergence`]: relative entropy, min/max relative entropies and their
//!   smoothed versions.
//! * [`curve`]: β-ordering and thermo-majorization curves.
//! * [`work`]: single-shot free energies, distillable work, work of
//!   formation, Hamiltonian switching.
//! * [`gibbs_map`] and [`lp`]: Gibbs-preserving stochastic maps and the
//!   linear-programming oracle.
//! * [`bath`]: an explicit toy heat bath used as a brute-force oracle.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bath;
pub mod curve;
pub mod divergence;
mod error;
pub mod gibbs_map;
mod knapsack;
mod linalg;
pub mod lp;
pub mod model;
pub mod quantum;
pub mod work;

pub use error::{Error, Result};
pub use model::{ClassicalState, GibbsParameters, HamiltonianSpec, Level, QuantumState};

/// Default comparison tolerance for probabilities and curve heights.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Probabilities at or below this value count as unpopulated when taking supports.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Default cap on the number of microstates a tensor product may produce.
pub const DEFAULT_MAX_MICROSTATES: usize = 1 << 20;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeExamples;
