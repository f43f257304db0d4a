//! Dephasing in the energy eigenbasis and reduction to classical states.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::model::same_energy;
use crate::{linalg, ClassicalState, Error, QuantumState, Result, DEFAULT_TOLERANCE};

/// Zeroes every entry coupling microstates of different energy. Coherence
/// inside a degenerate energy block is kept; the trace is unchanged.
pub fn dephase(rho: &QuantumState) -> QuantumState {
    let n = rho.dimension();
    let energies = rho.system().microstate_energies();
    let mut matrix = rho.matrix().to_vec();
    for r in 0..n {
        for c in 0..n {
            if !same_energy(energies[r], energies[c]) {
                matrix[r * n + c] = Complex64::new(0.0, 0.0);
            }
        }
    }
    QuantumState::from_parts_unchecked(rho.system().clone(), matrix)
}

/// Largest modulus of an entry coupling two different energies.
pub fn cross_energy_coherence(rho: &QuantumState) -> f64 {
    let n = rho.dimension();
    let energies = rho.system().microstate_energies();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            if !same_energy(energies[r], energies[c]) {
                worst = worst.max(rho.entry(r, c).norm());
            }
        }
    }
    worst
}

/// Diagonalizes each energy block of a dephased state.
///
/// Rotations inside a degenerate block commute with the Hamiltonian, so this
/// is free. The eigenvalues of each block are placed, in descending order, on
/// that block's microstates.
pub fn classicalize(rho: &QuantumState) -> Result<ClassicalState> {
    classicalize_with_tolerance(rho, DEFAULT_TOLERANCE)
}

pub fn classicalize_with_tolerance(rho: &QuantumState, tol: f64) -> Result<ClassicalState> {
    let magnitude = cross_energy_coherence(rho);
    if magnitude > tol {
        return Err(Error::Coherent { magnitude });
    }
    let n = rho.dimension();
    let mut probs = alloc::vec![0.0; n];
    for block in rho.system().energy_blocks() {
        let k = block.len();
        let sub: Vec<Complex64> = block
            .clone()
            .flat_map(|r| block.clone().map(move |c| (r, c)))
            .map(|(r, c)| rho.entry(r, c))
            .collect();
        let mut eig = if k == 1 { alloc::vec![sub[0].re] } else { linalg::hermitian_eigenvalues(k, &sub) };
        eig.sort_by(|a, b| b.total_cmp(a));
        for (slot, value) in block.zip(eig) {
            probs[slot] = value.max(0.0);
        }
    }
    // tiny negative eigenvalues were clipped; renormalize away the excess only
    let total: f64 = probs.iter().sum();
    if total > 1.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    ClassicalState::new(rho.system().clone(), probs)
}

/// The classical state `ω` that enters the work formulas for a quantum input.
pub fn dephased_classical(rho: &QuantumState) -> Result<ClassicalState> {
    classicalize(&dephase(rho))
}
