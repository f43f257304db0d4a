//! Systems, states and Gibbs states.
//!
//! Microstates are the flattened `(energy, degeneracy index)` pairs of a
//! [`HamiltonianSpec`], ordered by energy and then by degeneracy index. Every
//! probability vector and matrix in the crate uses this order. Units have
//! `k = 1`, so `kT = 1/β`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;

use crate::{linalg, Error, Result, DEFAULT_MAX_MICROSTATES, DEFAULT_TOLERANCE};

/// One energy level and its degeneracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: u32,
}

impl Level {
    pub const fn new(energy: f64, degeneracy: u32) -> Self {
        Level { energy, degeneracy }
    }
}

/// Finite list of energy levels with degeneracies.
///
/// Levels are kept sorted by energy (stable, so levels with equal energy
/// keep their input order). The ground energy may be nonzero; use
/// [`HamiltonianSpec::canonical`] to shift it to zero.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    levels: Vec<Level>,
    label: Option<String>,
}

impl PartialEq for HamiltonianSpec {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
    }
}

/// Relative tolerance under which two energies count as the same energy.
const ENERGY_TIE: f64 = 1e-12;

pub(crate) fn same_energy(a: f64, b: f64) -> bool {
    (a - b).abs() <= ENERGY_TIE * a.abs().max(b.abs()).max(1.0)
}

impl HamiltonianSpec {
    pub fn new(mut levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidHamiltonian("at least one level is required".into()));
        }
        for (i, level) in levels.iter().enumerate() {
            if !level.energy.is_finite() {
                return Err(Error::InvalidHamiltonian(format!(
                    "level {i} has non-finite energy {}",
                    level.energy
                )));
            }
            if level.degeneracy == 0 {
                return Err(Error::InvalidHamiltonian(format!("level {i} has degeneracy 0")));
            }
        }
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Ok(HamiltonianSpec { levels, label: None })
    }

    /// One microstate per energy.
    pub fn nondegenerate(energies: &[f64]) -> Result<Self> {
        Self::new(energies.iter().map(|&e| Level::new(e, 1)).collect())
    }

    /// The one-level system with energy zero, the unit of [`tensor`].
    pub fn trivial() -> Self {
        HamiltonianSpec { levels: alloc::vec![Level::new(0.0, 1)], label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Total number of microstates, `Σ g(E)`.
    pub fn dimension(&self) -> usize {
        self.levels.iter().map(|l| l.degeneracy as usize).sum()
    }

    /// Energy of every microstate in canonical order.
    pub fn microstate_energies(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dimension());
        for level in &self.levels {
            out.extend(core::iter::repeat(level.energy).take(level.degeneracy as usize));
        }
        out
    }

    pub fn ground_energy(&self) -> f64 {
        self.levels[0].energy
    }

    pub fn max_energy(&self) -> f64 {
        self.levels[self.levels.len() - 1].energy
    }

    /// Same system with the ground energy shifted to zero.
    pub fn canonical(&self) -> Self {
        let shift = self.ground_energy();
        HamiltonianSpec {
            levels: self.levels.iter().map(|l| Level::new(l.energy - shift, l.degeneracy)).collect(),
            label: self.label.clone(),
        }
    }

    /// Microstate index ranges of equal energy, in canonical order.
    pub fn energy_blocks(&self) -> Vec<Range<usize>> {
        let energies = self.microstate_energies();
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=energies.len() {
            if i == energies.len() || !same_energy(energies[i], energies[start]) {
                blocks.push(start..i);
                start = i;
            }
        }
        blocks
    }

    pub fn partition_function(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        Ok(self
            .levels
            .iter()
            .map(|l| l.degeneracy as f64 * libm::exp(-beta * l.energy))
            .sum())
    }

    /// `ln Z`, computed relative to the ground energy so large `βE` does not underflow.
    pub fn ln_partition_function(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        let e0 = self.ground_energy();
        let shifted: f64 = self
            .levels
            .iter()
            .map(|l| l.degeneracy as f64 * libm::exp(-beta * (l.energy - e0)))
            .sum();
        Ok(libm::log(shifted) - beta * e0)
    }

    /// Non-interacting composite: energies add, degeneracies multiply.
    pub fn tensor(&self, other: &HamiltonianSpec) -> Result<HamiltonianSpec> {
        self.tensor_with_cap(other, DEFAULT_MAX_MICROSTATES)
    }

    pub fn tensor_with_cap(&self, other: &HamiltonianSpec, cap: usize) -> Result<HamiltonianSpec> {
        Ok(product_layout(self, other, cap)?.0)
    }
}

/// `Σ_microstates e^{−βE}`.
pub fn partition_function(system: &HamiltonianSpec, beta: f64) -> Result<f64> {
    system.partition_function(beta)
}

pub fn gibbs_state(system: &HamiltonianSpec, beta: f64) -> Result<ClassicalState> {
    ClassicalState::gibbs(system, beta)
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

pub(crate) fn check_positive_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

/// Inverse temperature together with the energy unit `kT` used for reporting work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsParameters {
    beta: f64,
    kt: f64,
}

impl GibbsParameters {
    pub fn from_beta(beta: f64) -> Result<Self> {
        check_positive_beta(beta)?;
        Ok(GibbsParameters { beta, kt: 1.0 / beta })
    }

    pub fn from_kt(kt: f64) -> Result<Self> {
        if !(kt.is_finite() && kt > 0.0) {
            return Err(Error::OutOfRange { value: kt, min: 0.0, max: f64::INFINITY });
        }
        Ok(GibbsParameters { beta: 1.0 / kt, kt })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }
}

/// Probability distribution over the microstates of a system.
///
/// Subnormalized vectors (total mass below one) are allowed; smoothing
/// produces them. Operations that need a normalized input say so.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    system: HamiltonianSpec,
    probs: Vec<f64>,
}

impl ClassicalState {
    pub fn new(system: HamiltonianSpec, mut probs: Vec<f64>) -> Result<Self> {
        let dim = system.dimension();
        if probs.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: probs.len() });
        }
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -DEFAULT_TOLERANCE {
                return Err(Error::InvalidState(format!("probability {i} is {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + DEFAULT_TOLERANCE {
            return Err(Error::InvalidState(format!("total probability {total} exceeds 1")));
        }
        Ok(ClassicalState { system, probs })
    }

    pub fn gibbs(system: &HamiltonianSpec, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let e0 = system.ground_energy();
        let weights: Vec<f64> = system
            .microstate_energies()
            .into_iter()
            .map(|e| libm::exp(-beta * (e - e0)))
            .collect();
        let z: f64 = weights.iter().sum();
        Ok(ClassicalState { system: system.clone(), probs: weights.into_iter().map(|w| w / z).collect() })
    }

    /// All mass on one microstate.
    pub fn pure(system: &HamiltonianSpec, index: usize) -> Result<Self> {
        let dim = system.dimension();
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index + 1 });
        }
        let mut probs = alloc::vec![0.0; dim];
        probs[index] = 1.0;
        Ok(ClassicalState { system: system.clone(), probs })
    }

    /// Uniform over the given microstates, zero elsewhere.
    pub fn uniform_on(system: &HamiltonianSpec, support: &[usize]) -> Result<Self> {
        let dim = system.dimension();
        let mut probs = alloc::vec![0.0; dim];
        if support.is_empty() {
            return Err(Error::InvalidState("empty support".into()));
        }
        for &i in support {
            if i >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: i + 1 });
            }
            probs[i] = 1.0 / support.len() as f64;
        }
        Ok(ClassicalState { system: system.clone(), probs })
    }

    pub fn system(&self) -> &HamiltonianSpec {
        &self.system
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dimension(&self) -> usize {
        self.probs.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total_mass() - 1.0).abs() <= tol
    }

    pub fn mean_energy(&self) -> f64 {
        self.system
            .microstate_energies()
            .iter()
            .zip(&self.probs)
            .map(|(e, p)| e * p)
            .sum()
    }

    /// Shannon entropy in nats with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|&&p| p > 0.0).map(|&p| p * libm::log(p)).sum::<f64>()
    }

    /// Same probabilities over a system with the same microstate count.
    pub fn with_system(&self, system: HamiltonianSpec) -> Result<Self> {
        ClassicalState::new(system, self.probs.clone())
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub(crate) fn from_parts_unchecked(system: HamiltonianSpec, probs: Vec<f64>) -> Self {
        debug_assert_eq!(system.dimension(), probs.len());
        ClassicalState { system, probs }
    }

    /// Product state over the composite system.
    pub fn tensor(&self, other: &ClassicalState) -> Result<ClassicalState> {
        tensor_with_cap(self, other, DEFAULT_MAX_MICROSTATES)
    }
}

/// Product distribution over the non-interacting composite of both systems.
pub fn tensor(a: &ClassicalState, b: &ClassicalState) -> Result<ClassicalState> {
    tensor_with_cap(a, b, DEFAULT_MAX_MICROSTATES)
}

pub fn tensor_with_cap(a: &ClassicalState, b: &ClassicalState, cap: usize) -> Result<ClassicalState> {
    let (system, pairs) = product_layout(&a.system, &b.system, cap)?;
    let probs = pairs.iter().map(|&(i, j)| a.probs[i] * b.probs[j]).collect();
    Ok(ClassicalState { system, probs })
}

/// Composite Hamiltonian plus, for every composite microstate in canonical
/// order, the pair of factor microstates it came from.
fn product_layout(
    a: &HamiltonianSpec,
    b: &HamiltonianSpec,
    cap: usize,
) -> Result<(HamiltonianSpec, Vec<(usize, usize)>)> {
    let count = a
        .dimension()
        .checked_mul(b.dimension())
        .ok_or(Error::TooManyMicrostates { count: usize::MAX, cap })?;
    if count > cap {
        return Err(Error::TooManyMicrostates { count, cap });
    }
    let offsets = |h: &HamiltonianSpec| {
        let mut acc = 0usize;
        h.levels
            .iter()
            .map(|l| {
                let start = acc;
                acc += l.degeneracy as usize;
                start
            })
            .collect::<Vec<_>>()
    };
    let (off_a, off_b) = (offsets(a), offsets(b));

    let mut pairs_of_levels = Vec::with_capacity(a.levels.len() * b.levels.len());
    for (la, level_a) in a.levels.iter().enumerate() {
        for (lb, level_b) in b.levels.iter().enumerate() {
            pairs_of_levels.push((level_a.energy + level_b.energy, la, lb));
        }
    }
    pairs_of_levels.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut levels = Vec::with_capacity(pairs_of_levels.len());
    let mut pairs = Vec::with_capacity(count);
    for &(energy, la, lb) in &pairs_of_levels {
        let (ga, gb) = (a.levels[la].degeneracy, b.levels[lb].degeneracy);
        let degeneracy = ga
            .checked_mul(gb)
            .ok_or(Error::TooManyMicrostates { count, cap })?;
        levels.push(Level::new(energy, degeneracy));
        for ia in 0..ga as usize {
            for ib in 0..gb as usize {
                pairs.push((off_a[la] + ia, off_b[lb] + ib));
            }
        }
    }
    let label = match (a.label(), b.label()) {
        (Some(x), Some(y)) => Some(format!("{x}⊗{y}")),
        _ => None,
    };
    Ok((HamiltonianSpec { levels, label }, pairs))
}

/// Density matrix over the microstates of a system, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    system: HamiltonianSpec,
    matrix: Vec<Complex64>,
}

impl QuantumState {
    /// Validates Hermiticity, unit trace and positive semidefiniteness within `tol`.
    pub fn new(system: HamiltonianSpec, matrix: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(system, matrix, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(system: HamiltonianSpec, matrix: Vec<Complex64>, tol: f64) -> Result<Self> {
        let n = system.dimension();
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: matrix.len() });
        }
        for r in 0..n {
            for c in r..n {
                let (a, b) = (matrix[r * n + c], matrix[c * n + r]);
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(Error::InvalidState(format!("entry ({r},{c}) is not finite")));
                }
                if (a - b.conj()).norm() > tol {
                    return Err(Error::InvalidState(format!("matrix is not Hermitian at ({r},{c})")));
                }
            }
        }
        let trace: f64 = (0..n).map(|i| matrix[i * n + i].re).sum();
        if (trace - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let min_eig = linalg::hermitian_eigenvalues(n, &matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig}")));
        }
        Ok(QuantumState { system, matrix })
    }

    /// `|ψ⟩⟨ψ|` for the given amplitudes (normalized internally).
    pub fn pure(system: HamiltonianSpec, amplitudes: &[Complex64]) -> Result<Self> {
        let n = system.dimension();
        if amplitudes.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: amplitudes.len() });
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let scale = 1.0 / libm::sqrt(norm2);
        let psi: Vec<Complex64> = amplitudes.iter().map(|a| a * scale).collect();
        let mut matrix = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                matrix.push(psi[r] * psi[c].conj());
            }
        }
        Ok(QuantumState { system, matrix })
    }

    /// Diagonal density matrix with the state's probabilities (requires normalization).
    pub fn from_classical(state: &ClassicalState) -> Result<Self> {
        let n = state.dimension();
        let mut matrix = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &p) in state.probs().iter().enumerate() {
            matrix[i * n + i] = Complex64::new(p, 0.0);
        }
        Self::new(state.system().clone(), matrix)
    }

    pub fn system(&self) -> &HamiltonianSpec {
        &self.system
    }

    pub fn dimension(&self) -> usize {
        self.system.dimension()
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dimension() + col]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(self.dimension(), &self.matrix)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .eigenvalues()
            .into_iter()
            .filter(|&l| l > crate::SUPPORT_TOLERANCE)
            .map(|l| l * libm::log(l))
            .sum::<f64>()
    }

    pub(crate) fn from_parts_unchecked(system: HamiltonianSpec, matrix: Vec<Complex64>) -> Self {
        QuantumState { system, matrix }
    }
}
