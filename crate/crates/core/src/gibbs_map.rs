//! Gibbs-preserving stochastic maps.
//!
//! A map is stored as a column-stochastic matrix with entry `(j, i)` equal
//! to the probability `p_{i→j}` of moving from microstate `i` to `j`, so that
//! `q = M p`. Classically, thermal operations are exactly the maps that fix
//! the Gibbs state; [`lp_transition_feasible`] decides whether one exists
//! between two given states and returns it.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::lp::{self, LinearProgram, LpScalar, LpStatus};
use crate::model::check_beta;
use crate::{ClassicalState, Error, HamiltonianSpec, Result, DEFAULT_TOLERANCE};

/// Column-stochastic matrix that fixes `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMap {
    dim: usize,
    /// row-major, `matrix[j * dim + i] = p_{i→j}`
    matrix: Vec<f64>,
    tau: ClassicalState,
}

impl GibbsMap {
    /// Validates stochasticity and the fixed point within `tol`.
    pub fn new(matrix: Vec<f64>, tau: ClassicalState, tol: f64) -> Result<Self> {
        let dim = tau.dimension();
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.len() });
        }
        if !is_gibbs_preserving(&matrix, &tau, tol) {
            return Err(Error::Construction("matrix is not a Gibbs-preserving stochastic map".into()));
        }
        Ok(GibbsMap { dim, matrix, tau })
    }

    pub(crate) fn from_parts_unchecked(matrix: Vec<f64>, tau: ClassicalState) -> Self {
        GibbsMap { dim: tau.dimension(), matrix, tau }
    }

    pub fn identity(tau: &ClassicalState) -> Self {
        let dim = tau.dimension();
        let mut matrix = alloc::vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        GibbsMap { dim, matrix, tau: tau.clone() }
    }

    /// Replaces any input by `tau`.
    pub fn thermalize(tau: &ClassicalState) -> Self {
        let dim = tau.dimension();
        let matrix = (0..dim * dim).map(|k| tau.probs()[k / dim]).collect();
        GibbsMap { dim, matrix, tau: tau.clone() }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> &ClassicalState {
        &self.tau
    }

    /// Row-major entries, `(j, i) ↦ p_{i→j}`.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Probability of moving from `source` to `target`.
    pub fn transition(&self, source: usize, target: usize) -> f64 {
        self.matrix[target * self.dim + source]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn apply(&self, p: &ClassicalState) -> Result<ClassicalState> {
        if p.dimension() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p.dimension() });
        }
        let q = (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.matrix[j * self.dim + i] * p.probs()[i]).sum::<f64>().max(0.0))
            .collect();
        ClassicalState::new(p.system().clone(), q)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &GibbsMap) -> Result<GibbsMap> {
        if first.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: first.dim });
        }
        let d = self.dim;
        let mut matrix = alloc::vec![0.0; d * d];
        for j in 0..d {
            for i in 0..d {
                matrix[j * d + i] = (0..d).map(|k| self.matrix[j * d + k] * first.matrix[k * d + i]).sum();
            }
        }
        Ok(GibbsMap { dim: d, matrix, tau: self.tau.clone() })
    }

    /// `weight·self + (1 − weight)·other`.
    pub fn mix(&self, other: &GibbsMap, weight: f64) -> Result<GibbsMap> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::OutOfRange { value: weight, min: 0.0, max: 1.0 });
        }
        let matrix = self.matrix.iter().zip(&other.matrix).map(|(a, b)| weight * a + (1.0 - weight) * b).collect();
        Ok(GibbsMap { dim: self.dim, matrix, tau: self.tau.clone() })
    }
}

/// Column sums are one, entries are non-negative and `M τ = τ`, all within `tol`.
pub fn is_gibbs_preserving(matrix: &[f64], tau: &ClassicalState, tol: f64) -> bool {
    let d = tau.dimension();
    if matrix.len() != d * d || matrix.iter().any(|&x| !x.is_finite() || x < -tol) {
        return false;
    }
    let stochastic = (0..d).all(|i| ((0..d).map(|j| matrix[j * d + i]).sum::<f64>() - 1.0).abs() <= tol);
    let fixed = (0..d).all(|j| {
        let image: f64 = (0..d).map(|i| matrix[j * d + i] * tau.probs()[i]).sum();
        (image - tau.probs()[j]).abs() <= tol
    });
    stochastic && fixed
}

pub fn apply_map(map: &GibbsMap, p: &ClassicalState) -> Result<ClassicalState> {
    map.apply(p)
}

/// Whether `p_{i→j} τ_i = p_{j→i} τ_j` for every pair, the τ-weighted form
/// of `p_{i→j}/p_{j→i} = e^{−β(E_j−E_i)}`. Pairs where both directions are
/// below `tol` pass.
pub fn satisfies_detailed_balance(map: &GibbsMap, system: &HamiltonianSpec, beta: f64, tol: f64) -> Result<bool> {
    let tau = ClassicalState::gibbs(system, beta)?;
    if tau.dimension() != map.dim {
        return Err(Error::DimensionMismatch { expected: map.dim, found: tau.dimension() });
    }
    let t = tau.probs();
    for i in 0..map.dim {
        for j in i + 1..map.dim {
            let (forward, backward) = (map.transition(i, j), map.transition(j, i));
            if forward <= tol && backward <= tol {
                continue;
            }
            let scale = (forward * t[i]).max(backward * t[j]);
            if (forward * t[i] - backward * t[j]).abs() > tol * scale.max(tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Which arithmetic the LP oracle uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpBackend {
    /// Exact rationals up to [`EXACT_LP_LIMIT`] microstates, floats above.
    #[default]
    Auto,
    Exact,
    Float,
}

/// Largest dimension the automatic backend solves in exact arithmetic.
pub const EXACT_LP_LIMIT: usize = 8;

/// Phase-one residuals at or below this count as feasible in float mode.
pub const FLOAT_FEASIBLE: f64 = 1e-9;
/// Phase-one residuals at or above this count as infeasible in float mode.
pub const FLOAT_INFEASIBLE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct LpReport {
    pub feasible: bool,
    /// A map carrying `p` to `q`, when one exists.
    pub witness: Option<GibbsMap>,
    /// Sum of artificial variables after phase one; exactly zero when an
    /// exact solve found the problem feasible.
    pub residual: f64,
    pub exact: bool,
    pub pivots: usize,
}

/// Decides whether some Gibbs-preserving stochastic map sends `p` to `q`.
pub fn lp_transition_feasible(p: &ClassicalState, q: &ClassicalState, tau: &ClassicalState) -> Result<LpReport> {
    lp_transition_feasible_with(p, q, tau, LpBackend::Auto)
}

pub fn lp_transition_feasible_with(
    p: &ClassicalState,
    q: &ClassicalState,
    tau: &ClassicalState,
    backend: LpBackend,
) -> Result<LpReport> {
    solve_transition(p, q, tau, false, backend)
}

/// As [`lp_transition_feasible`], with the map additionally required to
/// satisfy detailed balance with respect to the Gibbs state of `system`.
pub fn detailed_balance_feasible(
    p: &ClassicalState,
    q: &ClassicalState,
    system: &HamiltonianSpec,
    beta: f64,
) -> Result<LpReport> {
    detailed_balance_feasible_with(p, q, system, beta, LpBackend::Auto)
}

pub fn detailed_balance_feasible_with(
    p: &ClassicalState,
    q: &ClassicalState,
    system: &HamiltonianSpec,
    beta: f64,
    backend: LpBackend,
) -> Result<LpReport> {
    check_beta(beta)?;
    let tau = ClassicalState::gibbs(system, beta)?;
    solve_transition(p, q, &tau, true, backend)
}

fn check_transition_inputs(p: &ClassicalState, q: &ClassicalState, tau: &ClassicalState) -> Result<()> {
    let d = tau.dimension();
    for s in [p, q] {
        if s.dimension() != d {
            return Err(Error::DimensionMismatch { expected: d, found: s.dimension() });
        }
    }
    if let Some(index) = tau.probs().iter().position(|&t| t <= 0.0) {
        return Err(Error::InvalidState(format!("reference state has no weight on microstate {index}")));
    }
    Ok(())
}

/// Variables `M_{ji}` at index `j·d + i`. The last rows of `Mτ = τ` and
/// `Mp = q` are implied by the column sums and are left out, so float
/// round-off in the totals cannot make an exact solve infeasible.
fn transition_program<S: LpScalar>(p: &[f64], q: &[f64], tau: &[f64], detailed_balance: bool) -> LinearProgram<S> {
    let d = tau.len();
    let var = |j: usize, i: usize| j * d + i;
    let mut lp = LinearProgram::new(d * d);
    for i in 0..d {
        let terms: Vec<(usize, S)> = (0..d).map(|j| (var(j, i), S::one())).collect();
        lp.add_equality(&terms, S::one());
    }
    for j in 0..d.saturating_sub(1) {
        let terms: Vec<(usize, S)> = (0..d).map(|i| (var(j, i), S::from_f64(tau[i]))).collect();
        lp.add_equality(&terms, S::from_f64(tau[j]));
    }
    for j in 0..d.saturating_sub(1) {
        let terms: Vec<(usize, S)> = (0..d).filter(|&i| p[i] != 0.0).map(|i| (var(j, i), S::from_f64(p[i]))).collect();
        lp.add_equality(&terms, S::from_f64(q[j]));
    }
    if detailed_balance {
        for i in 0..d {
            for j in i + 1..d {
                let terms = [(var(j, i), S::from_f64(tau[i])), (var(i, j), S::zero().sub(&S::from_f64(tau[j])))];
                lp.add_equality(&terms, S::zero());
            }
        }
    }
    lp
}

fn solve_transition(
    p: &ClassicalState,
    q: &ClassicalState,
    tau: &ClassicalState,
    detailed_balance: bool,
    backend: LpBackend,
) -> Result<LpReport> {
    check_transition_inputs(p, q, tau)?;
    let d = tau.dimension();
    let mass_gap = (p.total_mass() - q.total_mass()).abs();
    if mass_gap > DEFAULT_TOLERANCE {
        // stochastic maps preserve total probability
        return Ok(LpReport { feasible: false, witness: None, residual: mass_gap, exact: false, pivots: 0 });
    }
    let exact = match backend {
        LpBackend::Exact => true,
        LpBackend::Float => false,
        LpBackend::Auto => d <= EXACT_LP_LIMIT,
    };
    let mut exact = exact;
    let mut exact_solution = None;
    if exact {
        let sol = lp::solve(&transition_program::<BigRational>(p.probs(), q.probs(), tau.probs(), detailed_balance));
        let residual = sol.phase_one_residual.to_f64();
        if sol.status == LpStatus::Optimal || residual > FLOAT_FEASIBLE {
            let x: Vec<f64> = sol.x.iter().map(LpScalar::to_f64).collect();
            exact_solution = Some((sol.status, x, residual, sol.pivots));
        } else {
            // the inputs are doubles: a violation this small is their rounding
            exact = false;
        }
    }
    let (status, x, residual, pivots) = if let Some(solution) = exact_solution {
        solution
    } else {
        let sol = lp::solve(&transition_program::<f64>(p.probs(), q.probs(), tau.probs(), detailed_balance));
        let residual = sol.phase_one_residual.max(0.0);
        if residual > FLOAT_FEASIBLE && residual < FLOAT_INFEASIBLE {
            return Err(Error::DegenerateLp { residual, pivots: sol.pivots });
        }
        let status = if residual <= FLOAT_FEASIBLE { LpStatus::Optimal } else { LpStatus::Infeasible };
        (status, sol.x, residual, sol.pivots)
    };
    if status != LpStatus::Optimal {
        return Ok(LpReport { feasible: false, witness: None, residual, exact, pivots });
    }
    let matrix = x.into_iter().map(|v| v.max(0.0)).collect();
    Ok(LpReport {
        feasible: true,
        witness: Some(GibbsMap::from_parts_unchecked(matrix, tau.clone())),
        residual,
        exact,
        pivots,
    })
}

/// Whether exactly one Gibbs-preserving map sends `p` to `q`: every matrix
/// entry has the same minimum and maximum over the feasible set, up to
/// [`DEFAULT_TOLERANCE`](crate::DEFAULT_TOLERANCE). The programs are solved
/// exactly; the slack only absorbs the rounding already present in `p` and `q`.
pub fn unique_transition_map(p: &ClassicalState, q: &ClassicalState, tau: &ClassicalState) -> Result<Option<bool>> {
    check_transition_inputs(p, q, tau)?;
    let d = tau.dimension();
    let mut lp = transition_program::<BigRational>(p.probs(), q.probs(), tau.probs(), false);
    if lp::solve(&lp).status != LpStatus::Optimal {
        return Ok(None);
    }
    let one = BigRational::from_integer(BigInt::from(1));
    for k in 0..d * d {
        let mut bounds = Vec::with_capacity(2);
        for sign in [one.clone(), -one.clone()] {
            let mut c = alloc::vec![<BigRational as Zero>::zero(); d * d];
            c[k] = sign.clone();
            lp.set_objective(c);
            let sol = lp::solve(&lp);
            bounds.push(sol.objective.map(|v| v * &sign));
        }
        let spread = match (&bounds[0], &bounds[1]) {
            (Some(lo), Some(hi)) => (hi - lo).to_f64(),
            _ => f64::INFINITY,
        };
        if spread.abs() > DEFAULT_TOLERANCE {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

/// Quasi-cycle along `order`: each level moves to the next one in the cycle
/// with probability `e^{−β(E_max − E_i)}` and otherwise stays.
///
/// Gibbs preservation forces the probability current `τ_i p_{i→next}` to be
/// the same on every edge of the cycle; the top level moves out entirely,
/// which fixes that current at `τ_max` and every other rate with it.
pub fn quasi_cycle(system: &HamiltonianSpec, beta: f64, order: &[usize]) -> Result<GibbsMap> {
    check_beta(beta)?;
    if system.levels().iter().any(|l| l.degeneracy != 1) {
        return Err(Error::InvalidHamiltonian("quasi-cycles need one microstate per level".into()));
    }
    let d = system.dimension();
    let mut seen = alloc::vec![false; d];
    if order.len() != d || order.iter().any(|&i| i >= d || core::mem::replace(&mut seen[i], true)) {
        return Err(Error::InvalidState(format!("{order:?} is not a permutation of 0..{d}")));
    }
    let tau = ClassicalState::gibbs(system, beta)?;
    let energies = system.microstate_energies();
    let e_max = system.max_energy();
    let mut matrix = alloc::vec![0.0; d * d];
    for (k, &i) in order.iter().enumerate() {
        let next = order[(k + 1) % d];
        let rate = libm::exp(-beta * (e_max - energies[i]));
        matrix[next * d + i] += rate;
        matrix[i * d + i] += 1.0 - rate;
    }
    if !is_gibbs_preserving(&matrix, &tau, 1e-12) {
        return Err(Error::Construction("quasi-cycle does not preserve the Gibbs state".into()));
    }
    Ok(GibbsMap::from_parts_unchecked(matrix, tau))
}

/// Integer counts `k_{i→j}` of bath-degenerate microstates moved from group
/// `i` to group `j`, together with the group sizes `d_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCurrents {
    /// row-major, `currents[i * n + j] = k_{i→j}`
    currents: Vec<u64>,
    sizes: Vec<u64>,
}

impl TransitionCurrents {
    /// Requires `Σ_j k_{i→j} = d_i` and `Σ_i k_{i→j} = d_j`.
    pub fn new(currents: Vec<u64>, sizes: Vec<u64>) -> Result<Self> {
        let n = sizes.len();
        if currents.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: currents.len() });
        }
        if sizes.contains(&0) {
            return Err(Error::MarginalViolation("group sizes must be positive".into()));
        }
        for i in 0..n {
            let out: u64 = (0..n).map(|j| currents[i * n + j]).sum();
            if out != sizes[i] {
                return Err(Error::MarginalViolation(format!("group {i} sends {out} of {}", sizes[i])));
            }
            let incoming: u64 = (0..n).map(|j| currents[j * n + i]).sum();
            if incoming != sizes[i] {
                return Err(Error::MarginalViolation(format!("group {i} receives {incoming} of {}", sizes[i])));
            }
        }
        Ok(TransitionCurrents { currents, sizes })
    }

    /// Quasi-cycle pattern: the whole of the smallest group circulates along
    /// `order`, everything else stays put.
    pub fn quasi_cycle(sizes: Vec<u64>, order: &[usize]) -> Result<Self> {
        let n = sizes.len();
        if order.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: order.len() });
        }
        let flow = *sizes.iter().min().ok_or(Error::MarginalViolation("no groups".into()))?;
        let mut currents = alloc::vec![0u64; n * n];
        for (k, &i) in order.iter().enumerate() {
            let next = order[(k + 1) % n];
            currents[i * n + next] += flow;
            currents[i * n + i] += sizes[i] - flow;
        }
        Self::new(currents, sizes)
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn current(&self, from: usize, to: usize) -> u64 {
        self.currents[from * self.sizes.len() + to]
    }

    /// Transition probabilities `k_{i→j}/d_i` in exact arithmetic, row-major
    /// `(j, i)` like [`GibbsMap`], and the fixed point `d_i/Σd`.
    pub fn exact_map(&self) -> (Vec<BigRational>, Vec<BigRational>) {
        let n = self.sizes.len();
        let total: u64 = self.sizes.iter().sum();
        let ratio = |a: u64, b: u64| BigRational::new(BigInt::from(a), BigInt::from(b));
        let matrix = (0..n * n).map(|k| ratio(self.current(k % n, k / n), self.sizes[k % n])).collect();
        let tau = self.sizes.iter().map(|&s| ratio(s, total)).collect();
        (matrix, tau)
    }
}

/// `p_{i→j} = k_{i→j}/d_i`, fixing the distribution proportional to `d_i`.
pub fn currents_to_map(currents: &TransitionCurrents, system: &HamiltonianSpec) -> Result<GibbsMap> {
    let n = currents.sizes.len();
    if system.dimension() != n {
        return Err(Error::DimensionMismatch { expected: n, found: system.dimension() });
    }
    let total: u64 = currents.sizes.iter().sum();
    let tau = ClassicalState::new(
        system.clone(),
        currents.sizes.iter().map(|&s| s as f64 / total as f64).collect(),
    )?;
    let matrix = (0..n * n)
        .map(|k| currents.current(k % n, k / n) as f64 / currents.sizes[k % n] as f64)
        .collect();
    Ok(GibbsMap::from_parts_unchecked(matrix, tau))
}

/// Exact Gibbs-preservation check for rational matrices in `(j, i)` layout.
pub fn is_gibbs_preserving_exact(matrix: &[BigRational], tau: &[BigRational]) -> bool {
    let d = tau.len();
    if matrix.len() != d * d || matrix.iter().any(|x| x < &<BigRational as Zero>::zero()) {
        return false;
    }
    let one = BigRational::from_integer(BigInt::from(1));
    let stochastic = (0..d).all(|i| (0..d).map(|j| &matrix[j * d + i]).sum::<BigRational>() == one);
    let fixed = (0..d).all(|j| (0..d).map(|i| &matrix[j * d + i] * &tau[i]).sum::<BigRational>() == tau[j]);
    stochastic && fixed
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn three_level() -> HamiltonianSpec {
        HamiltonianSpec::nondegenerate(&[0.0, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn identity_and_thermalize() {
        let tau = ClassicalState::gibbs(&three_level(), 0.7).unwrap();
        let id = GibbsMap::identity(&tau);
        assert!(is_gibbs_preserving(id.matrix(), &tau, 1e-15));
        assert!(satisfies_detailed_balance(&id, &three_level(), 0.7, 1e-12).unwrap());
        let th = GibbsMap::thermalize(&tau);
        assert!(is_gibbs_preserving(th.matrix(), &tau, 1e-15));
        let p = ClassicalState::pure(&three_level(), 2).unwrap();
        assert_eq!(id.apply(&p).unwrap(), p);
        let q = th.apply(&p).unwrap();
        for (a, b) in q.probs().iter().zip(tau.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn map_to_ground_is_not_gibbs_preserving() {
        let tau = ClassicalState::gibbs(&three_level(), 0.7).unwrap();
        let mut m = vec![0.0; 9];
        m[..3].copy_from_slice(&[1.0, 1.0, 1.0]);
        assert!(!is_gibbs_preserving(&m, &tau, 1e-9));
        assert!(GibbsMap::new(m, tau, 1e-9).is_err());
    }

    #[test]
    fn three_level_quasi_cycle() {
        let beta = 1.0;
        let m = quasi_cycle(&three_level(), beta, &[0, 1, 2]).unwrap();
        let e = |x: f64| libm::exp(x);
        assert!(m.transition(2, 2).abs() < 1e-15);
        assert!((m.transition(2, 0) - 1.0).abs() < 1e-15);
        assert!((m.transition(0, 1) - e(-2.0)).abs() < 1e-15);
        assert!((m.transition(1, 2) - e(-1.0)).abs() < 1e-15);
        assert!(!satisfies_detailed_balance(&m, &three_level(), beta, 1e-9).unwrap());

        let p = ClassicalState::new(three_level(), vec![0.0, 0.5, 0.5]).unwrap();
        let q = m.apply(&p).unwrap();
        let expect = [0.5, 0.5 * (1.0 - e(-1.0)), 0.5 * e(-1.0)];
        for (a, b) in q.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn two_level_quasi_cycle_satisfies_detailed_balance() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.8]).unwrap();
        let qc = quasi_cycle(&h, 1.3, &[0, 1]).unwrap();
        let tau = qc.tau().clone();
        for r in [0.0, 0.25, 0.5, 1.0] {
            let m = qc.mix(&GibbsMap::identity(&tau), r).unwrap();
            assert!(is_gibbs_preserving(m.matrix(), &tau, 1e-14));
            assert!(satisfies_detailed_balance(&m, &h, 1.3, 1e-9).unwrap());
        }
    }

    #[test]
    fn quasi_cycle_rejects_bad_input() {
        let h = HamiltonianSpec::new(vec![crate::Level::new(0.0, 2)]).unwrap();
        assert!(quasi_cycle(&h, 1.0, &[0, 1]).is_err());
        assert!(quasi_cycle(&three_level(), 1.0, &[0, 0, 1]).is_err());
        assert!(quasi_cycle(&three_level(), 1.0, &[0, 1]).is_err());
    }

    #[test]
    fn lp_trivial_cases() {
        let h = three_level();
        let tau = ClassicalState::gibbs(&h, 0.9).unwrap();
        let p = ClassicalState::new(h.clone(), vec![0.1, 0.2, 0.7]).unwrap();
        for backend in [LpBackend::Exact, LpBackend::Float] {
            let to_tau = lp_transition_feasible_with(&p, &tau, &tau, backend).unwrap();
            assert!(to_tau.feasible);
            let w = to_tau.witness.unwrap();
            assert!(is_gibbs_preserving(w.matrix(), &tau, 1e-9));
            let self_map = lp_transition_feasible_with(&p, &p, &tau, backend).unwrap();
            assert!(self_map.feasible);
            let back = lp_transition_feasible_with(&tau, &p, &tau, backend).unwrap();
            assert!(!back.feasible);
        }
    }

    #[test]
    fn detailed_balance_lp() {
        let h = three_level();
        let tau = ClassicalState::gibbs(&h, 1.0).unwrap();
        let p = ClassicalState::new(h.clone(), vec![0.5, 0.5, 0.0]).unwrap();
        assert!(detailed_balance_feasible(&p, &tau, &h, 1.0).unwrap().feasible);
        // the 0→1→2 quasi-cycle image of (½, ½, 0) needs a cyclic current
        let q = quasi_cycle(&h, 1.0, &[0, 1, 2]).unwrap().apply(&p).unwrap();
        assert!(lp_transition_feasible(&p, &q, &tau).unwrap().feasible);
        assert!(!detailed_balance_feasible(&p, &q, &h, 1.0).unwrap().feasible);
    }

    #[test]
    fn mass_mismatch_is_infeasible() {
        let h = three_level();
        let tau = ClassicalState::gibbs(&h, 1.0).unwrap();
        let p = ClassicalState::new(h.clone(), vec![0.5, 0.2, 0.0]).unwrap();
        assert!(!lp_transition_feasible(&p, &tau, &tau).unwrap().feasible);
    }

    #[test]
    fn currents_marginals_checked() {
        assert!(TransitionCurrents::new(vec![1, 1, 0, 1], vec![2, 1]).is_err());
        let k = TransitionCurrents::new(vec![3, 0, 0, 2], vec![3, 2]).unwrap();
        let h = HamiltonianSpec::nondegenerate(&[0.0, 1.0]).unwrap();
        let m = currents_to_map(&k, &h).unwrap();
        assert_eq!(m.matrix(), &[1.0, 0.0, 0.0, 1.0]);
        let (exact, tau) = k.exact_map();
        assert!(is_gibbs_preserving_exact(&exact, &tau));
    }
}
