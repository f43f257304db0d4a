//! Single-shot free energies and work.
//!
//! Work is measured against an explicit two-level battery, the wit, with
//! levels `0` and `W`. Distillation moves the wit from `0` to `W`, formation
//! from `W` to `0`. Every quote is cross-checked by building the composite
//! system and running the thermo-majorization test on it.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::curve::{build_curve, thermo_majorizes, Verdict};
use crate::divergence::{d_max_smooth, d_min_smooth, BALL_SLACK};
use crate::knapsack;
use crate::model::check_positive_beta;
use crate::quantum::{classicalize, dephased_classical};
use crate::{ClassicalState, Error, HamiltonianSpec, Level, QuantumState, Result, SUPPORT_TOLERANCE};

/// Tolerance of the curve comparisons behind certificates and bisection.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-12;

/// Largest `β|W|` the switch bracket may grow to before giving up.
const MAX_BRACKET_EXPONENT: f64 = 600.0;

/// Input accepted by the free-energy functions.
#[derive(Debug, Clone, Copy)]
pub enum State<'a> {
    Classical(&'a ClassicalState),
    Quantum(&'a QuantumState),
}

impl<'a> From<&'a ClassicalState> for State<'a> {
    fn from(p: &'a ClassicalState) -> Self {
        State::Classical(p)
    }
}

impl<'a> From<&'a QuantumState> for State<'a> {
    fn from(rho: &'a QuantumState) -> Self {
        State::Quantum(rho)
    }
}

impl State<'_> {
    pub fn system(&self) -> &HamiltonianSpec {
        match self {
            State::Classical(p) => p.system(),
            State::Quantum(rho) => rho.system(),
        }
    }

    /// Classical state a thermal operation can reach for free: coherences
    /// between energies are dropped first.
    fn dephased(&self) -> Result<ClassicalState> {
        match self {
            State::Classical(p) => Ok((*p).clone()),
            State::Quantum(rho) => dephased_classical(rho),
        }
    }

    /// Requires the state to be block diagonal in energy.
    fn diagonal(&self) -> Result<ClassicalState> {
        match self {
            State::Classical(p) => Ok((*p).clone()),
            State::Quantum(rho) => classicalize(rho),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkMode {
    Distill,
    Form,
}

impl fmt::Display for WorkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorkMode::Distill => "distill",
            WorkMode::Form => "form",
        })
    }
}

impl FromStr for WorkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distill" => Ok(WorkMode::Distill),
            "form" => Ok(WorkMode::Form),
            other => Err(Error::Construction(alloc::format!("unknown work mode {other:?}"))),
        }
    }
}

/// A work value with the settings it was computed under.
///
/// For [`w_distill`] the value is the work gained, for [`w_form`] the work
/// spent. [`switch_work`] reports the wit's energy change, positive when
/// work is gained, in both modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkQuote {
    pub value: f64,
    pub epsilon: f64,
    pub mode: WorkMode,
    /// False when the smoothing fell back to the greedy knapsack.
    pub exact: bool,
    /// Curve-test margin of the wit transition at `value`; within
    /// [`CERTIFICATE_TOLERANCE`] of zero at the boundary.
    pub certificate_margin: f64,
}

fn kt(beta: f64) -> f64 {
    1.0 / beta
}

fn gibbs_of(p: &ClassicalState, beta: f64) -> Result<ClassicalState> {
    ClassicalState::gibbs(p.system(), beta)
}

/// `F = ⟨E⟩ − kT S`.
pub fn helmholtz_free_energy(p: &ClassicalState, beta: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    if !p.is_normalized(crate::DEFAULT_TOLERANCE) {
        return Err(Error::InvalidState("free energy needs a normalized state".into()));
    }
    Ok(p.mean_energy() - kt(beta) * p.entropy())
}

/// `F^ε_min = kT D^ε_min(ω‖τ) − kT ln Z`, with `ω` the dephased state.
pub fn f_min<'a>(state: impl Into<State<'a>>, beta: f64, epsilon: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    let omega = state.into().dephased()?;
    let tau = gibbs_of(&omega, beta)?;
    let d = d_min_smooth(&omega, &tau, epsilon)?;
    Ok(kt(beta) * (d.value - omega.system().ln_partition_function(beta)?))
}

/// `F^ε_max = kT D^ε_max(p‖τ) − kT ln Z`. Coherent inputs are rejected.
pub fn f_max<'a>(state: impl Into<State<'a>>, beta: f64, epsilon: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    let p = state.into().diagonal()?;
    let tau = gibbs_of(&p, beta)?;
    let d = d_max_smooth(&p, &tau, epsilon)?;
    Ok(kt(beta) * (d.value - p.system().ln_partition_function(beta)?))
}

/// `⟨E⟩ − kT ln rank` of the smoothed state with the fewest microstates.
///
/// Smoothing drops the cheapest microstates while their total probability
/// fits in `ε`; the mean energy is taken over what remains, renormalized.
pub fn f_min_zeroth_order<'a>(state: impl Into<State<'a>>, beta: f64, epsilon: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    crate::divergence::SmoothingBall::new(epsilon)?;
    let omega = state.into().dephased()?;
    let support: Vec<usize> = (0..omega.dimension()).filter(|&i| omega.probs()[i] > SUPPORT_TOLERANCE).collect();
    let costs: Vec<f64> = support.iter().map(|&i| omega.probs()[i]).collect();
    let dropped = if epsilon > 0.0 { knapsack::max_count(&costs, epsilon + BALL_SLACK) } else { Vec::new() };
    let mut keep = alloc::vec![true; support.len()];
    for k in dropped {
        keep[k] = false;
    }
    let energies = omega.system().microstate_energies();
    let (mut mass, mut energy, mut rank) = (0.0, 0.0, 0usize);
    for (&i, _) in support.iter().zip(&keep).filter(|(_, &kept)| kept) {
        mass += omega.probs()[i];
        energy += omega.probs()[i] * energies[i];
        rank += 1;
    }
    if rank == 0 {
        return Err(Error::InvalidState("state has no populated microstates".into()));
    }
    Ok(energy / mass - kt(beta) * libm::log(rank as f64))
}

/// Work that can be drawn from `state` while it relaxes to the Gibbs state:
/// `kT D^ε_min(ω‖τ)`.
pub fn w_distill<'a>(state: impl Into<State<'a>>, beta: f64, epsilon: f64) -> Result<WorkQuote> {
    check_positive_beta(beta)?;
    let omega = state.into().dephased()?;
    let tau = gibbs_of(&omega, beta)?;
    let smoothed = d_min_smooth(&omega, &tau, epsilon)?;
    let value = kt(beta) * smoothed.value;
    let certificate = wit_transition(&smoothed.state, beta, value, WorkMode::Distill)?;
    Ok(WorkQuote { value, epsilon, mode: WorkMode::Distill, exact: smoothed.exact, certificate_margin: certificate.margin })
}

/// Work needed to create `state` from the Gibbs state: `kT D^ε_max(p‖τ)`.
pub fn w_form<'a>(state: impl Into<State<'a>>, beta: f64, epsilon: f64) -> Result<WorkQuote> {
    check_positive_beta(beta)?;
    let p = state.into().diagonal()?;
    let tau = gibbs_of(&p, beta)?;
    let smoothed = d_max_smooth(&p, &tau, epsilon)?;
    let value = kt(beta) * smoothed.value;
    let target = completed_target(&smoothed.state, &tau, smoothed.value);
    let certificate = wit_transition(&target, beta, value, WorkMode::Form)?;
    Ok(WorkQuote { value, epsilon, mode: WorkMode::Form, exact: smoothed.exact, certificate_margin: certificate.margin })
}

/// Curve test for `ω_ε ⊗ |0⟩ → m·τ ⊗ |W⟩`, where `ω_ε` is the smoothed state
/// of mass `m`. Holds exactly for `W ≤ kT D^ε_min`.
pub fn distill_certificate<'a>(state: impl Into<State<'a>>, beta: f64, epsilon: f64, work: f64) -> Result<Verdict> {
    check_positive_beta(beta)?;
    let omega = state.into().dephased()?;
    let tau = gibbs_of(&omega, beta)?;
    let smoothed = d_min_smooth(&omega, &tau, epsilon)?;
    wit_transition(&smoothed.state, beta, work, WorkMode::Distill)
}

/// Curve test for `τ ⊗ |W⟩ → p̂ ⊗ |0⟩`, where `p̂` is the smoothed target.
/// Holds exactly for `W ≥ kT D^ε_max`.
pub fn form_certificate<'a>(state: impl Into<State<'a>>, beta: f64, epsilon: f64, work: f64) -> Result<Verdict> {
    check_positive_beta(beta)?;
    let p = state.into().diagonal()?;
    let tau = gibbs_of(&p, beta)?;
    let smoothed = d_max_smooth(&p, &tau, epsilon)?;
    let target = completed_target(&smoothed.state, &tau, smoothed.value);
    wit_transition(&target, beta, work, WorkMode::Form)
}

/// The capped state `min(p, λτ)` topped back up to unit mass without
/// exceeding `λτ` anywhere. When `λ < 1` no such completion exists and the
/// capped state is used as is.
fn completed_target(capped: &ClassicalState, tau: &ClassicalState, ln_lambda: f64) -> ClassicalState {
    let lambda = libm::exp(ln_lambda);
    let mass = capped.total_mass();
    let deficit = 1.0 - mass;
    if deficit <= 0.0 || lambda < 1.0 {
        return capped.clone();
    }
    let share = deficit / (lambda - mass);
    let probs = capped
        .probs()
        .iter()
        .zip(tau.probs())
        .map(|(&p, &t)| p + share * (lambda * t - p).max(0.0))
        .collect();
    ClassicalState::from_parts_unchecked(capped.system().clone(), probs)
}

/// Wit with levels `0` and `W`, and the microstate index of each.
fn wit(work: f64) -> Result<(HamiltonianSpec, usize, usize)> {
    // −0.0 sorts below 0.0; treat it as zero
    let work = if work == 0.0 { 0.0 } else { work };
    let h = HamiltonianSpec::nondegenerate(&[0.0, work])?.with_label("wit");
    let (ground, excited) = if work < 0.0 { (1, 0) } else { (0, 1) };
    Ok((h, ground, excited))
}

fn wit_state(h: &HamiltonianSpec, index: usize, mass: f64) -> Result<ClassicalState> {
    let mut probs = alloc::vec![0.0; 2];
    probs[index] = mass;
    ClassicalState::new(h.clone(), probs)
}

fn scaled(p: &ClassicalState, factor: f64) -> ClassicalState {
    let probs = p.probs().iter().map(|x| x * factor).collect();
    ClassicalState::from_parts_unchecked(p.system().clone(), probs)
}

/// Distill: `s ⊗ |0⟩ → m·τ ⊗ |W⟩` with `m` the mass of `s`.
/// Form: `τ ⊗ |W⟩ → s ⊗ |0⟩`.
fn wit_transition(s: &ClassicalState, beta: f64, work: f64, mode: WorkMode) -> Result<Verdict> {
    let (wh, ground, excited) = wit(work)?;
    let tau = gibbs_of(s, beta)?;
    let (initial, target) = match mode {
        WorkMode::Distill => (
            s.tensor(&wit_state(&wh, ground, 1.0)?)?,
            scaled(&tau, s.total_mass()).tensor(&wit_state(&wh, excited, 1.0)?)?,
        ),
        WorkMode::Form => (tau.tensor(&wit_state(&wh, excited, 1.0)?)?, s.tensor(&wit_state(&wh, ground, 1.0)?)?),
    };
    thermo_majorizes(&build_curve(&initial, beta)?, &build_curve(&target, beta)?, CERTIFICATE_TOLERANCE)
}

/// Whether `p_i/τ_i` is the same on the whole support: exactly the states
/// whose distillable work equals their work of formation at `ε = 0`.
pub fn is_reversible(p: &ClassicalState, beta: f64, tol: f64) -> Result<bool> {
    let tau = gibbs_of(p, beta)?;
    let ratios: Vec<f64> = p
        .probs()
        .iter()
        .zip(tau.probs())
        .filter(|(&x, _)| x > SUPPORT_TOLERANCE)
        .map(|(&x, &t)| x / t)
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    Ok(hi - lo <= tol * hi)
}

/// A change of Hamiltonian from `H` to `H′` together with the state change.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchScenario {
    initial: ClassicalState,
    final_state: ClassicalState,
    beta: f64,
}

impl SwitchScenario {
    /// The Hamiltonians are the systems the two states live on.
    pub fn new(initial: ClassicalState, final_state: ClassicalState, beta: f64) -> Result<Self> {
        check_positive_beta(beta)?;
        for s in [&initial, &final_state] {
            if !s.is_normalized(crate::DEFAULT_TOLERANCE) {
                return Err(Error::InvalidState("switch endpoints must be normalized".into()));
            }
        }
        Ok(SwitchScenario { initial, final_state, beta })
    }

    /// Gibbs state of `H` to Gibbs state of `H′`.
    pub fn thermal(initial: &HamiltonianSpec, final_system: &HamiltonianSpec, beta: f64) -> Result<Self> {
        Self::new(ClassicalState::gibbs(initial, beta)?, ClassicalState::gibbs(final_system, beta)?, beta)
    }

    pub fn initial(&self) -> &ClassicalState {
        &self.initial
    }

    pub fn final_state(&self) -> &ClassicalState {
        &self.final_state
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn initial_partition_function(&self) -> Result<f64> {
        self.initial.system().partition_function(self.beta)
    }

    pub fn final_partition_function(&self) -> Result<f64> {
        self.final_state.system().partition_function(self.beta)
    }
}

/// Direct sum of two systems, with the position of every summand microstate
/// in the canonical order of the sum.
fn direct_sum(a: &HamiltonianSpec, b: &HamiltonianSpec) -> Result<(HamiltonianSpec, Vec<usize>, Vec<usize>)> {
    let mut tagged: Vec<(f64, usize, usize)> = Vec::new();
    for (side, h) in [a, b].into_iter().enumerate() {
        tagged.extend(h.levels().iter().enumerate().map(|(k, l)| (l.energy, side, k)));
    }
    tagged.sort_by(|x, y| x.0.total_cmp(&y.0));
    let offsets = |h: &HamiltonianSpec| {
        let mut acc = 0;
        h.levels()
            .iter()
            .map(|l| {
                let start = acc;
                acc += l.degeneracy as usize;
                start
            })
            .collect::<Vec<usize>>()
    };
    let off = [offsets(a), offsets(b)];
    let mut place = [alloc::vec![0; a.dimension()], alloc::vec![0; b.dimension()]];
    let mut levels = Vec::with_capacity(tagged.len());
    let mut next = 0;
    for &(energy, side, k) in &tagged {
        let g = [a, b][side].levels()[k].degeneracy;
        levels.push(Level::new(energy, g));
        for m in 0..g as usize {
            place[side][off[side][k] + m] = next;
            next += 1;
        }
    }
    let [pa, pb] = place;
    Ok((HamiltonianSpec::new(levels)?.with_label("switch"), pa, pb))
}

/// Composite for the switch protocol at wit gap `W`.
///
/// The total system is `(H ⊗ wit) ⊕ (H′ ⊗ wit)`, the two sectors being the
/// switch qubit in `|0⟩` and `|1⟩`. Returns the initial state (`|0⟩` sector,
/// wit at `0`), the final state (`|1⟩` sector, wit at `W`) and the total
/// Hamiltonian.
pub fn build_switch_system(
    scenario: &SwitchScenario,
    work: f64,
) -> Result<(ClassicalState, ClassicalState, HamiltonianSpec)> {
    switch_pair(&scenario.initial, &scenario.final_state, work)
}

fn switch_pair(
    initial: &ClassicalState,
    final_state: &ClassicalState,
    work: f64,
) -> Result<(ClassicalState, ClassicalState, HamiltonianSpec)> {
    let (wh, ground, excited) = wit(work)?;
    let before = initial.tensor(&wit_state(&wh, ground, 1.0)?)?;
    let after = final_state.tensor(&wit_state(&wh, excited, 1.0)?)?;
    let (total, place_before, place_after) = direct_sum(before.system(), after.system())?;
    let embed = |s: &ClassicalState, place: &[usize]| {
        let mut probs = alloc::vec![0.0; total.dimension()];
        for (i, &x) in s.probs().iter().enumerate() {
            probs[place[i]] = x;
        }
        ClassicalState::from_parts_unchecked(total.clone(), probs)
    };
    let a = embed(&before, &place_before);
    let b = embed(&after, &place_after);
    Ok((a, b, total))
}

fn switch_verdict(initial: &ClassicalState, final_state: &ClassicalState, beta: f64, work: f64) -> Result<Verdict> {
    let (a, b, _) = switch_pair(initial, final_state, work)?;
    thermo_majorizes(&build_curve(&a, beta)?, &build_curve(&b, beta)?, CERTIFICATE_TOLERANCE)
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Endpoints the bisection actually compares: the smoothed initial state and
/// a matching multiple of `τ′` when distilling, `τ` and the completed
/// smoothed target when forming.
fn smoothed_endpoints(
    scenario: &SwitchScenario,
    epsilon: f64,
    mode: WorkMode,
) -> Result<(ClassicalState, ClassicalState, f64, bool)> {
    let beta = scenario.beta;
    let tau = gibbs_of(&scenario.initial, beta)?;
    let tau_final = gibbs_of(&scenario.final_state, beta)?;
    let ln_z = scenario.initial.system().ln_partition_function(beta)?;
    let ln_z_final = scenario.final_state.system().ln_partition_function(beta)?;
    match mode {
        WorkMode::Distill => {
            if l1(scenario.final_state.probs(), tau_final.probs()) > crate::DEFAULT_TOLERANCE {
                return Err(Error::InvalidState("distilling requires the final state to be thermal".into()));
            }
            let s = d_min_smooth(&scenario.initial, &tau, epsilon)?;
            let closed = kt(beta) * (s.value - ln_z + ln_z_final);
            let target = scaled(&tau_final, s.state.total_mass());
            Ok((s.state, target, closed, s.exact))
        }
        WorkMode::Form => {
            if l1(scenario.initial.probs(), tau.probs()) > crate::DEFAULT_TOLERANCE {
                return Err(Error::InvalidState("forming requires the initial state to be thermal".into()));
            }
            let s = d_max_smooth(&scenario.final_state, &tau_final, epsilon)?;
            let closed = kt(beta) * (ln_z_final - ln_z - s.value);
            let target = completed_target(&s.state, &tau_final, s.value);
            Ok((tau, target, closed, s.exact))
        }
    }
}

/// Closed-form boundary of [`switch_work`]:
/// distill `kT(D^ε_min(p‖τ) − ln Z + ln Z′)`, form `kT(ln Z′ − ln Z − D^ε_max(σ‖τ′))`.
pub fn switch_work_closed_form(scenario: &SwitchScenario, epsilon: f64, mode: WorkMode) -> Result<f64> {
    Ok(smoothed_endpoints(scenario, epsilon, mode)?.2)
}

/// Largest wit gain `W` for which the switch transition is feasible, found
/// by bisection on the composite curve test. Negative values are costs.
pub fn switch_work(scenario: &SwitchScenario, epsilon: f64, mode: WorkMode) -> Result<WorkQuote> {
    let beta = scenario.beta;
    let (initial, target, _, exact) = smoothed_endpoints(scenario, epsilon, mode)?;
    let feasible = |w: f64| -> Result<bool> { Ok(switch_verdict(&initial, &target, beta, w)?.holds) };

    let t = kt(beta);
    let h = scenario.initial.system();
    let h_final = scenario.final_state.system();
    let mut lo = -t * (h_final.ln_partition_function(beta)? + beta * h_final.max_energy());
    let mut hi = t * (h.ln_partition_function(beta)? + beta * h.max_energy());
    if lo > hi {
        core::mem::swap(&mut lo, &mut hi);
    }
    let mut step = (hi - lo).max(t);
    while !feasible(lo)? {
        hi = lo;
        lo -= step;
        step *= 2.0;
        if beta * lo.abs() > MAX_BRACKET_EXPONENT {
            return Err(Error::NoFeasibleWork);
        }
    }
    let mut step = (hi - lo).max(t);
    while feasible(hi)? {
        lo = hi;
        hi += step;
        step *= 2.0;
        if beta * hi.abs() > MAX_BRACKET_EXPONENT {
            return Err(Error::Construction("switch work is unbounded".into()));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * lo.abs().max(hi.abs()).max(t) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let margin = switch_verdict(&initial, &target, beta, lo)?.margin;
    Ok(WorkQuote { value: lo, epsilon, mode, exact, certificate_margin: margin })
}

/// `−kT ln(Z/Z′)`: work gained switching between thermal states.
pub fn thermal_switch_work(initial: &HamiltonianSpec, final_system: &HamiltonianSpec, beta: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    Ok(kt(beta) * (final_system.ln_partition_function(beta)? - initial.ln_partition_function(beta)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_complex::Complex64;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn two_level() -> HamiltonianSpec {
        HamiltonianSpec::nondegenerate(&[0.0, 1.0]).unwrap()
    }

    #[test]
    fn gibbs_free_energy() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.5, 2.0]).unwrap();
        let tau = ClassicalState::gibbs(&h, 2.0).unwrap();
        let expect = -0.5 * h.ln_partition_function(2.0).unwrap();
        assert!(close(helmholtz_free_energy(&tau, 2.0).unwrap(), expect, 1e-12));
        assert!(close(f_min(&tau, 2.0, 0.0).unwrap(), expect, 1e-12));
        assert!(close(f_max(&tau, 2.0, 0.0).unwrap(), expect, 1e-12));
        let ground = ClassicalState::pure(&h, 0).unwrap();
        assert_eq!(helmholtz_free_energy(&ground, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn szilard_value() {
        let h = HamiltonianSpec::new(vec![Level::new(0.0, 4)]).unwrap();
        let p = ClassicalState::pure(&h, 0).unwrap();
        let q = w_distill(&p, 1.0, 0.0).unwrap();
        assert!(close(q.value, libm::log(4.0), 1e-12));
        assert!(q.exact);
        assert!(q.certificate_margin.abs() <= CERTIFICATE_TOLERANCE);
    }

    #[test]
    fn eigenstate_is_reversible() {
        let h = two_level();
        let beta = 1.5;
        let p = ClassicalState::pure(&h, 1).unwrap();
        let d = w_distill(&p, beta, 0.0).unwrap().value;
        let f = w_form(&p, beta, 0.0).unwrap().value;
        let expect = (beta * 1.0 + h.ln_partition_function(beta).unwrap()) / beta;
        assert!(close(d, expect, 1e-12));
        assert!(close(f, expect, 1e-12));
        assert!(close(f_max(&p, beta, 0.0).unwrap(), 1.0, 1e-12));
        assert!(is_reversible(&p, beta, 1e-9).unwrap());
    }

    #[test]
    fn coherent_superposition_has_no_work() {
        let h = two_level();
        let beta = 1.0;
        let tau = ClassicalState::gibbs(&h, beta).unwrap();
        let amps: Vec<Complex64> = tau.probs().iter().map(|p| Complex64::new(libm::sqrt(*p), 0.0)).collect();
        let rho = QuantumState::pure(h.clone(), &amps).unwrap();
        assert!(close(f_min(&rho, beta, 0.0).unwrap(), -h.ln_partition_function(beta).unwrap(), 1e-12));
        assert!(close(w_distill(&rho, beta, 0.0).unwrap().value, 0.0, 1e-12));
        assert!(matches!(w_form(&rho, beta, 0.0), Err(Error::Coherent { .. })));
    }

    #[test]
    fn certificates_bracket_the_quote() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.3, 1.1]).unwrap();
        let p = ClassicalState::new(h, vec![0.2, 0.7, 0.1]).unwrap();
        for eps in [0.0, 0.05, 0.15] {
            let d = w_distill(&p, 1.0, eps).unwrap().value;
            assert!(distill_certificate(&p, 1.0, eps, d - 1e-6).unwrap().holds);
            assert!(!distill_certificate(&p, 1.0, eps, d + 1e-6).unwrap().holds);
            let f = w_form(&p, 1.0, eps).unwrap().value;
            assert!(form_certificate(&p, 1.0, eps, f + 1e-6).unwrap().holds);
            assert!(!form_certificate(&p, 1.0, eps, f - 1e-6).unwrap().holds);
        }
    }

    #[test]
    fn zeroth_order_examples() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.7]).unwrap();
        let p = ClassicalState::pure(&h, 1).unwrap();
        assert!(close(f_min_zeroth_order(&p, 1.0, 0.0).unwrap(), 0.7, 1e-12));
        let flat = HamiltonianSpec::new(vec![Level::new(0.0, 5)]).unwrap();
        let u = ClassicalState::uniform_on(&flat, &[0, 1, 2, 3, 4]).unwrap();
        assert!(close(f_min_zeroth_order(&u, 2.0, 0.0).unwrap(), -0.5 * libm::log(5.0), 1e-12));
    }

    #[test]
    fn direct_sum_places_every_microstate() {
        let a = HamiltonianSpec::new(vec![Level::new(0.0, 2), Level::new(1.0, 1)]).unwrap();
        let b = HamiltonianSpec::nondegenerate(&[-1.0, 0.5, 1.0]).unwrap();
        let (sum, pa, pb) = direct_sum(&a, &b).unwrap();
        let e = sum.microstate_energies();
        let (ea, eb) = (a.microstate_energies(), b.microstate_energies());
        for (i, &k) in pa.iter().enumerate() {
            assert_eq!(e[k], ea[i]);
        }
        for (i, &k) in pb.iter().enumerate() {
            assert_eq!(e[k], eb[i]);
        }
        let mut all: Vec<usize> = pa.iter().chain(&pb).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn switch_coordinates() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 1.0]).unwrap();
        let hp = HamiltonianSpec::nondegenerate(&[0.0, 2.0]).unwrap();
        let p = ClassicalState::new(h, vec![0.4, 0.6]).unwrap();
        let q = ClassicalState::gibbs(&hp, 1.0).unwrap();
        let s = SwitchScenario::new(p, q, 1.0).unwrap();
        let (a, b, total) = build_switch_system(&s, 0.25).unwrap();
        assert_eq!(total.dimension(), 8);
        assert!(close(a.total_mass(), 1.0, 1e-15));
        assert!(close(b.total_mass(), 1.0, 1e-15));
        let ca = build_curve(&a, 1.0).unwrap();
        let cb = build_curve(&b, 1.0).unwrap();
        // populated parts end at Σe^{−βE} and Σe^{−β(E′+W)}
        let end = |c: &crate::curve::ThermoCurve| c.points().iter().find(|pt| pt.1 >= 1.0 - 1e-12).unwrap().0;
        assert!(close(end(&ca), 1.0 + libm::exp(-1.0), 1e-12));
        assert!(close(end(&cb), (1.0 + libm::exp(-2.0)) * libm::exp(-0.25), 1e-12));
    }

    #[test]
    fn thermal_switch_matches_both_modes() {
        let h = HamiltonianSpec::nondegenerate(&[0.0]).unwrap();
        let hp = HamiltonianSpec::nondegenerate(&[0.0, 1.0]).unwrap();
        let expect = libm::log(1.0 + libm::exp(-1.0));
        assert!(close(thermal_switch_work(&h, &hp, 1.0).unwrap(), expect, 1e-15));
        let s = SwitchScenario::thermal(&h, &hp, 1.0).unwrap();
        for mode in [WorkMode::Distill, WorkMode::Form] {
            let w = switch_work(&s, 0.0, mode).unwrap();
            assert!(close(w.value, expect, 1e-9), "{mode}: {}", w.value);
        }
    }

    #[test]
    fn same_hamiltonian_thermal_switch_is_free() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.4, 0.9]).unwrap();
        let s = SwitchScenario::thermal(&h, &h, 2.0).unwrap();
        for mode in [WorkMode::Distill, WorkMode::Form] {
            assert!(switch_work(&s, 0.0, mode).unwrap().value.abs() < 1e-9);
        }
    }

    #[test]
    fn mode_preconditions() {
        let h = two_level();
        let p = ClassicalState::new(h.clone(), vec![0.5, 0.5]).unwrap();
        let s = SwitchScenario::new(p.clone(), p, 1.0).unwrap();
        assert!(switch_work(&s, 0.0, WorkMode::Distill).is_err());
        assert!(switch_work(&s, 0.0, WorkMode::Form).is_err());
        assert_eq!("form".parse::<WorkMode>().unwrap(), WorkMode::Form);
    }
}
