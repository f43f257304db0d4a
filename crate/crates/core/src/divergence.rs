//! Relative entropies of a state with respect to a reference (usually Gibbs)
//! state, and their ε-smoothed versions.
//!
//! Logarithms are natural. Smoothing uses the L1 ball with subnormalized
//! states allowed: mass may be removed but is never renormalized.

use alloc::vec::Vec;

use crate::knapsack;
use crate::{ClassicalState, Error, Result, SUPPORT_TOLERANCE};

/// Slack added to the smoothing budget when testing ball membership.
pub const BALL_SLACK: f64 = 1e-12;

/// Bisection stops once the bracket on `λ` is this narrow.
pub const LAMBDA_TOLERANCE: f64 = 1e-10;

/// L1 ball of radius `epsilon` around a state, restricted to non-negative
/// vectors with total mass at most one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingBall {
    epsilon: f64,
}

impl SmoothingBall {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(SmoothingBall { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn contains(&self, center: &[f64], candidate: &[f64]) -> bool {
        if center.len() != candidate.len() || candidate.iter().any(|&x| x < 0.0) {
            return false;
        }
        let mass: f64 = candidate.iter().sum();
        let dist: f64 = center.iter().zip(candidate).map(|(a, b)| (a - b).abs()).sum();
        mass <= 1.0 + BALL_SLACK && dist <= self.epsilon + BALL_SLACK
    }
}

/// Value of a smoothed divergence together with the optimizing state.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub value: f64,
    /// False when the support search fell back to the greedy bound.
    pub exact: bool,
    /// The smoothed state attaining `value`; subnormalized when mass was removed.
    pub state: ClassicalState,
}

fn check_pair(p: &ClassicalState, tau: &ClassicalState) -> Result<()> {
    if p.dimension() != tau.dimension() {
        return Err(Error::DimensionMismatch { expected: tau.dimension(), found: p.dimension() });
    }
    Ok(())
}

fn check_support(p: &ClassicalState, tau: &ClassicalState) -> Result<()> {
    match p.probs().iter().zip(tau.probs()).position(|(&pi, &ti)| pi > 0.0 && ti <= 0.0) {
        Some(index) => Err(Error::SupportViolation { index }),
        None => Ok(()),
    }
}

/// `S(p‖τ) = Σ p_i ln(p_i/τ_i)`, with `0 ln 0 = 0`.
pub fn relative_entropy(p: &ClassicalState, tau: &ClassicalState) -> Result<f64> {
    check_pair(p, tau)?;
    check_support(p, tau)?;
    Ok(p.probs()
        .iter()
        .zip(tau.probs())
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &ti)| pi * (libm::log(pi) - libm::log(ti)))
        .sum())
}

/// `D_min(p‖τ) = −ln Σ_{i ∈ supp p} τ_i`.
pub fn d_min(p: &ClassicalState, tau: &ClassicalState) -> Result<f64> {
    check_pair(p, tau)?;
    let weight: f64 = p
        .probs()
        .iter()
        .zip(tau.probs())
        .filter(|(&pi, _)| pi > SUPPORT_TOLERANCE)
        .map(|(_, &ti)| ti)
        .sum::<f64>()
        .min(1.0);
    Ok(0.0 - libm::log(weight))
}

/// `D_max(p‖τ) = ln max_i p_i/τ_i`.
pub fn d_max(p: &ClassicalState, tau: &ClassicalState) -> Result<f64> {
    check_pair(p, tau)?;
    check_support(p, tau)?;
    Ok(libm::log(max_ratio(p.probs(), tau.probs())))
}

fn max_ratio(p: &[f64], tau: &[f64]) -> f64 {
    p.iter()
        .zip(tau)
        .filter(|(_, &t)| t > 0.0)
        .map(|(&pi, &ti)| pi / ti)
        .fold(0.0, f64::max)
}

/// `D^ε_min`: the largest `−ln τ(S)` over kept supports `S` obtained by
/// dropping microstates of total probability at most `ε`.
///
/// The drop set is a 0/1 knapsack (maximize dropped τ-weight under the
/// probability budget). It is solved exactly up to 25 distinct microstates;
/// beyond that a greedy pass gives a lower bound and `exact` is false.
pub fn d_min_smooth(p: &ClassicalState, tau: &ClassicalState, epsilon: f64) -> Result<Smoothed> {
    let ball = SmoothingBall::new(epsilon)?;
    check_pair(p, tau)?;
    let support: Vec<usize> = (0..p.dimension()).filter(|&i| p.probs()[i] > SUPPORT_TOLERANCE).collect();
    let costs: Vec<f64> = support.iter().map(|&i| p.probs()[i]).collect();
    let values: Vec<f64> = support.iter().map(|&i| tau.probs()[i]).collect();
    let selection = if ball.epsilon() == 0.0 {
        knapsack::Selection { chosen: Vec::new(), value: 0.0, exact: true }
    } else {
        knapsack::max_value(&costs, &values, ball.epsilon() + BALL_SLACK)
    };

    let mut probs = p.probs().to_vec();
    // microstates below the support threshold never counted as populated
    for x in probs.iter_mut().filter(|x| **x <= SUPPORT_TOLERANCE) {
        *x = 0.0;
    }
    for &k in &selection.chosen {
        probs[support[k]] = 0.0;
    }
    let kept: f64 = probs
        .iter()
        .zip(tau.probs())
        .filter(|(&x, _)| x > 0.0)
        .map(|(_, &t)| t)
        .sum();
    Ok(Smoothed {
        value: 0.0 - libm::log(kept),
        exact: selection.exact,
        state: ClassicalState::from_parts_unchecked(p.system().clone(), probs),
    })
}

/// Probability removed when `p` is capped at `λτ` entrywise.
fn trimmed_mass(p: &[f64], tau: &[f64], lambda: f64) -> f64 {
    p.iter().zip(tau).map(|(&pi, &ti)| (pi - lambda * ti).max(0.0)).sum()
}

/// `D^ε_max`: the smallest `ln max_i p'_i/τ_i` over the smoothing ball.
///
/// Capping `p` at `λτ` costs `Σ max(p_i − λτ_i, 0)` of L1 distance, which is
/// monotone in `λ`; bisection finds the smallest affordable `λ`. Returns
/// `−∞` when `ε` covers all of the mass.
pub fn d_max_smooth(p: &ClassicalState, tau: &ClassicalState, epsilon: f64) -> Result<Smoothed> {
    let ball = SmoothingBall::new(epsilon)?;
    check_pair(p, tau)?;
    check_support(p, tau)?;
    let (pv, tv) = (p.probs(), tau.probs());
    let mut hi = max_ratio(pv, tv);
    if ball.epsilon() > 0.0 {
        if p.total_mass() <= ball.epsilon() {
            hi = 0.0;
        } else {
            let mut lo = 0.0;
            let mut iterations = 0;
            while hi - lo > LAMBDA_TOLERANCE && iterations < 400 {
                let mid = 0.5 * (lo + hi);
                if trimmed_mass(pv, tv, mid) <= ball.epsilon() {
                    hi = mid;
                } else {
                    lo = mid;
                }
                iterations += 1;
            }
        }
    }
    let probs = pv.iter().zip(tv).map(|(&pi, &ti)| pi.min(hi * ti)).collect();
    Ok(Smoothed {
        value: libm::log(hi),
        exact: true,
        state: ClassicalState::from_parts_unchecked(p.system().clone(), probs),
    })
}
