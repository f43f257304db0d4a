//! β-ordering and thermo-majorization curves.
//!
//! A curve is drawn by sorting microstates by `p_i e^{βE_i}` (descending) and
//! joining the cumulative points `(Σ e^{−βE_j}, Σ p_j)`. The x-axis is kept
//! unnormalized, ending at `Z`; [`ThermoCurve::normalized`] rescales it to
//! `[0, 1]`. A transition between two diagonal states of the same system is
//! possible exactly when the initial curve lies on or above the final one.

use alloc::vec::Vec;

use crate::model::check_beta;
use crate::{ClassicalState, Error, Result, DEFAULT_TOLERANCE};

/// Relative gap in `p_i e^{βE_i}` below which two microstates are tied.
const ORDER_TIE: f64 = 1e-12;

/// Microstate indices sorted by `p_i e^{βE_i}`, largest first.
///
/// Ties go to the lower canonical index and unpopulated microstates come
/// last, so the order is deterministic.
pub fn beta_order(p: &ClassicalState, beta: f64) -> Result<Vec<usize>> {
    check_beta(beta)?;
    let energies = p.system().microstate_energies();
    let log_weight = |i: usize| libm::log(p.probs()[i]) + beta * energies[i];

    let mut populated: Vec<usize> = (0..p.dimension()).filter(|&i| p.probs()[i] > 0.0).collect();
    populated.sort_by(|&a, &b| log_weight(b).total_cmp(&log_weight(a)));

    let mut order = Vec::with_capacity(p.dimension());
    let mut start = 0;
    while start < populated.len() {
        let head = log_weight(populated[start]);
        let mut end = start + 1;
        while end < populated.len() && (head - log_weight(populated[end])).abs() <= ORDER_TIE * head.abs().max(1.0)
        {
            end += 1;
        }
        let mut tied = populated[start..end].to_vec();
        tied.sort_unstable();
        order.extend(tied);
        start = end;
    }
    order.extend((0..p.dimension()).filter(|&i| p.probs()[i] <= 0.0));
    Ok(order)
}

/// Piecewise-linear concave curve starting at `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoCurve {
    points: Vec<(f64, f64)>,
    beta: f64,
    order: Vec<usize>,
}

pub fn build_curve(p: &ClassicalState, beta: f64) -> Result<ThermoCurve> {
    let order = beta_order(p, beta)?;
    let energies = p.system().microstate_energies();
    let mut points = Vec::with_capacity(order.len() + 1);
    let (mut x, mut y) = (0.0, 0.0);
    points.push((x, y));
    for &i in &order {
        x += libm::exp(-beta * energies[i]);
        y += p.probs()[i];
        points.push((x, y));
    }
    Ok(ThermoCurve { points, beta, order })
}

impl ThermoCurve {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The β-ordering used to draw the curve.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Right end of the x-axis: the partition function for unnormalized curves.
    pub fn x_max(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn total_mass(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }

    /// Segment slopes, `p_i e^{βE_i}` in β-order.
    pub fn slopes(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    /// The points where the slope changes, plus both ends. Equal slopes are
    /// judged to a relative 1e-12.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let slopes = self.slopes();
        let mut out = Vec::with_capacity(self.points.len());
        out.push(self.points[0]);
        for k in 1..slopes.len() {
            let (a, b) = (slopes[k - 1], slopes[k]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                out.push(self.points[k]);
            }
        }
        out.push(self.points[self.points.len() - 1]);
        out
    }

    pub fn is_concave(&self, tol: f64) -> bool {
        self.slopes().windows(2).all(|s| s[1] <= s[0] + tol * s[0].abs().max(1.0))
    }

    /// Same curve with the x-axis divided by `Z`.
    pub fn normalized(&self) -> ThermoCurve {
        let z = self.x_max();
        ThermoCurve {
            points: self.points.iter().map(|&(x, y)| (x / z, y)).collect(),
            beta: self.beta,
            order: self.order.clone(),
        }
    }

    /// Linear interpolation between the bracketing points.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let x_max = self.x_max();
        let slack = 1e-12 * x_max.max(1.0);
        if !(x >= -slack && x <= x_max + slack) {
            return Err(Error::OutOfRange { value: x, min: 0.0, max: x_max });
        }
        let x = x.clamp(0.0, x_max);
        let k = self.points.partition_point(|&(px, _)| px < x);
        if k == 0 {
            return Ok(self.points[0].1);
        }
        if k == self.points.len() {
            return Ok(self.total_mass());
        }
        let (x1, y1) = self.points[k];
        if x1 == x {
            return Ok(y1);
        }
        let (x0, y0) = self.points[k - 1];
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

pub fn curve_value_at(curve: &ThermoCurve, x: f64) -> Result<f64> {
    curve.value_at(x)
}

/// Outcome of a curve comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    /// `min_x (a(x) − b(x))` over the interior breakpoints of both curves,
    /// plus the far end when the total masses differ. Negative beyond the
    /// tolerance means the relation fails.
    pub margin: f64,
    pub tolerance: f64,
}

impl Verdict {
    /// The curves touch within tolerance: the boundary (reversible) case.
    pub fn is_marginal(&self) -> bool {
        self.margin.abs() <= self.tolerance
    }
}

/// Whether curve `a` lies on or above curve `b` everywhere on `[0, Z]`.
///
/// Both curves must share `Z`; for piecewise-linear curves it suffices to
/// check the union of breakpoints.
pub fn thermo_majorizes(a: &ThermoCurve, b: &ThermoCurve, tol: f64) -> Result<Verdict> {
    let (za, zb) = (a.x_max(), b.x_max());
    if (za - zb).abs() > 1e-9 * za.max(zb).max(1.0) {
        return Err(Error::SystemMismatch(alloc::format!(
            "curves end at different partition functions {za} and {zb}"
        )));
    }
    let end = za.min(zb);
    // every pair of curves meets at the origin, and at the far end too when
    // the masses agree; those points say nothing about slack
    let mut margin = f64::INFINITY;
    for &(x, _) in a.points.iter().chain(&b.points) {
        if x > 0.0 && x < end {
            margin = margin.min(a.value_at(x)? - b.value_at(x)?);
        }
    }
    let at_end = a.value_at(end)? - b.value_at(end)?;
    if margin == f64::INFINITY || at_end.abs() > 1e-12 * a.total_mass().max(b.total_mass()) {
        margin = margin.min(at_end);
    }
    Ok(Verdict { holds: margin >= -tol, margin, tolerance: tol })
}

/// Thermo-majorization test for `p → q` on a shared system.
pub fn feasible_transition(p: &ClassicalState, q: &ClassicalState, beta: f64) -> Result<Verdict> {
    feasible_transition_with_tolerance(p, q, beta, DEFAULT_TOLERANCE)
}

pub fn feasible_transition_with_tolerance(
    p: &ClassicalState,
    q: &ClassicalState,
    beta: f64,
    tol: f64,
) -> Result<Verdict> {
    if p.system() != q.system() {
        return Err(Error::SystemMismatch("initial and final states live on different systems".into()));
    }
    thermo_majorizes(&build_curve(p, beta)?, &build_curve(q, beta)?, tol)
}

/// Ordinary majorization: sorted-descending prefix sums of `p` dominate those of `q`.
pub fn standard_majorizes(p: &[f64], q: &[f64]) -> Result<bool> {
    standard_majorizes_with_tolerance(p, q, DEFAULT_TOLERANCE)
}

pub fn standard_majorizes_with_tolerance(p: &[f64], q: &[f64], tol: f64) -> Result<bool> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (ps, qs) = (sorted(p), sorted(q));
    let (mut sp, mut sq) = (0.0, 0.0);
    for (a, b) in ps.iter().zip(&qs) {
        sp += a;
        sq += b;
        if sp < sq - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::HamiltonianSpec;
    use alloc::vec;

    fn two_level() -> HamiltonianSpec {
        HamiltonianSpec::nondegenerate(&[0.0, 1.0]).unwrap()
    }

    #[test]
    fn gibbs_order_is_canonical() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.3, 0.3, 1.1, 2.0]).unwrap();
        let tau = ClassicalState::gibbs(&h, 1.7).unwrap();
        assert_eq!(beta_order(&tau, 1.7).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn zero_beta_is_descending_probability() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 1.0, 2.0]).unwrap();
        let p = ClassicalState::new(h, vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(beta_order(&p, 0.0).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn gibbs_curve_is_one_segment() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.4, 1.0, 2.5]).unwrap();
        let c = build_curve(&ClassicalState::gibbs(&h, 1.3).unwrap(), 1.3).unwrap();
        assert_eq!(c.points().len(), 5);
        let b = c.breakpoints();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0], (0.0, 0.0));
        assert!((b[1].0 - h.partition_function(1.3).unwrap()).abs() < 1e-12);
        assert!((b[1].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_keep_corners() {
        let p = ClassicalState::new(two_level(), vec![1.0, 0.0]).unwrap();
        let c = build_curve(&p, 1.0).unwrap();
        assert_eq!(c.breakpoints(), c.points().to_vec());
    }

    #[test]
    fn order_by_weight() {
        let p = ClassicalState::new(two_level(), vec![0.2, 0.8]).unwrap();
        assert_eq!(beta_order(&p, 1.0).unwrap(), vec![1, 0]);
    }

    #[test]
    fn unpopulated_microstates_sort_last() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 1.0, 2.0]).unwrap();
        let p = ClassicalState::new(h, vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(beta_order(&p, 1.0).unwrap(), vec![2, 1, 0]);
        let c = build_curve(&p, 1.0).unwrap();
        let last = c.points()[3];
        assert_eq!(last.1, c.points()[2].1);
    }

    #[test]
    fn gibbs_curve_is_straight() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.5, 1.5]).unwrap();
        let beta = 1.2;
        let z = h.partition_function(beta).unwrap();
        let c = build_curve(&ClassicalState::gibbs(&h, beta).unwrap(), beta).unwrap();
        for &(x, y) in c.points() {
            assert!((y - x / z).abs() < 1e-15);
        }
        assert!((c.x_max() - z).abs() < 1e-15);
        for &(x, y) in c.normalized().points() {
            assert!((y - x).abs() < 1e-15);
        }
    }

    #[test]
    fn ground_state_curve_points() {
        let c = build_curve(&ClassicalState::pure(&two_level(), 0).unwrap(), 1.0).unwrap();
        let e = libm::exp(-1.0);
        assert_eq!(c.points(), &[(0.0, 0.0), (1.0, 1.0), (1.0 + e, 1.0)]);
    }

    #[test]
    fn value_at_interpolates() {
        let c = build_curve(&ClassicalState::pure(&two_level(), 0).unwrap(), 1.0).unwrap();
        assert_eq!(c.value_at(0.0).unwrap(), 0.0);
        assert_eq!(c.value_at(0.5).unwrap(), 0.5);
        assert_eq!(c.value_at(c.x_max()).unwrap(), 1.0);
        assert!(c.value_at(-0.1).is_err());
        assert!(c.value_at(c.x_max() + 0.1).is_err());
    }

    #[test]
    fn everything_reaches_gibbs() {
        let h = HamiltonianSpec::nondegenerate(&[0.0, 0.4, 2.0]).unwrap();
        let tau = ClassicalState::gibbs(&h, 0.9).unwrap();
        for probs in [vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.2, 0.3, 0.5]] {
            let p = ClassicalState::new(h.clone(), probs).unwrap();
            assert!(feasible_transition(&p, &tau, 0.9).unwrap().holds);
            assert!(feasible_transition(&p, &p, 0.9).unwrap().holds);
            let back = feasible_transition(&tau, &p, 0.9).unwrap();
            assert!(!back.holds);
        }
    }

    #[test]
    fn crossing_curves_are_incomparable() {
        // On E = (0, 1), p = (0.9, 0.1) orders ground first; q = (0.55, 0.45)
        // orders the excited level first once 0.45 e^β > 0.55.
        let beta = 1.0;
        let p = ClassicalState::new(two_level(), vec![0.9, 0.1]).unwrap();
        let q = ClassicalState::new(two_level(), vec![0.55, 0.45]).unwrap();
        assert_eq!(beta_order(&p, beta).unwrap(), vec![0, 1]);
        assert_eq!(beta_order(&q, beta).unwrap(), vec![1, 0]);
        // p's curve: (1, 0.9); q's curve: (e^{-1}, 0.45). At x = e^{-1} p sits at
        // 0.9 e^{-1} ≈ 0.331 < 0.45, while at x = 1 q sits at
        // 0.45 + 0.55 (1 − e^{-1}) / 1 ≈ 0.798 < 0.9.
        let cp = build_curve(&p, beta).unwrap();
        let cq = build_curve(&q, beta).unwrap();
        let e = libm::exp(-1.0);
        assert!(cp.value_at(e).unwrap() < cq.value_at(e).unwrap());
        assert!(cp.value_at(1.0).unwrap() > cq.value_at(1.0).unwrap());
        assert!(!feasible_transition(&p, &q, beta).unwrap().holds);
        assert!(!feasible_transition(&q, &p, beta).unwrap().holds);
    }

    #[test]
    fn mismatched_systems_rejected() {
        let p = ClassicalState::pure(&two_level(), 0).unwrap();
        let other = HamiltonianSpec::nondegenerate(&[0.0, 2.0]).unwrap();
        let q = ClassicalState::pure(&other, 0).unwrap();
        assert!(matches!(feasible_transition(&p, &q, 1.0), Err(Error::SystemMismatch(_))));
    }

    #[test]
    fn standard_majorization_examples() {
        assert!(standard_majorizes(&[1.0, 0.0], &[0.5, 0.5]).unwrap());
        assert!(!standard_majorizes(&[0.5, 0.5], &[1.0, 0.0]).unwrap());
        assert!(standard_majorizes(&[0.2, 0.5, 0.3], &[0.3, 0.2, 0.5]).unwrap());
        assert!(standard_majorizes(&[0.1], &[0.1, 0.2]).is_err());
    }
}
