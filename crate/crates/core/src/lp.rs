//! Dense two-phase simplex for equality-constrained linear programs
//! `A x = b, x ≥ 0`, generic over the scalar field.
//!
//! [`BigRational`] gives an exact solver (no tolerance enters the verdict);
//! `f64` is the floating fallback for larger problems. Pivoting follows
//! Bland's rule, so the method terminates on degenerate problems.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Arithmetic the simplex needs from its scalar type.
pub trait LpScalar: Clone + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    /// Exact conversion for rationals; identity for floats.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn less_than(&self, other: &Self) -> bool;
}

/// Magnitudes at or below this are treated as zero by the floating solver.
pub const FLOAT_ZERO: f64 = 1e-11;

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_zero(&self) -> bool {
        self.abs() <= FLOAT_ZERO
    }
    fn is_positive(&self) -> bool {
        *self > FLOAT_ZERO
    }
    fn is_negative(&self) -> bool {
        *self < -FLOAT_ZERO
    }
    fn less_than(&self, other: &Self) -> bool {
        self < other
    }
}

impl LpScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }
    fn from_f64(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn less_than(&self, other: &Self) -> bool {
        self < other
    }
}

/// `minimize c·x` subject to `A x = b`, `x ≥ 0`. Without an objective only
/// feasibility is decided.
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    n_vars: usize,
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    objective: Option<Vec<S>>,
}

impl<S: LpScalar> LinearProgram<S> {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram { n_vars, rows: Vec::new(), rhs: Vec::new(), objective: None }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Adds `Σ coeff·x_var = rhs`; repeated variables accumulate.
    pub fn add_equality(&mut self, terms: &[(usize, S)], rhs: S) {
        let mut row = alloc::vec![S::zero(); self.n_vars];
        for (var, coeff) in terms {
            row[*var] = row[*var].add(coeff);
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn set_objective(&mut self, costs: Vec<S>) {
        assert_eq!(costs.len(), self.n_vars);
        self.objective = Some(costs);
    }

    pub fn clear_objective(&mut self) {
        self.objective = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    /// Feasible; optimal if an objective was given.
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    /// A basic feasible point (zeros if infeasible).
    pub x: Vec<S>,
    pub objective: Option<S>,
    /// Sum of artificial variables at the end of phase one; zero iff feasible.
    pub phase_one_residual: S,
    pub pivots: usize,
}

const MAX_PIVOTS: usize = 100_000;

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    /// reduced costs, last entry is minus the objective value
    cost: Vec<S>,
    basis: Vec<usize>,
    width: usize,
    pivots: usize,
}

impl<S: LpScalar> Tableau<S> {
    fn rhs(&self, r: usize) -> &S {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.div(&p);
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<S>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.sub(&f.mul(pv));
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> Option<bool> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return None;
            }
            let Some(c) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
                return Some(true);
            };
            let mut leave: Option<(usize, S)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r).div(a);
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio.less_than(best)
                            || (!best.less_than(&ratio) && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Some(false),
            }
        }
    }
}

/// Two-phase simplex.
pub fn solve<S: LpScalar>(lp: &LinearProgram<S>) -> LpSolution<S> {
    let n = lp.n_vars;
    let m = lp.rows.len();
    let width = n + m;

    let mut rows = Vec::with_capacity(m);
    for (row, b) in lp.rows.iter().zip(&lp.rhs) {
        let flip = b.is_negative();
        let mut t: Vec<S> = Vec::with_capacity(width + 1);
        let neg = |v: &S| S::zero().sub(v);
        t.extend(row.iter().map(|v| if flip { neg(v) } else { v.clone() }));
        t.extend((0..m).map(|_| S::zero()));
        t.push(if flip { neg(b) } else { b.clone() });
        rows.push(t);
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row[n + i] = S::one();
    }

    // phase one: minimize the sum of artificials
    let mut cost = alloc::vec![S::zero(); width + 1];
    for row in &rows {
        for j in 0..n {
            cost[j] = cost[j].sub(&row[j]);
        }
        cost[width] = cost[width].sub(&row[width]);
    }
    let mut t = Tableau { rows, cost, basis: (n..n + m).collect(), width, pivots: 0 };
    let finished = t.optimize(width);
    let residual = S::zero().sub(&t.cost[width]);

    let infeasible = |t: &Tableau<S>, residual: S| LpSolution {
        status: LpStatus::Infeasible,
        x: alloc::vec![S::zero(); n],
        objective: None,
        phase_one_residual: residual,
        pivots: t.pivots,
    };
    if finished.is_none() || residual.is_positive() {
        return infeasible(&t, residual);
    }

    // drive remaining artificials out of the basis where possible
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, c);
            }
        }
    }

    let mut objective = None;
    if let Some(c) = &lp.objective {
        let mut cost = alloc::vec![S::zero(); width + 1];
        cost[..n].clone_from_slice(c);
        for r in 0..m {
            let cb = if t.basis[r] < n { c[t.basis[r]].clone() } else { S::zero() };
            if cb.is_zero() {
                continue;
            }
            for (j, v) in cost.iter_mut().enumerate() {
                if j < n || j == width {
                    *v = v.sub(&cb.mul(&t.rows[r][j]));
                }
            }
        }
        t.cost = cost;
        match t.optimize(n) {
            Some(true) => objective = Some(S::zero().sub(&t.cost[width])),
            Some(false) => {
                return LpSolution {
                    status: LpStatus::Unbounded,
                    x: extract(&t, n),
                    objective: None,
                    phase_one_residual: residual,
                    pivots: t.pivots,
                }
            }
            None => return infeasible(&t, residual),
        }
    }

    LpSolution { status: LpStatus::Optimal, x: extract(&t, n), objective, phase_one_residual: residual, pivots: t.pivots }
}

fn extract<S: LpScalar>(t: &Tableau<S>, n: usize) -> Vec<S> {
    let mut x = alloc::vec![S::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).clone();
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn feasible_system_exact() {
        // x + y = 1, x − y = 1/2
        let mut lp = LinearProgram::<BigRational>::new(2);
        lp.add_equality(&[(0, rat(1, 1)), (1, rat(1, 1))], rat(1, 1));
        lp.add_equality(&[(0, rat(1, 1)), (1, rat(-1, 1))], rat(1, 2));
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.x, vec![rat(3, 4), rat(1, 4)]);
        assert!(Zero::is_zero(&sol.phase_one_residual));
    }

    #[test]
    fn infeasible_system() {
        // x + y = 1, x + y = 2
        let mut lp = LinearProgram::<f64>::new(2);
        lp.add_equality(&[(0, 1.0), (1, 1.0)], 1.0);
        lp.add_equality(&[(0, 1.0), (1, 1.0)], 2.0);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!((sol.phase_one_residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_needs_nonnegative_solution() {
        // x − y = −1 ⇒ y = x + 1
        let mut lp = LinearProgram::<f64>::new(2);
        lp.add_equality(&[(0, 1.0), (1, -1.0)], -1.0);
        lp.set_objective(vec![0.0, 1.0]);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.x, vec![0.0, 1.0]);
        assert_eq!(sol.objective, Some(1.0));
    }

    #[test]
    fn optimization_and_unboundedness() {
        // min −x subject to x + s = 4
        let mut lp = LinearProgram::<BigRational>::new(2);
        lp.add_equality(&[(0, rat(1, 1)), (1, rat(1, 1))], rat(4, 1));
        lp.set_objective(vec![rat(-1, 1), rat(0, 1)]);
        let sol = solve(&lp);
        assert_eq!(sol.objective, Some(rat(-4, 1)));

        // min −x subject to x − y = 0: unbounded
        let mut lp = LinearProgram::<f64>::new(2);
        lp.add_equality(&[(0, 1.0), (1, -1.0)], 0.0);
        lp.set_objective(vec![-1.0, 0.0]);
        assert_eq!(solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_harmless() {
        let mut lp = LinearProgram::<BigRational>::new(3);
        lp.add_equality(&[(0, rat(1, 1)), (1, rat(1, 1)), (2, rat(1, 1))], rat(1, 1));
        lp.add_equality(&[(0, rat(2, 1)), (1, rat(2, 1)), (2, rat(2, 1))], rat(2, 1));
        lp.set_objective(vec![rat(1, 1), rat(2, 1), rat(0, 1)]);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective, Some(rat(0, 1)));
    }
}
