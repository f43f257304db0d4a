//! 0/1 knapsack over microstates: drop a set whose probability mass fits in
//! the smoothing budget while removing as much reference weight as possible.

use alloc::vec::Vec;

/// Exact search is used up to this many distinct items.
pub(crate) const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Selection {
    /// Indices into the input item list, ascending.
    pub chosen: Vec<usize>,
    pub value: f64,
    pub exact: bool,
}

/// Maximizes `Σ value` over subsets with `Σ cost ≤ capacity`.
///
/// Items with near-identical `(cost, value)` are merged into classes first; the
/// search is exact when at most [`EXACT_LIMIT`] classes remain, otherwise a
/// greedy pass by descending `value/cost` gives a feasible lower bound.
/// Costs must be positive.
pub(crate) fn max_value(costs: &[f64], values: &[f64], capacity: f64) -> Selection {
    debug_assert_eq!(costs.len(), values.len());
    let classes = group(costs, values);
    if classes.len() <= EXACT_LIMIT {
        let counts = branch_and_bound(&classes, capacity);
        let mut chosen = Vec::new();
        let mut value = 0.0;
        for (class, &count) in classes.iter().zip(&counts) {
            chosen.extend_from_slice(&class.members[..count]);
            value += count as f64 * class.value;
        }
        chosen.sort_unstable();
        Selection { chosen, value, exact: true }
    } else {
        greedy(costs, values, capacity)
    }
}

fn greedy(costs: &[f64], values: &[f64], capacity: f64) -> Selection {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| (values[b] / costs[b]).total_cmp(&(values[a] / costs[a])).then(a.cmp(&b)));
    let mut used = 0.0;
    let mut value = 0.0;
    let mut chosen = Vec::new();
    for i in order {
        if used + costs[i] <= capacity {
            used += costs[i];
            value += values[i];
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    Selection { chosen, value, exact: false }
}

struct Class {
    cost: f64,
    value: f64,
    members: Vec<usize>,
}

/// Relative gap under which two costs (or two values) count as equal.
/// Products of the same factors taken in different orders differ in the
/// last bits; without this, tensor powers would never stay under
/// [`EXACT_LIMIT`] classes.
const CLASS_TIE: f64 = 1e-12;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= CLASS_TIE * a.abs().max(b.abs())
}

/// Clusters near-equal items. A class carries the largest member cost and the
/// smallest member value, so any selection it admits stays within capacity.
fn group(costs: &[f64], values: &[f64]) -> Vec<Class> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    let mut classes: Vec<Class> = Vec::new();
    let mut run_start = 0;
    while run_start < order.len() {
        let anchor = costs[order[run_start]];
        let mut run_end = run_start + 1;
        while run_end < order.len() && near(costs[order[run_end]], anchor) {
            run_end += 1;
        }
        let run = &mut order[run_start..run_end];
        run.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut first_value = f64::NAN;
        for &i in run.iter() {
            match classes.last_mut() {
                Some(c) if near(values[i], first_value) => {
                    c.cost = c.cost.max(costs[i]);
                    c.members.push(i);
                }
                _ => {
                    first_value = values[i];
                    classes.push(Class { cost: costs[i], value: values[i], members: alloc::vec![i] });
                }
            }
        }
        run_start = run_end;
    }
    // best ratio first makes the fractional bound tight
    classes.sort_by(|a, b| (b.value / b.cost).total_cmp(&(a.value / a.cost)));
    classes
}

fn branch_and_bound(classes: &[Class], capacity: f64) -> Vec<usize> {
    struct Search<'a> {
        classes: &'a [Class],
        counts: Vec<usize>,
        best_counts: Vec<usize>,
        best_value: f64,
    }

    impl Search<'_> {
        /// Fractional relaxation from class `k` on.
        fn bound(&self, k: usize, mut room: f64) -> f64 {
            let mut total = 0.0;
            for class in &self.classes[k..] {
                let whole = class.members.len() as f64;
                if whole * class.cost <= room {
                    room -= whole * class.cost;
                    total += whole * class.value;
                } else {
                    total += room / class.cost * class.value;
                    break;
                }
            }
            total
        }

        fn visit(&mut self, k: usize, room: f64, value: f64) {
            if value > self.best_value {
                self.best_value = value;
                self.best_counts.clone_from(&self.counts);
            }
            if k == self.classes.len() || value + self.bound(k, room) <= self.best_value {
                return;
            }
            let class = &self.classes[k];
            let fit = ((room / class.cost) as usize).min(class.members.len());
            // guard against the float division overshooting the room
            let fit = (0..=fit).rev().find(|&c| c as f64 * class.cost <= room).unwrap_or(0);
            for count in (0..=fit).rev() {
                self.counts[k] = count;
                let used = count as f64 * class.cost;
                self.visit(k + 1, room - used, value + count as f64 * class.value);
            }
            self.counts[k] = 0;
        }
    }

    let mut search = Search {
        classes,
        counts: alloc::vec![0; classes.len()],
        best_counts: alloc::vec![0; classes.len()],
        best_value: 0.0,
    };
    if capacity >= 0.0 {
        search.visit(0, capacity, 0.0);
    }
    search.best_counts
}

/// Largest number of items whose costs fit in `capacity` (cheapest first),
/// returned as the chosen indices.
pub(crate) fn max_count(costs: &[f64], capacity: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    let mut used = 0.0;
    let mut chosen = Vec::new();
    for i in order {
        if used + costs[i] > capacity {
            break;
        }
        used += costs[i];
        chosen.push(i);
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(costs: &[f64], values: &[f64], capacity: f64) -> f64 {
        let n = costs.len();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << n) {
            let (mut c, mut v) = (0.0, 0.0);
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    c += costs[i];
                    v += values[i];
                }
            }
            if c <= capacity {
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=12);
            let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.001..0.3)).collect();
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.001..0.3)).collect();
            let cap = rng.gen_range(0.0..0.6);
            let sel = max_value(&costs, &values, cap);
            assert!(sel.exact);
            let used: f64 = sel.chosen.iter().map(|&i| costs[i]).sum();
            assert!(used <= cap);
            let v: f64 = sel.chosen.iter().map(|&i| values[i]).sum();
            assert!((v - sel.value).abs() < 1e-15);
            let expect = brute_force(&costs, &values, cap);
            assert!((sel.value - expect).abs() <= 1e-15, "{} vs {}", sel.value, expect);
        }
    }

    #[test]
    fn merged_classes_stay_exact() {
        let costs = [0.1; 40];
        let values = [0.2; 40];
        let sel = max_value(&costs, &values, 0.35);
        assert!(sel.exact);
        assert_eq!(sel.chosen.len(), 3);
    }

    #[test]
    fn greedy_above_limit_is_feasible() {
        let costs: Vec<f64> = (0..30).map(|i| 0.01 + i as f64 * 1e-3).collect();
        let values: Vec<f64> = (0..30).map(|i| 0.05 - i as f64 * 1e-3).collect();
        let sel = max_value(&costs, &values, 0.1);
        assert!(!sel.exact);
        assert!(sel.chosen.iter().map(|&i| costs[i]).sum::<f64>() <= 0.1);
    }

    #[test]
    fn max_count_takes_cheapest() {
        assert_eq!(max_count(&[0.3, 0.05, 0.1, 0.02], 0.2), vec![1, 2, 3]);
        assert!(max_count(&[0.3], 0.0).is_empty());
    }
}
