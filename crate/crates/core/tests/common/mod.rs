#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thermoforge_core::gibbs_map::{quasi_cycle, GibbsMap};
use thermoforge_core::{ClassicalState, HamiltonianSpec, Level};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Flat Dirichlet sample.
pub fn simplex(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn energies(rng: &mut ChaCha8Rng, d: usize, max: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(0.0..max)).collect()
}

pub fn nondegenerate(rng: &mut ChaCha8Rng, d: usize, max: f64) -> HamiltonianSpec {
    HamiltonianSpec::nondegenerate(&energies(rng, d, max)).unwrap()
}

pub fn integer_system(rng: &mut ChaCha8Rng, d: usize, max: i64) -> HamiltonianSpec {
    let e: Vec<f64> = (0..d).map(|_| rng.gen_range(0..=max) as f64).collect();
    HamiltonianSpec::nondegenerate(&e).unwrap()
}

pub fn degenerate(rng: &mut ChaCha8Rng, levels: usize, max_g: u32, max: f64) -> HamiltonianSpec {
    let l = (0..levels).map(|_| Level::new(rng.gen_range(0.0..max), rng.gen_range(1..=max_g))).collect();
    HamiltonianSpec::new(l).unwrap()
}

pub fn state(rng: &mut ChaCha8Rng, h: &HamiltonianSpec) -> ClassicalState {
    ClassicalState::new(h.clone(), simplex(rng, h.dimension())).unwrap()
}

/// Random convex mixture of identity, full thermalization and quasi-cycles
/// along random orders. Needs one microstate per level.
pub fn gibbs_map(rng: &mut ChaCha8Rng, h: &HamiltonianSpec, beta: f64) -> GibbsMap {
    let tau = ClassicalState::gibbs(h, beta).unwrap();
    let d = h.dimension();
    let mut map = GibbsMap::identity(&tau);
    let mut seen = 1.0;
    let parts = rng.gen_range(1..=4);
    for _ in 0..parts {
        let next = if rng.gen_bool(0.2) {
            GibbsMap::thermalize(&tau)
        } else {
            let mut order: Vec<usize> = (0..d).collect();
            order.shuffle(rng);
            let len = rng.gen_range(2..=d.max(2)).min(d);
            let sub = &order[..len];
            // a cycle on a subset of levels: identity elsewhere
            cycle_on_subset(h, beta, sub)
        };
        seen += 1.0;
        map = next.mix(&map, 1.0 / seen).unwrap();
        if rng.gen_bool(0.3) {
            let other = cycle_on_subset(h, beta, &(0..d).collect::<Vec<_>>());
            map = other.compose(&map).unwrap();
        }
    }
    map
}

fn cycle_on_subset(h: &HamiltonianSpec, beta: f64, sub: &[usize]) -> GibbsMap {
    let tau = ClassicalState::gibbs(h, beta).unwrap();
    let d = h.dimension();
    if sub.len() < 2 {
        return GibbsMap::identity(&tau);
    }
    let energies = h.microstate_energies();
    let sub_h = HamiltonianSpec::nondegenerate(&sub.iter().map(|&i| energies[i]).collect::<Vec<_>>()).unwrap();
    // sub_h sorts its levels; recover where each of `sub` landed
    let mut idx: Vec<usize> = (0..sub.len()).collect();
    idx.sort_by(|&a, &b| energies[sub[a]].total_cmp(&energies[sub[b]]));
    let mut slot = vec![0; sub.len()];
    for (pos, &k) in idx.iter().enumerate() {
        slot[k] = pos;
    }
    let order: Vec<usize> = (0..sub.len()).map(|k| slot[k]).collect();
    let small = quasi_cycle(&sub_h, beta, &order).unwrap();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    for (a, &i) in sub.iter().enumerate() {
        m[i * d + i] = 0.0;
        for (b, &j) in sub.iter().enumerate() {
            m[j * d + i] = small.transition(slot[a], slot[b]);
        }
    }
    GibbsMap::new(m, tau, 1e-12).unwrap()
}
