//! An explicit finite heat bath with integer energies.
//!
//! The canonical toy bath has `g(E) = 2^E` and inverse temperature `ln 2`,
//! which makes `g(E − E_S) = g(E) e^{−βE_S}` hold exactly. Restricted to a
//! fixed total energy, the bath and system together are then an explicit
//! finite object whose spectrum can be compared by ordinary majorization,
//! independently of the curve machinery in [`crate::curve`].

use alloc::format;
use alloc::vec::Vec;

use crate::curve::Verdict;
use crate::{ClassicalState, Error, HamiltonianSpec, Result, DEFAULT_TOLERANCE};

/// Largest bath energy [`build_toy_bath`] accepts.
pub const MAX_TOY_ENERGY: i64 = 30;

/// Guard on the number of bath-times-system microstates of a product state.
pub const MAX_PRODUCT_MICROSTATES: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    /// `(E_R, g_R)`, energies strictly increasing.
    levels: Vec<(i64, u64)>,
    beta_target: f64,
    growth: f64,
}

impl BathSpec {
    pub fn new(mut levels: Vec<(i64, u64)>, beta_target: f64, growth: f64) -> Result<Self> {
        crate::model::check_positive_beta(beta_target)?;
        if levels.is_empty() {
            return Err(Error::InvalidHamiltonian("bath needs at least one level".into()));
        }
        levels.sort_by_key(|l| l.0);
        if levels.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidHamiltonian("bath energies must be distinct".into()));
        }
        if levels.iter().any(|l| l.1 == 0) {
            return Err(Error::InvalidHamiltonian("bath degeneracies must be positive".into()));
        }
        Ok(BathSpec { levels, beta_target, growth })
    }

    pub fn levels(&self) -> &[(i64, u64)] {
        &self.levels
    }

    pub fn beta(&self) -> f64 {
        self.beta_target
    }

    /// Declared growth rate `c` of `g(E) ≈ e^{cE}`.
    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn min_energy(&self) -> i64 {
        self.levels[0].0
    }

    pub fn max_energy(&self) -> i64 {
        self.levels[self.levels.len() - 1].0
    }

    pub fn degeneracy(&self, energy: i64) -> Option<u64> {
        self.levels.binary_search_by_key(&energy, |l| l.0).ok().map(|k| self.levels[k].1)
    }

    /// Inverse temperature implied by the degeneracies,
    /// `ln(g(E_max)/g(E_min)) / (E_max − E_min)`.
    pub fn effective_beta(&self) -> f64 {
        let (lo, hi) = (self.levels[0], self.levels[self.levels.len() - 1]);
        if hi.0 == lo.0 {
            return 0.0;
        }
        libm::log(hi.1 as f64 / lo.1 as f64) / (hi.0 - lo.0) as f64
    }

    /// Total microstate count.
    pub fn dimension(&self) -> u128 {
        self.levels.iter().map(|l| l.1 as u128).sum()
    }

    /// Same bath with one degeneracy replaced.
    pub fn with_degeneracy(&self, energy: i64, degeneracy: u64) -> Result<Self> {
        let mut levels = self.levels.clone();
        match levels.iter_mut().find(|l| l.0 == energy) {
            Some(l) => l.1 = degeneracy,
            None => return Err(Error::InvalidHamiltonian(format!("bath has no level at energy {energy}"))),
        }
        Self::new(levels, self.beta_target, self.growth)
    }

    /// Probability of each bath level in the bath's Gibbs state.
    fn level_weights(&self) -> Vec<f64> {
        let e0 = self.min_energy();
        let w: Vec<f64> = self
            .levels
            .iter()
            .map(|&(e, g)| g as f64 * libm::exp(-self.beta_target * (e - e0) as f64))
            .collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }

    /// Total energies `E` for which every `E − E_S` is a bath energy range
    /// value, given the extreme system energies.
    fn window_for(&self, system_min: i64, system_max: i64) -> (i64, i64) {
        (self.min_energy() + system_max, self.max_energy() + system_min)
    }
}

/// Levels `0..=E_max` with `g(E) = round(e^{cE})` and target `β = c`.
pub fn build_toy_bath(growth: f64, max_energy: i64) -> Result<BathSpec> {
    if !(growth > 0.0 && growth.is_finite()) {
        return Err(Error::InvalidBeta(growth));
    }
    if !(0..=MAX_TOY_ENERGY).contains(&max_energy) {
        return Err(Error::OutOfRange { value: max_energy as f64, min: 0.0, max: MAX_TOY_ENERGY as f64 });
    }
    let mut levels = Vec::with_capacity(max_energy as usize + 1);
    for e in 0..=max_energy {
        let g = libm::round(libm::exp(growth * e as f64));
        if g >= (1u64 << 53) as f64 {
            return Err(Error::ResourceLimit { required: g as u128, cap: 1 << 53 });
        }
        levels.push((e, (g as u64).max(1)));
    }
    BathSpec::new(levels, growth, growth)
}

/// The exact-power bath: `g(E) = 2^E`, `β = ln 2`.
pub fn power_of_two_bath(max_energy: i64) -> Result<BathSpec> {
    build_toy_bath(core::f64::consts::LN_2, max_energy)
}

/// Energies of a system's microstates as integers.
pub fn integer_energies(system: &HamiltonianSpec) -> Result<Vec<i64>> {
    system
        .microstate_energies()
        .into_iter()
        .map(|e| {
            let r = libm::round(e);
            if (e - r).abs() > 1e-9 || r.abs() > 1e15 {
                Err(Error::InvalidHamiltonian(format!("energy {e} is not an integer")))
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

fn energy_range(energies: &[i64]) -> (i64, i64) {
    energies.iter().fold((i64::MAX, i64::MIN), |(lo, hi), &e| (lo.min(e), hi.max(e)))
}

/// Per-assumption outcome of [`check_bath_assumptions`].
#[derive(Debug, Clone, PartialEq)]
pub struct BathReport {
    /// Range of total energies where every system energy can be matched.
    pub window: (i64, i64),
    /// Mean bath energy in its Gibbs state.
    pub mean_energy: f64,
    /// (i) the window is non-empty and contains the mean bath energy.
    pub peaked: bool,
    /// (ii) `g(E) ≥ round(e^{cE})` across the window.
    pub exponential_growth: bool,
    /// (iii) `E − E_S` is a bath level for every window energy and system energy.
    pub energy_matching: bool,
    /// (iv) `max |g(E) e^{−βE_S} / g(E − E_S) − 1|` over the window.
    pub residual: f64,
    /// Where the worst residual occurs, as `(E, E_S)`.
    pub worst: Option<(i64, i64)>,
    pub delta: f64,
    pub effective_beta: f64,
}

impl BathReport {
    pub fn residual_ok(&self) -> bool {
        self.residual <= self.delta
    }

    pub fn all_pass(&self) -> bool {
        self.peaked && self.exponential_growth && self.energy_matching && self.residual_ok()
    }
}

/// Checks the bath against a system with the given integer microstate energies.
pub fn check_bath_assumptions(bath: &BathSpec, system_energies: &[i64], delta: f64) -> Result<BathReport> {
    if system_energies.is_empty() {
        return Err(Error::InvalidHamiltonian("system has no energies".into()));
    }
    let (s_min, s_max) = energy_range(system_energies);
    let window = bath.window_for(s_min, s_max);
    let beta = bath.beta_target;
    let weights = bath.level_weights();
    let mean_energy: f64 = bath.levels.iter().zip(&weights).map(|(l, w)| l.0 as f64 * w).sum();
    let peaked = window.0 <= window.1 && (window.0 as f64) <= mean_energy && mean_energy <= window.1 as f64;

    let mut exponential_growth = true;
    let mut energy_matching = window.0 <= window.1;
    let mut residual: f64 = 0.0;
    let mut worst = None;
    for e in window.0..=window.1 {
        let Some(g) = bath.degeneracy(e) else {
            energy_matching = false;
            continue;
        };
        if (g as f64) < libm::round(libm::exp(bath.growth * e as f64)) {
            exponential_growth = false;
        }
        for &es in system_energies {
            match bath.degeneracy(e - es) {
                Some(gr) => {
                    let r = (g as f64 * libm::exp(-beta * es as f64) / gr as f64 - 1.0).abs();
                    if r > residual || worst.is_none() {
                        residual = residual.max(r);
                        worst = Some((e, es));
                    }
                }
                None => energy_matching = false,
            }
        }
    }
    Ok(BathReport {
        window,
        mean_energy,
        peaked,
        exponential_growth,
        energy_matching,
        residual,
        worst,
        delta,
        effective_beta: bath.effective_beta(),
    })
}

/// Bath plus a Gibbs-distributed copy of `system`, viewed as one larger
/// bath: `g′(E) = Σ_{E_S} g(E − E_S) g_S(E_S)`, kept only where the sum
/// runs over every system level.
pub fn with_gibbs_system(bath: &BathSpec, system: &HamiltonianSpec) -> Result<BathSpec> {
    let energies = integer_energies(system)?;
    let (s_min, s_max) = energy_range(&energies);
    let mut levels = Vec::new();
    for e in bath.min_energy() + s_max..=bath.max_energy() + s_min {
        let mut g: u64 = 0;
        for &es in &energies {
            let part = bath.degeneracy(e - es).ok_or(Error::WindowViolation {
                total_energy: e,
                min: bath.min_energy() + s_max,
                max: bath.max_energy() + s_min,
            })?;
            g = g.checked_add(part).ok_or(Error::ResourceLimit { required: u128::MAX, cap: u64::MAX as u128 })?;
        }
        levels.push((e, g));
    }
    if levels.is_empty() {
        return Err(Error::Construction("system is too wide for the bath".into()));
    }
    BathSpec::new(levels, bath.beta_target, bath.growth)
}

/// One group of equal eigenvalues inside a fixed-total-energy block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumGroup {
    /// System microstate the group comes from.
    pub microstate: usize,
    pub system_energy: i64,
    pub value: f64,
    pub multiplicity: u64,
}

/// Normalized spectrum of bath Gibbs state ⊗ system state restricted to
/// total energy `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBlockSpectrum {
    pub total_energy: i64,
    pub groups: Vec<SpectrumGroup>,
    /// Probability of the block before normalization.
    pub block_mass: f64,
}

impl EnergyBlockSpectrum {
    pub fn total_multiplicity(&self) -> u128 {
        self.groups.iter().map(|g| g.multiplicity as u128).sum()
    }

    /// `Σ multiplicity · value`.
    pub fn total(&self) -> f64 {
        self.groups.iter().map(|g| g.multiplicity as f64 * g.value).sum()
    }
}

fn checked_window(bath: &BathSpec, energies: &[i64], total_energy: i64) -> Result<()> {
    let (s_min, s_max) = energy_range(energies);
    let (min, max) = bath.window_for(s_min, s_max);
    if total_energy < min || total_energy > max {
        return Err(Error::WindowViolation { total_energy, min, max });
    }
    Ok(())
}

/// Each system microstate `s` contributes `g(E − E_s)` equal eigenvalues
/// proportional to `e^{βE_s} p_s`.
pub fn block_spectrum(bath: &BathSpec, p: &ClassicalState, total_energy: i64) -> Result<EnergyBlockSpectrum> {
    let energies = integer_energies(p.system())?;
    checked_window(bath, &energies, total_energy)?;
    let weights = bath.level_weights();
    let level_index = |e: i64| bath.levels.binary_search_by_key(&e, |l| l.0).ok();

    let mut groups = Vec::with_capacity(energies.len());
    let mut block_mass = 0.0;
    for (s, (&es, &ps)) in energies.iter().zip(p.probs()).enumerate() {
        let k = level_index(total_energy - es).expect("window checked");
        let g = bath.levels[k].1;
        // per-microstate bath probability times p_s
        let value = weights[k] / g as f64 * ps;
        block_mass += g as f64 * value;
        groups.push(SpectrumGroup { microstate: s, system_energy: es, value, multiplicity: g });
    }
    if block_mass <= 0.0 {
        return Err(Error::InvalidState(format!("state has no weight at total energy {total_energy}")));
    }
    for g in &mut groups {
        g.value /= block_mass;
    }
    Ok(EnergyBlockSpectrum { total_energy, groups, block_mass })
}

/// Outcome of [`verify_oplus_theorem`].
#[derive(Debug, Clone, PartialEq)]
pub struct OplusReport {
    /// Largest trace distance over the window.
    pub max_distance: f64,
    /// `(E, distance)` for every block checked.
    pub blocks: Vec<(i64, f64)>,
    /// Probability that the total energy falls in the window.
    pub window_mass: f64,
}

/// Trace distance between each block of bath ⊗ `p` and the ideal form in
/// which sector `E_S` carries `p_s` spread uniformly over `g(E − E_S)` bath
/// microstates.
pub fn verify_oplus_theorem(bath: &BathSpec, p: &ClassicalState, window: &[i64]) -> Result<OplusReport> {
    let required = bath.dimension() * p.dimension() as u128;
    if required > MAX_PRODUCT_MICROSTATES {
        return Err(Error::ResourceLimit { required, cap: MAX_PRODUCT_MICROSTATES });
    }
    if !p.is_normalized(DEFAULT_TOLERANCE) {
        return Err(Error::InvalidState("block comparison needs a normalized state".into()));
    }
    let mut blocks = Vec::with_capacity(window.len());
    let mut max_distance: f64 = 0.0;
    let mut window_mass = 0.0;
    for &e in window {
        let spectrum = block_spectrum(bath, p, e)?;
        let distance = 0.5
            * spectrum
                .groups
                .iter()
                .map(|g| {
                    let ideal = p.probs()[g.microstate] / g.multiplicity as f64;
                    g.multiplicity as f64 * (g.value - ideal).abs()
                })
                .sum::<f64>();
        max_distance = max_distance.max(distance);
        window_mass += spectrum.block_mass;
        blocks.push((e, distance));
    }
    Ok(OplusReport { max_distance, blocks, window_mass })
}

/// Full window of total energies for a system on this bath.
pub fn energy_window(bath: &BathSpec, system: &HamiltonianSpec) -> Result<Vec<i64>> {
    let energies = integer_energies(system)?;
    let (s_min, s_max) = energy_range(&energies);
    let (lo, hi) = bath.window_for(s_min, s_max);
    Ok((lo..=hi).collect())
}

/// Lorenz curve of a multiset, `(count, mass)` at each group boundary after
/// sorting values in descending order.
fn lorenz(spectrum: &EnergyBlockSpectrum) -> Vec<(f64, f64)> {
    let mut groups = spectrum.groups.clone();
    groups.sort_by(|a, b| b.value.total_cmp(&a.value));
    let mut points = alloc::vec![(0.0, 0.0)];
    let (mut x, mut y) = (0.0, 0.0);
    for g in groups {
        x += g.multiplicity as f64;
        y += g.multiplicity as f64 * g.value;
        points.push((x, y));
    }
    points
}

fn lorenz_at(points: &[(f64, f64)], x: f64) -> f64 {
    let k = points.partition_point(|pt| pt.0 < x);
    if k == 0 {
        return points[0].1;
    }
    if k == points.len() {
        return points[points.len() - 1].1;
    }
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Ordinary majorization between the block spectra of `p` and `q` at total
/// energy `E`, with multiplicities handled without expanding them.
pub fn finite_bath_majorization(
    p: &ClassicalState,
    q: &ClassicalState,
    bath: &BathSpec,
    total_energy: i64,
) -> Result<Verdict> {
    finite_bath_majorization_with_tolerance(p, q, bath, total_energy, DEFAULT_TOLERANCE)
}

pub fn finite_bath_majorization_with_tolerance(
    p: &ClassicalState,
    q: &ClassicalState,
    bath: &BathSpec,
    total_energy: i64,
    tol: f64,
) -> Result<Verdict> {
    if p.system() != q.system() {
        return Err(Error::SystemMismatch("initial and final states live on different systems".into()));
    }
    let a = lorenz(&block_spectrum(bath, p, total_energy)?);
    let b = lorenz(&block_spectrum(bath, q, total_energy)?);
    // both block spectra are normalized, so the curves always meet at the
    // ends; only interior corners carry information
    let end = a[a.len() - 1].0;
    let mut margin = f64::INFINITY;
    for &(x, _) in a.iter().chain(&b) {
        if x > 0.0 && x < end {
            margin = margin.min(lorenz_at(&a, x) - lorenz_at(&b, x));
        }
    }
    if margin == f64::INFINITY {
        margin = lorenz_at(&a, end) - lorenz_at(&b, end);
    }
    Ok(Verdict { holds: margin >= -tol, margin, tolerance: tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn system(energies: &[f64]) -> HamiltonianSpec {
        HamiltonianSpec::nondegenerate(energies).unwrap()
    }

    #[test]
    fn power_bath_levels() {
        let b = power_of_two_bath(10).unwrap();
        let g: Vec<u64> = b.levels().iter().map(|l| l.1).collect();
        assert_eq!(g, (0..=10).map(|e| 1u64 << e).collect::<Vec<_>>());
        assert!((b.effective_beta() - core::f64::consts::LN_2).abs() < 1e-12);
        assert!(build_toy_bath(1.0, 31).is_err());
        assert!(build_toy_bath(-1.0, 5).is_err());
    }

    #[test]
    fn power_bath_assumptions_hold_exactly() {
        let b = power_of_two_bath(12).unwrap();
        let r = check_bath_assumptions(&b, &[0, 1, 2], 1e-12).unwrap();
        assert_eq!(r.window, (2, 12));
        assert_eq!(r.residual, 0.0);
        assert!(r.exponential_growth && r.energy_matching && r.peaked);
        assert!(r.all_pass());
    }

    #[test]
    fn corrupted_degeneracy_is_localized() {
        let b = power_of_two_bath(12).unwrap().with_degeneracy(7, 100).unwrap();
        let r = check_bath_assumptions(&b, &[0, 1], 1e-6).unwrap();
        assert!(!r.residual_ok());
        let (e, es) = r.worst.unwrap();
        assert!(e == 7 || e - es == 7);
        assert!(!r.exponential_growth);
    }

    #[test]
    fn product_with_gibbs_system_stays_exact() {
        let b = power_of_two_bath(12).unwrap();
        let s = system(&[0.0, 1.0, 3.0]);
        let bigger = with_gibbs_system(&b, &s).unwrap();
        let r = check_bath_assumptions(&bigger, &[0, 2], 1e-12).unwrap();
        assert_eq!(r.residual, 0.0);
        // g′(E) = 2^E Z_S with Z_S = 1 + 1/2 + 1/8 at β = ln 2
        assert_eq!(bigger.degeneracy(3), Some(8 + 4 + 1));
    }

    #[test]
    fn block_spectrum_shapes() {
        let b = power_of_two_bath(10).unwrap();
        let single = ClassicalState::pure(&system(&[0.0]), 0).unwrap();
        let s = block_spectrum(&b, &single, 5).unwrap();
        assert_eq!(s.groups.len(), 1);
        assert!((s.total() - 1.0).abs() < 1e-12);

        let p = ClassicalState::new(system(&[0.0, 1.0]), vec![0.3, 0.7]).unwrap();
        let s = block_spectrum(&b, &p, 6).unwrap();
        assert!((s.total() - 1.0).abs() < 1e-12);
        assert_eq!(s.groups[0].multiplicity, 2 * s.groups[1].multiplicity);
        assert!(block_spectrum(&b, &p, 0).is_err());
        assert!(block_spectrum(&b, &p, 11).is_err());
    }

    #[test]
    fn oplus_distance_vanishes_on_power_bath() {
        let b = power_of_two_bath(12).unwrap();
        let p = ClassicalState::new(system(&[0.0, 1.0, 2.0]), vec![0.5, 0.2, 0.3]).unwrap();
        let window = energy_window(&b, p.system()).unwrap();
        let r = verify_oplus_theorem(&b, &p, &window).unwrap();
        assert!(r.max_distance <= 1e-12);
        assert!(r.window_mass > 0.0 && r.window_mass <= 1.0 + 1e-12);
        let too_big = power_of_two_bath(20).unwrap();
        assert!(matches!(verify_oplus_theorem(&too_big, &p, &[10]), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn finite_bath_reaches_gibbs() {
        let b = power_of_two_bath(10).unwrap();
        let h = system(&[0.0, 1.0, 2.0]);
        let p = ClassicalState::new(h.clone(), vec![0.1, 0.1, 0.8]).unwrap();
        let tau = ClassicalState::gibbs(&h, b.beta()).unwrap();
        assert!(finite_bath_majorization(&p, &tau, &b, 8).unwrap().holds);
        assert!(finite_bath_majorization(&p, &p, &b, 8).unwrap().holds);
        assert!(!finite_bath_majorization(&tau, &p, &b, 8).unwrap().holds);
    }
}
