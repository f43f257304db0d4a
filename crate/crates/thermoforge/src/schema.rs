//! JSON file formats for systems, states and Gibbs-preserving maps.
//!
//! A state file looks like
//!
//! ```json
//! {"beta": 1.0, "levels": [{"energy": 0.0, "degeneracy": 1}, {"energy": 1.0}], "probabilities": [0.7, 0.3]}
//! ```
//!
//! `probabilities` are listed in canonical microstate order (energy
//! ascending, then degeneracy index). Leaving out both `probabilities` and
//! `density_matrix` asks for the Gibbs state at `beta`. A density matrix is
//! a list of rows whose entries are either reals or `[re, im]` pairs.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thermoforge_core::gibbs_map::GibbsMap;
use thermoforge_core::{ClassicalState, HamiltonianSpec, Level, QuantumState};

use crate::CliError;

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub energy: f64,
    #[serde(default = "one")]
    pub degeneracy: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    fn from_value(z: Complex64) -> Self {
        if z.im == 0.0 {
            Entry::Real(z.re)
        } else {
            Entry::Complex([z.re, z.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub levels: Vec<LevelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_matrix: Option<Vec<Vec<Entry>>>,
}

/// A parsed state: diagonal or a full density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Classical(ClassicalState),
    Quantum(QuantumState),
}

impl Input {
    pub fn system(&self) -> &HamiltonianSpec {
        match self {
            Input::Classical(p) => p.system(),
            Input::Quantum(rho) => rho.system(),
        }
    }

    /// The diagonal state, refusing coherence between different energies.
    pub fn classical(&self) -> Result<ClassicalState, CliError> {
        match self {
            Input::Classical(p) => Ok(p.clone()),
            Input::Quantum(rho) => Ok(thermoforge_core::quantum::classicalize(rho)?),
        }
    }
}

/// Parses JSON with the path of the offending field in the message.
pub fn parse<T: DeserializeOwned>(text: &str, source: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        CliError::input(format!("{source}: field `{path}`: {}", err.into_inner()))
    })
}

impl StateFile {
    pub fn system(&self) -> Result<HamiltonianSpec, CliError> {
        let levels = self.levels.iter().map(|l| Level::new(l.energy, l.degeneracy)).collect();
        let mut h = HamiltonianSpec::new(levels)?;
        if let Some(label) = &self.label {
            h = h.with_label(label.clone());
        }
        Ok(h)
    }

    /// Builds the state; `beta` is only needed for the Gibbs default.
    pub fn state(&self, beta: Option<f64>, tol: f64) -> Result<Input, CliError> {
        let system = self.system()?;
        let d = system.dimension();
        match (&self.probabilities, &self.density_matrix) {
            (Some(_), Some(_)) => {
                Err(CliError::input("give either `probabilities` or `density_matrix`, not both"))
            }
            (Some(p), None) => {
                if p.len() != d {
                    return Err(CliError::input(format!(
                        "`probabilities` has {} entries but the levels define {d} microstates",
                        p.len()
                    )));
                }
                Ok(Input::Classical(ClassicalState::new(system, p.clone())?))
            }
            (None, Some(rows)) => {
                if rows.len() != d {
                    return Err(CliError::input(format!(
                        "`density_matrix` has {} rows but the levels define {d} microstates",
                        rows.len()
                    )));
                }
                let mut matrix = Vec::with_capacity(d * d);
                for (r, row) in rows.iter().enumerate() {
                    if row.len() != d {
                        return Err(CliError::input(format!(
                            "`density_matrix[{r}]` has {} entries, expected {d}",
                            row.len()
                        )));
                    }
                    matrix.extend(row.iter().map(|e| e.value()));
                }
                Ok(Input::Quantum(QuantumState::with_tolerance(system, matrix, tol)?))
            }
            (None, None) => {
                let beta = beta.ok_or_else(|| CliError::input("a Gibbs state needs `beta` (in the file or via --beta)"))?;
                Ok(Input::Classical(ClassicalState::gibbs(&system, beta)?))
            }
        }
    }

    pub fn from_system(system: &HamiltonianSpec, beta: Option<f64>) -> Self {
        StateFile {
            label: system.label().map(String::from),
            beta,
            levels: system.levels().iter().map(|l| LevelSpec { energy: l.energy, degeneracy: l.degeneracy }).collect(),
            probabilities: None,
            density_matrix: None,
        }
    }

    pub fn from_input(input: &Input, beta: Option<f64>) -> Self {
        let mut file = Self::from_system(input.system(), beta);
        match input {
            Input::Classical(p) => file.probabilities = Some(p.probs().to_vec()),
            Input::Quantum(rho) => {
                let d = rho.dimension();
                file.density_matrix = Some(
                    rho.matrix().chunks(d).map(|row| row.iter().map(|&z| Entry::from_value(z)).collect()).collect(),
                );
            }
        }
        file
    }
}

/// `{"tau": [...], "matrix": [[...]]}` with `matrix[j][i] = p_{i→j}`, so
/// that `q = M p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub tau: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

impl MapFile {
    pub fn from_map(map: &GibbsMap) -> Self {
        MapFile { tau: map.tau().probs().to_vec(), matrix: map.rows() }
    }

    /// Flattened matrix after checking its shape against `d` microstates.
    pub fn flat(&self, d: usize) -> Result<Vec<f64>, CliError> {
        if self.tau.len() != d {
            return Err(CliError::input(format!("map `tau` has {} entries, expected {d}", self.tau.len())));
        }
        if self.matrix.len() != d {
            return Err(CliError::input(format!("map `matrix` has {} rows, expected {d}", self.matrix.len())));
        }
        let mut flat = Vec::with_capacity(d * d);
        for (j, row) in self.matrix.iter().enumerate() {
            if row.len() != d {
                return Err(CliError::input(format!("map `matrix[{j}]` has {} entries, expected {d}", row.len())));
            }
            flat.extend_from_slice(row);
        }
        Ok(flat)
    }
}
