use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Hamiltonian with no levels, zero degeneracy or a non-finite energy.
    InvalidHamiltonian(String),
    /// Probability vector or density matrix violating its invariants.
    InvalidState(String),
    /// Inverse temperature that is negative, zero where positivity is needed, or not finite.
    InvalidBeta(f64),
    /// Smoothing parameter outside `[0, 1)`.
    InvalidEpsilon(f64),
    DimensionMismatch { expected: usize, found: usize },
    /// Two states or curves that must share a system do not.
    SystemMismatch(String),
    /// `p` has mass on a microstate where the reference state has none.
    SupportViolation { index: usize },
    /// Coherence between different energies where a diagonal state is required.
    Coherent { magnitude: f64 },
    OutOfRange { value: f64, min: f64, max: f64 },
    TooManyMicrostates { count: usize, cap: usize },
    /// Transition currents whose row or column sums do not match group sizes.
    MarginalViolation(String),
    /// The floating LP ended with a phase-one residual too close to zero to decide.
    DegenerateLp { residual: f64, pivots: usize },
    /// No value of work makes the requested switch transition feasible.
    NoFeasibleWork,
    /// An energy block falls outside the range where the bath is defined.
    WindowViolation { total_energy: i64, min: i64, max: i64 },
    ResourceLimit { required: u128, cap: u128 },
    Construction(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidHamiltonian(msg) => write!(f, "invalid hamiltonian: {msg}"),
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::InvalidBeta(b) => write!(f, "invalid inverse temperature {b}"),
            Error::InvalidEpsilon(e) => write!(f, "smoothing parameter {e} outside [0, 1)"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected} microstates, found {found}")
            }
            Error::SystemMismatch(msg) => write!(f, "system mismatch: {msg}"),
            Error::SupportViolation { index } => write!(
                f,
                "state has mass on microstate {index} outside the support of the reference state"
            ),
            Error::Coherent { magnitude } => write!(
                f,
                "state has coherence {magnitude:e} between distinct energies; a diagonal state is required"
            ),
            Error::OutOfRange { value, min, max } => {
                write!(f, "value {value} outside [{min}, {max}]")
            }
            Error::TooManyMicrostates { count, cap } => {
                write!(f, "{count} microstates exceeds the cap of {cap}")
            }
            Error::MarginalViolation(msg) => write!(f, "transition currents violate marginals: {msg}"),
            Error::DegenerateLp { residual, pivots } => write!(
                f,
                "numerically degenerate LP: phase-one residual {residual:e} after {pivots} pivots"
            ),
            Error::NoFeasibleWork => write!(f, "no amount of work makes the transition feasible"),
            Error::WindowViolation { total_energy, min, max } => write!(
                f,
                "total energy {total_energy} outside the bath window [{min}, {max}]"
            ),
            Error::ResourceLimit { required, cap } => {
                write!(f, "explicit construction needs {required} microstates, cap is {cap}")
            }
            Error::Construction(msg) => write!(f, "construction failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
