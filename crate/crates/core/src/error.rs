use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("S_x eigenvalues {0} and {1} collide; cannot index eigenstates by m")]
    DegenerateSpectrum(f64, f64),

    #[error("Liouvillian has a growing mode with Re(lambda) = {0}")]
    GrowingMode(f64),

    #[error("operation requires a {expected} superoperator")]
    WrongSuperoperatorKind { expected: &'static str },

    #[error("null space is not spanned by density matrices: {0}")]
    NullSpaceNotStates(String),

    #[error("integrator trace drift {drift:e} exceeds tolerance; reduce the step")]
    TraceDrift { drift: f64 },

    #[error("jump probability {prob} at t = {time} exceeds cap {cap}; reduce dt")]
    StepTooCoarse { time: f64, prob: f64, cap: f64 },

    #[error("state norm became non-finite at t = {0}")]
    NonFiniteState(f64),

    #[error("trajectory {index} failed: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("all weights vanish: {0}")]
    ZeroWeight(String),

    #[error("need at least {needed} snapshots, record has {found}")]
    InsufficientSnapshots { needed: usize, found: usize },

    #[error("formula only holds on the strong-symmetry line theta = pi/4 (got theta = {0})")]
    NotSymmetryPoint(f64),

    #[error("leading eigenvalue of the tilted generator is not real at s = {s} (Im = {imag:e})")]
    NonRealLeadingEigenvalue { s: f64, imag: f64 },
}
