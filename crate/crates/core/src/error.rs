use thiserror::Error;

/// Errors raised across the laboratory.
///
/// Numerical failures carry the offending quantity so that sweeps can report
/// them per row instead of aborting.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("`{atom}` evaluated outside its domain at argument {argument}")]
    DomainViolation { atom: &'static str, argument: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not positive definite (smallest eigenvalue {lambda_min:e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("matrix is ill-conditioned: eigenvalue ratio {ratio:e} below guard {guard:e}")]
    IllConditioned { ratio: f64, guard: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("iterate left the admissible domain: {0}")]
    DomainExceeded(String),

    #[error("perturbation Hessian bound {bound} exceeds the admissible {limit}")]
    AmplitudeTooLarge { bound: f64, limit: f64 },

    #[error("flow left the convexity class at time {time} (node {node})")]
    ClassExit { time: f64, node: usize },

    #[error("timestep {dt:e} violates the stability bound {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("cylinder contains no grid nodes")]
    EmptyCylinder,

    #[error("oscillation ladder is degenerate: {0}")]
    DegenerateLadder(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown atom `{name}` at {path}")]
    UnknownAtom { name: String, path: String },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
