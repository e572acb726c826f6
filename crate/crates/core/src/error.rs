use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({u}, {v}) has an endpoint outside 0..{n}")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("invalid grounded set: {0}")]
    InvalidGroundedSet(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what}: size {size} exceeds the exhaustive-enumeration cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("solver did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite; the graph is probably disconnected")]
    NotPositiveDefinite,

    #[error("graph is disconnected: {0}")]
    Disconnected(String),

    #[error("pairing model exhausted its budget of {attempts} attempts")]
    RejectionBudget { attempts: usize },

    #[error("step size {dt} is unstable; RK4 needs dt < {max_dt}")]
    Unstable { dt: f64, max_dt: f64 },

    #[error("discrete gain k = {k} must exceed the maximum degree {d_max}")]
    GainTooSmall { k: f64, d_max: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short stable identifier, used in tabular output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EndpointOutOfRange { .. } | Error::SelfLoop(_) | Error::EmptyGraph => {
                "invalid-graph"
            }
            Error::InvalidGroundedSet(_) => "invalid-grounded-set",
            Error::InvalidInput(_) => "invalid-input",
            Error::CapExceeded { .. } => "cap-exceeded",
            Error::NotConverged { .. } => "not-converged",
            Error::NotPositiveDefinite => "not-positive-definite",
            Error::Disconnected(_) => "disconnected",
            Error::RejectionBudget { .. } => "rejection-budget",
            Error::Unstable { .. } => "unstable",
            Error::GainTooSmall { .. } => "gain-too-small",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
