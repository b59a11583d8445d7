use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("empty Dirichlet part")]
    EmptyDirichlet,

    #[error("inconsistent orientation: triangle {0} has non-positive signed area")]
    Orientation(usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("contact boundary is empty")]
    EmptyContact,

    #[error("power iteration did not converge after {iterations} iterations (relative residual {residual:e})")]
    PowerIteration { iterations: usize, residual: f64 },

    #[error("linear solver breakdown: {0}")]
    Solver(String),

    #[error("{solve}: Newton did not converge after {iterations} iterations (residual {residual:e})")]
    Newton {
        solve: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step {step} is beyond the stored history (latest step {latest})")]
    DelayOutOfRange { step: usize, latest: usize },

    #[error("step failed at t = {t}: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_time(self, t: f64) -> Error {
        Error::Step {
            t,
            source: Box::new(self),
        }
    }
}
