use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("Kron reduction failed: eliminated block is singular at pivot {pivot}")]
    ReductionFailure { pivot: usize },

    #[error("network solve did not converge after {iterations} iterations (mismatch {mismatch:.3e})")]
    AlgebraicSolve { iterations: usize, mismatch: f64 },

    #[error("network Jacobian is singular")]
    SingularJacobian,

    #[error("infeasible dispatch: equilibrium solve failed (mismatch {mismatch:.3e})")]
    InfeasibleDispatch { mismatch: f64 },

    #[error("algebraic block [[A22, A23], [A32, A33]] is singular; VSC bus voltages are not locally determined")]
    SingularAlgebraicBlock,

    #[error("simulation aborted at step {step}: {source}")]
    SimulationAborted {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("simulation diverged at step {step}: non-finite state")]
    Divergence { step: usize },

    #[error("matrix is not Hurwitz (max real part of spectrum {max_real:.3e})")]
    NotHurwitz { max_real: f64 },

    #[error(
        "sample covariance is ill-conditioned (condition number {cond:.3e}); \
         add a ridge or estimate in reference-reduced coordinates"
    )]
    IllConditioned { cond: f64 },

    #[error("principal logarithm undefined: eigenvalue {eigenvalue} lies on or near the closed negative real axis")]
    LogBranch { eigenvalue: Complex64 },

    #[error("eigenvalues are degenerate: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown fixture '{0}' (expected twomachine_1vsc, ninebus_1vsc or tenmachine_3vsc)")]
    UnknownFixture(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::InvalidModel(_) => "invalid_model",
            Error::ReductionFailure { .. } => "reduction_failure",
            Error::AlgebraicSolve { .. } => "algebraic_solve",
            Error::SingularJacobian => "singular_jacobian",
            Error::InfeasibleDispatch { .. } => "infeasible_dispatch",
            Error::SingularAlgebraicBlock => "singular_algebraic_block",
            Error::SimulationAborted { .. } => "simulation_aborted",
            Error::Divergence { .. } => "divergence",
            Error::NotHurwitz { .. } => "not_hurwitz",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::LogBranch { .. } => "log_branch",
            Error::Degenerate(_) => "degenerate",
            Error::Numeric(_) => "numeric",
            Error::Config(_) => "config",
            Error::UnknownFixture(_) => "unknown_fixture",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

/// Open a file for reading, naming the path in the error.
pub(crate) fn open_file(path: &std::path::Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Read a whole text file, naming the path in the error.
pub(crate) fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
