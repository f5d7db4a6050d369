use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Variants carry enough context for
/// the CLI to name the failing stage.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("integration step underflow at r = {r:e} (h = {h:e})")]
    StepFailure { r: f64, h: f64 },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("{stage}: no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        stage: String,
        iterations: usize,
        residual: f64,
    },
    #[error("singular Jacobian after regularization attempts")]
    SingularJacobian,
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("no bracket for the shooting parameter in [{lo:e}, {hi:e}]")]
    BracketNotFound { lo: f64, hi: f64 },
    #[error("tail of {quantity} not resolved (relative residual {residual:e})")]
    TailNotResolved { quantity: String, residual: f64 },
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("Green's function evaluated on the diagonal")]
    OnDiagonal,
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("quadrature not converged (relative error estimate {estimate:e})")]
    QuadratureNotConverged { estimate: f64 },
    #[error("iterate left the admissible set: {0}")]
    LeftAdmissibleSet(String),
    #[error("missing constant: {0}")]
    MissingConstant(String),
    #[error("no schedule is available for p = {p} in [{lo}, {hi})")]
    UnprintedBranch { p: f64, lo: f64, hi: f64 },
    #[error("solver collapsed to the trivial solution")]
    TrivialSolution,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Domain(_)
                | Error::InvalidExponent(_)
                | Error::WrongRegime(_)
                | Error::Invalid(_)
                | Error::Io(_)
                | Error::UnprintedBranch { .. }
                | Error::OnDiagonal
                | Error::DivergentIntegral(_)
                | Error::MissingConstant(_)
        )
    }
}
