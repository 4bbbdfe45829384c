use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid hypergeometric index K = {re} + {im}i (nonpositive integer)")]
    InvalidIndex { re: f64, im: f64 },
    #[error("argument {re} + {im}i is a pole")]
    PoleArgument { re: f64, im: f64 },
    #[error("argument {x} outside the domain of {what}")]
    DomainError { what: &'static str, x: f64 },
    #[error("Wightman kernel is singular at s = {s}, s' = {s_prime}")]
    SingularPoint { s: f64, s_prime: f64 },
    #[error("self-channel kernel with zero regulator requested; use shifted bounds")]
    SingularKernel,
    #[error("quadrature did not converge: estimate {value:e}, error {error:e} after {evals} evaluations")]
    QuadratureNonConvergence { value: f64, error: f64, evals: usize },
    #[error("finite-difference extrapolation did not converge (last relative change {0:e})")]
    StepUnderflow(f64),
    #[error("overdamped oscillator (Omega_r^2 = {omega_r_sq} <= gamma^2 = {gamma_sq}) is not supported")]
    OverdampedUnsupported { omega_r_sq: f64, gamma_sq: f64 },
    #[error("covariance matrix violates the uncertainty bound in block {block}: {value:e} < {bound:e}")]
    NonPhysicalState { block: &'static str, value: f64, bound: f64 },
    #[error("symplectic discriminant is negative ({0:e})")]
    ComplexSpectrum(f64),
    #[error("covariance matrix is singular ({0})")]
    SingularCovariance(&'static str),
    #[error("G-tilde matrix is singular")]
    SingularGTilde,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("scenario file: {0}")]
    Scenario(String),
    #[error("sweep point {index} (x = {x}) failed: {source}")]
    SweepPoint {
        index: usize,
        x: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
