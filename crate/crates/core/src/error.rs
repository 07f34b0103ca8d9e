use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FC requires odd sample count, got {0}")]
    EvenSampleCount(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("infinite SNR: noise variance is zero")]
    InfiniteSnr,

    #[error("degenerate spectrum: eigenvalues {0} and {1} are closer than the separation threshold")]
    DegenerateSpectrum(Complex64, Complex64),

    #[error("window too wide for eigenvalue {0}")]
    WindowTooWide(Complex64),

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("eigensolver did not converge ({converged} of {total} eigenvalues available)")]
    EigenNoConvergence { converged: usize, total: usize },

    #[error("missing eigenvalue: no candidate left for reference(s) {0:?}")]
    MissingEigenvalue(Vec<Complex64>),

    #[error("degenerate normalization g_k = 0")]
    DegenerateNormalization,

    #[error("defective/ill-conditioned eigenpair (|b a| = {0:e})")]
    IllConditionedEigenpair(f64),

    #[error("Newton search did not converge after {iterations} iterations (last iterate {last})")]
    NewtonNoConvergence { iterations: usize, last: Complex64 },

    #[error("flat scattering derivative at {0}")]
    FlatDerivative(Complex64),

    #[error("scattering propagation overflow at {0}")]
    ScatteringOverflow(Complex64),

    #[error("need at least 2 successful trials, got {0}")]
    TooFewTrials(usize),

    #[error("reference covariance has zero Frobenius norm")]
    ZeroReference,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
