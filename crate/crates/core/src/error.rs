use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter or argument lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The spectral density has no finite value at the requested frequency.
    #[error("spectral density is singular at lambda = {lambda} for H = {hurst}")]
    Singularity { hurst: f64, lambda: f64 },

    /// A prediction-error variance or pivot dropped below the conditioning floor.
    #[error("ill-conditioned Toeplitz system (H = {hurst}, n = {n}): {detail}")]
    Conditioning { hurst: f64, n: usize, detail: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A localized parameter theta0 + phi_n u left (0,1) x (0,inf).
    #[error("localized parameter ({hurst}, {sigma}) is outside the parameter space")]
    OutOfDomain { hurst: f64, sigma: f64 },

    #[error("degenerate limits: alpha * gamma_hat - alpha_hat * gamma = {0}")]
    DegenerateLimits(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("circulant embedding has a negative eigenvalue {value} (H = {hurst}, n = {n})")]
    NegativeEigenvalue { hurst: f64, n: usize, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by bad input rather than by numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::DimensionMismatch { .. }
                | Error::OutOfDomain { .. }
                | Error::DegenerateLimits(_)
                | Error::Parameter(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}
