use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: String, got: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parameter ordering violated: {0}")]
    ParameterOrdering(String),
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("smallness certificate violated: |grad X| + |h| = {lhs:.3e} > |c|/4 = {bound:.3e}")]
    Smallness { lhs: f64, bound: f64 },
    #[error("singular linear system ({0})")]
    Singular(String),
    #[error("ill-conditioned linear system: condition estimate {0:.3e}")]
    IllConditioned(f64),
    #[error("iteration did not converge after {iters} iterations (last increment {last:.3e})")]
    NonConvergence { iters: usize, last: f64 },
    #[error("smallness broken at Picard iterate {iterate}: {detail}")]
    PicardSmallness { iterate: usize, detail: String },
    #[error("kappa must be positive, got {0:.3e}")]
    NonPositiveKappa(f64),
    #[error("kappa = {0} is outside [0, 1/2)")]
    KappaRange(f64),
    #[error("non-finite value during evolution at v = {0:.6e}")]
    NonFinite(f64),
    #[error("step size underflow at s = {0:.6e}")]
    StepUnderflow(f64),
    #[error("Riccati blow-up of phi' at v_hat = {0:.6e}")]
    RiccatiBlowup(f64),
    #[error("coverage: {0}")]
    Coverage(String),
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
