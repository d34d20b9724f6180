use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}: {reason}")]
    BadRow { row: u64, reason: String },

    #[error("duplicate date {0}")]
    DuplicateDate(String),

    #[error("missing column {0:?} in header")]
    MissingColumn(&'static str),

    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("degenerate series: standard deviation is zero")]
    DegenerateSeries,

    #[error("degenerate simulation: post-warmup returns are constant")]
    DegenerateSimulation,

    #[error("rms-cumulative volatility is defined at window level only")]
    WindowLevelOnly,

    #[error("invalid window pair T1={short}, T2={long}: need 1 <= T1 < T2")]
    InvalidWindowPair { short: usize, long: usize },

    #[error("index t'={t_prime} out of range for window {window} (valid {first}..={last})")]
    OutOfRange {
        t_prime: usize,
        window: usize,
        first: usize,
        last: usize,
    },

    #[error("no valid t' at lag {lag}")]
    EmptyLag { lag: usize },

    #[error("mismatched lag ranges: {0} vs {1}")]
    LagMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
