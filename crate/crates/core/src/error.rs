use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("duplicate {kind} `{key}`")]
    Duplicate { kind: &'static str, key: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("weighting scheme `{scheme}` requires capacity_teu, but route `{route}` has none")]
    MissingCapacity { scheme: &'static str, route: String },

    #[error("a route needs at least 2 distinct ports, got {0}")]
    TooFewPorts(usize),

    #[error("ports `{s}` and `{t}` are both in country `{country}`")]
    SameCountry { s: String, t: String, country: String },

    #[error("unknown port `{0}`")]
    UnknownPort(String),

    #[error("column `{0}` has zero variance")]
    ConstantColumn(String),

    #[error("design matrix is rank deficient (singular value ratio {0:.3e})")]
    RankDeficient(f64),

    #[error("{n_obs} observations are not enough for {k_params} parameters")]
    TooFewObservations { n_obs: usize, k_params: usize },

    #[error("exhaustive oracle refuses graphs with {0} nodes (limit 16)")]
    OracleTooLarge(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
