use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value failed validation. `field` is the dotted path
    /// of the offending entry, e.g. `model.eps`.
    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("odd-order derivative requested at the kink point x = {x}")]
    KinkPoint { x: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("solution blew up at t = {t}: max rho = {max_rho:e} exceeds limit {limit:e}")]
    BlowUp { t: f64, max_rho: f64, limit: f64 },

    #[error("non-finite value produced at t = {t}")]
    NonFinite { t: f64 },

    #[error("mode {n} is not destabilizable: Re omega_n = {omega:e} <= 0")]
    NotDestabilizable { n: i64, omega: f64 },

    #[error("trajectories are not aligned: {0}")]
    Misaligned(String),

    #[error("invalid epsilon ladder: {0}")]
    InvalidLadder(String),

    #[error("solve failed for eps = {eps}: {source}")]
    LadderSolve {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("mode {n} amplitude {amplitude:e} is below the detection floor")]
    ModeAbsent { n: i64, amplitude: f64 },

    #[error("perturbation {deviation:e} leaves the linear regime (cap {cap:e}) at t = {t}")]
    NonlinearRegime { t: f64, deviation: f64, cap: f64 },

    #[error("root solver failed: {0}")]
    RootSolver(String),

    #[error("evenness check failed: {0}")]
    NotEven(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid snapshot file: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
