use thiserror::Error;

/// Errors raised by the verification library.
///
/// The CLI maps these onto exit codes: `Config` to 2, every numeric failure
/// (`Domain`, `Numeric`, `Blowup`, `PostBlowup`) to 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("blowup detected at t = {t}: {detail}")]
    Blowup { t: f64, detail: String },

    #[error("query at t = {t} is past the blowup time T* = {t_star}")]
    PostBlowup { t: f64, t_star: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
