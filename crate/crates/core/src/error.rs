use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} is not a multiple of the grid step {dt_grid}")]
    OffGrid { t: f64, dt_grid: f64 },

    #[error("path window [{t_min}, {t_max}] does not cover [{need_min}, {need_max}]")]
    WindowExhausted {
        t_min: f64,
        t_max: f64,
        need_min: f64,
        need_max: f64,
    },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("solution diverged at t = {t} (|u| = {norm})")]
    Divergence { t: f64, norm: f64 },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("radius integrand does not decay along the truncation study: {0}")]
    NonIntegrable(String),

    #[error("pullback sequence is not Cauchy: displacements {displacements:?} exceed {tol}")]
    NonCauchy { displacements: Vec<f64>, tol: f64 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
