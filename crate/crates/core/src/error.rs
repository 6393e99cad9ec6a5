use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quaternion norm {norm} is not 1 within {tol:e}")]
    NotUnit { norm: f64, tol: f64 },

    #[error("point is not on the small circle: cos distance {found} vs expected {expected}")]
    NotOnCircle { found: f64, expected: f64 },

    #[error("angle {value} out of range [{lo}, {hi}]")]
    AngleOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature rule does not match the integration domain ({rule} vs {domain})")]
    RuleMismatch { rule: &'static str, domain: &'static str },

    #[error("resolution {given} below minimum {min}")]
    ResolutionTooSmall { given: usize, min: usize },

    #[error("ill-conditioned system (condition estimate {cond:e}); add ridge regularization")]
    IllConditioned { cond: f64 },

    #[error("underdetermined system: {rows} equations for {unknowns} unknowns; add ridge regularization")]
    Underdetermined { rows: usize, unknowns: usize },

    #[error("scaling entries sigma_l are not populated")]
    MissingSigma,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
