use thiserror::Error;

pub type Result<T> = std::result::Result<T, ShockError>;

#[derive(Debug, Error)]
pub enum ShockError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("not a 2-shock: v_minus = {v_minus} must be strictly below v_plus = {v_plus}")]
    NotTwoShock { v_minus: f64, v_plus: f64 },

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("profile solver failure: {0}")]
    ProfileSolver(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("numerical failure at t = {t}: {msg}")]
    Numerical { t: f64, msg: String },

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ShockError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ShockError::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        ShockError::Config(msg.into())
    }
}
