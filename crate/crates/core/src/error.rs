use thiserror::Error;

#[derive(Debug, Error)]
pub enum BeamError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidKey { key: String, reason: String },

    #[error("field length {got} does not match grid with {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error(
        "time step {dt:e} violates the CFL bound: c_max = {c_max:e}, admissible dt <= {dt_max:e}"
    )]
    Cfl { dt: f64, dt_max: f64, c_max: f64 },

    #[error("non-finite value encountered in {0}")]
    NumericFailure(&'static str),

    #[error("shooting did not converge: best residual {residual:e} after {iterations} iterations")]
    ShootingFailed { residual: f64, iterations: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BeamError>;
