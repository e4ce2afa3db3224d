use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A per-mode operator in the normal-form solve is (nearly) singular.
    #[error("resonance at mode (n={n}, m={m}): condition number {cond:.3e}")]
    Resonance { n: i64, m: usize, cond: f64 },

    #[error("time step failed at t={time}: {reason}")]
    Step { time: f64, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the CLI, grouped by error family.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) | Error::Config(_) | Error::GridMismatch(_) => 2,
            Error::Numerical(_) | Error::Step { .. } => 3,
            Error::Resonance { .. } => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
