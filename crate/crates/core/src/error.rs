use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    /// The request is valid but outside what the analytic path covers.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Detection stage `stage` (1-based) has a non-positive SINR margin
    /// `a_l - Sigma_l * gamma_th_l`.
    #[error("infeasible configuration: stage {stage} has margin {margin:.6e} <= 0")]
    Infeasible { stage: usize, margin: f64 },

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible { .. } => 2,
            Error::Bracket(_) | Error::Grid(_) => 3,
            Error::Parse(_) => 4,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
