use kerr_lattice::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("unknown figure {0:?}; known: {known}", known = crate::figures::FIGURES.join(", "))]
    UnknownFigure(String),

    #[error("{failed} validation check(s) failed")]
    ValidationFailed { failed: usize },
}

impl CliError {
    /// Process exit code: 2 configuration, 3 parameter validity, 4 solver
    /// convergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownFigure(_) => 2,
            CliError::Model(e) => match e {
                Error::Validity { .. } | Error::NoBoundState { .. } => 3,
                Error::Convergence { .. } | Error::Bracket { .. } => 4,
                Error::Geometry(_) | Error::Sign(_) | Error::Size { .. } | Error::Index { .. } | Error::Domain(_) => 2,
                Error::BasisMismatch { .. } => 1,
            },
            CliError::Io(_) | CliError::Csv(_) | CliError::ValidationFailed { .. } => 1,
        }
    }
}
