use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Numerical(_) | AppError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        AppError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<phasecorr_core::Error> for AppError {
    fn from(e: phasecorr_core::Error) -> Self {
        use phasecorr_core::Error as E;
        match e {
            E::InvalidOrder(_) | E::InvalidParameter(_) | E::Shape(_) | E::OrderingDirection { .. } | E::RepresentationMismatch { .. } => {
                AppError::Config(e.to_string())
            }
            _ => AppError::Numerical(e.to_string()),
        }
    }
}
