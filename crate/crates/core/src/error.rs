use thiserror::Error;

/// Errors produced by the pipeline stages.
///
/// `Config` covers caller mistakes (bad thresholds, bad parameters) while the
/// remaining variants describe problems with the data itself.
#[derive(Debug, Error)]
pub enum ClifError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),
}

impl ClifError {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        ClifError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<String>, source: csv::Error) -> Self {
        ClifError::Csv {
            path: path.into(),
            source,
        }
    }

    /// True when the error is a configuration/usage problem rather than a
    /// defect in the input data.
    pub fn is_config(&self) -> bool {
        matches!(self, ClifError::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, ClifError>;
