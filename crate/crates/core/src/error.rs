use serde::Serialize;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GmqError {
    #[error("invalid parameters: {message}")]
    InvalidParams { message: String },

    #[error("domain error: {message}")]
    Domain { message: String },

    #[error("infeasible: {message}")]
    Infeasible {
        message: String,
        minimal_radius: Option<u32>,
    },

    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        partial_sum: Option<f64>,
        last_term: Option<f64>,
        /// Intermediate table (e.g. the ε-extrapolation table) when available.
        table: Vec<(f64, f64)>,
    },
}

impl GmqError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self::InvalidParams {
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self::Domain {
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::NumericalFailure {
            message: message.into(),
            partial_sum: None,
            last_term: None,
            table: Vec::new(),
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Self::NumericalFailure { .. })
    }
}

pub type Result<T> = std::result::Result<T, GmqError>;
