use thiserror::Error;

/// Errors raised by model construction, sampling and estimation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CmcError {
    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid rating panel: {0}")]
    InvalidPanel(String),
    #[error("class {class} has no outgoing transitions in the panel")]
    EmptyRow { class: usize },
    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl CmcError {
    /// True for errors caused by malformed inputs rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            CmcError::InvalidMatrix(_)
                | CmcError::InvalidParams(_)
                | CmcError::InvalidPanel(_)
                | CmcError::EmptyRow { .. }
                | CmcError::InvalidConfig(_)
        )
    }
}

pub type Result<T, E = CmcError> = std::result::Result<T, E>;
