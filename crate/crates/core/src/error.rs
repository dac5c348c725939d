use thiserror::Error;

/// Failure modes shared by every module of the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller violated an operation's precondition (shape, range, kind).
    #[error("contract violation: {0}")]
    Contract(String),
    /// The requested register does not fit the configured qubit budget.
    #[error("register of {requested} qubits exceeds the limit of {limit}")]
    Resource { requested: usize, limit: usize },
    /// A normalisation denominator vanished (e.g. Tr(rho^M) ~ 0).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// The operation is not implemented for this input class.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
