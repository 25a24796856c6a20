use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("enumeration budget exceeded: need {needed}, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("conditioning event has zero probability")]
    ZeroProbability,
    #[error("invalid urn model: {0}")]
    InvalidModel(String),
    #[error("malformed cutpoints for urn {urn}: {reason}")]
    MalformedCutpoints { urn: usize, reason: &'static str },
    #[error("set of size {0} is not odd")]
    EvenSet(usize),
    #[error("weights are not balanced")]
    Unbalanced,
    #[error("enumeration cap of {0} exceeded")]
    CapExceeded(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
