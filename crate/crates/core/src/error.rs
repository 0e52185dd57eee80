use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown state `{state}` for variable `{variable}`")]
    UnknownState { variable: String, state: String },

    #[error("adding edge {parent} -> {child} would create a directed cycle")]
    Cycle { parent: String, child: String },

    #[error("self-loop on `{0}` is not allowed")]
    SelfLoop(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("graphs or datasets are defined over different variable schemes")]
    SchemeMismatch,

    #[error("shape error: {0}")]
    Shape(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("dataset is empty{0}")]
    EmptyDataset(String),

    #[error("variable `{0}` appears more than once in the parent list")]
    DuplicateParent(String),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("marginal for `{variable}` has {got} entries, expected {expected}")]
    MarginalMismatch {
        variable: String,
        expected: usize,
        got: usize,
    },

    #[error("network is not fully parameterized: {0}")]
    UnparameterizedNetwork(String),

    #[error("factor cardinality mismatch on variable {0}")]
    CardinalityMismatch(usize),

    #[error("evidence has zero probability under the network")]
    ZeroEvidenceProbability,

    #[error("joint state space of {0} entries exceeds the enumeration limit")]
    StateSpaceTooLarge(u128),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
