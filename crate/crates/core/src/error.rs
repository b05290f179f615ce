use thiserror::Error;

/// Errors raised while validating inputs, optimizing, or doing I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid arm model: {0}")]
    InvalidArm(String),

    #[error("invalid scenario field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("invalid DE parameters: {0}")]
    InvalidDeParams(String),

    #[error("degenerate segment of length {length:e}")]
    DegenerateSegment { length: f64 },

    #[error("cost function returned a non-finite value ({0})")]
    NonFiniteCost(f64),

    #[error("infeasible joint state: joint {joint} has empty step window [{lower}, {upper}]")]
    InfeasibleJointState {
        joint: usize,
        lower: f64,
        upper: f64,
    },

    #[error("unknown benchmark function `{0}`")]
    UnknownFunction(String),

    #[error("failed to parse scenario: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("failed to serialize scenario: {0}")]
    Serialize(#[from] toml::ser::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
