use thiserror::Error;

/// Errors raised by the planning library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: String,
    },

    #[error("invalid value {value} on sweep axis `{axis}`: {reason}")]
    InvalidAxisValue {
        axis: String,
        value: String,
        reason: String,
    },

    #[error("sweep axis `{0}` has no values")]
    EmptyAxis(String),

    #[error("unknown file mixture `{0}`")]
    UnknownMixture(String),

    #[error("unknown preset `{name}`; available presets: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("monte carlo mode requires a simulation config")]
    MissingSimConfig,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: impl ToString, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        value: value.to_string(),
        reason: reason.into(),
    }
}
