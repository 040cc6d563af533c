use thiserror::Error;

/// Errors raised by the coding library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Infinite evidence for both values of a bit. On a noiseless or erasure
    /// channel this means the frozen values disagree with the received word.
    #[error("decoding contradiction{}", position.map(|p| format!(" near position {p}")).unwrap_or_default())]
    DecodingContradiction { position: Option<usize> },
    #[error("unsupported channel: {0}")]
    UnsupportedChannel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
