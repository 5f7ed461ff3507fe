use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid environment law: {0}")]
    InvalidLaw(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("interval of width {width} exceeds the linear-solve limit of {limit}")]
    IntervalTooLarge { width: usize, limit: usize },

    #[error("walk did not leave the cluster within {cap} steps")]
    Capped { cap: u64 },

    #[error("empty sample pool")]
    EmptyPool,

    #[error("{value} lies outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("path window cap of {cap} indices reached")]
    WindowCap { cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
