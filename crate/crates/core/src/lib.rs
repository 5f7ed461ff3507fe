pub mod brownian;
pub mod env;
pub mod error;
pub mod experiment;
pub mod functionals;
pub mod idla;
pub mod logspace;
pub mod path;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
