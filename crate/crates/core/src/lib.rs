pub mod baselines;
pub mod cli;
pub mod copulas;
pub mod curves;
pub mod error;
pub mod estimator;
pub mod ingest;
pub mod numerics;
pub mod ranking;
pub mod simulate;

pub use error::{Error, Result};
