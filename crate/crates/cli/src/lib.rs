//! File formats, experiment configuration and the `csmri` command line.

pub mod app;
pub mod config;
pub mod error;
pub mod experiment;
pub mod pgm;
pub mod rimg;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use rimg::{Payload, RawImageFile};
