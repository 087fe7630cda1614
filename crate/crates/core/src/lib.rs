#![no_std]

extern crate alloc;

pub mod config;
pub mod denoise;
pub mod error;
mod linalg;
pub mod masks;
pub mod metrics;
pub mod objective;
pub mod phantom;
pub mod pipeline;
pub mod proximal;
pub mod rician;
pub mod solver;
pub mod transforms;
pub mod types;

pub use config::{CheckRule, SolverConfig, SolverConfigBuilder};
pub use error::{Error, Result};
pub use objective::Objective;
pub use proximal::{prox_lp, prox_lp_complex, prox_lp_scalar, ProxParams};
pub use num_complex::Complex64;
pub use types::{validate_shapes, ComplexImage, Domain, RealImage, SamplingMask, Shape, SparseCode};
