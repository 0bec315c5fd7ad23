pub mod coin;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod rng;
pub mod targets;

pub use error::{Error, Result};
pub mod samplers;
pub mod metrics;
pub mod mied;
pub mod harness;
