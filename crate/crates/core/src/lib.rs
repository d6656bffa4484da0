pub mod analytic;
pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod point_process;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod simulator;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
