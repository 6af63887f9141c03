//! Cell-free massive MIMO with low-resolution converters and capacity-limited
//! fronthaul: channel generation, uplink estimation, downlink max-min power
//! control and energy efficiency.

pub mod bisect;
pub mod config;
pub mod downlink;
pub mod energy;
pub mod error;
pub mod fronthaul;
pub mod harness;
pub mod linalg;
pub mod maxmin_mrt;
pub mod maxmin_zf;
pub mod netgen;
pub mod rf;
pub mod rng;
pub mod uplink;

pub use config::{Resolution, SystemConfig};
pub use error::{Error, Result};
