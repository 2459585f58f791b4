//! Energy simulator for a UAV that must process a computational workload,
//! either onboard or by offloading it to a MEC-capable base station over a
//! sub-6 GHz, mmWave or THz uplink.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod channel;
pub mod config;
pub mod error;
pub mod link;
pub mod power;
pub mod quadrature;
pub mod rng;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
