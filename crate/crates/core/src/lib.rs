//! Precoding, detection and performance analysis for a multiuser downlink
//! with 1-bit oversampled receivers and time-instance zero-crossing
//! modulation.

pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod mvn;
pub mod precoding;
pub mod qp;
pub mod ser_bound;
pub mod signal_chain;
pub mod zx_modem;

pub use error::{Error, Result};
