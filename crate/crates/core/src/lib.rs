//! Channel estimation for holographic RIS-aided THz links: surface beam
//! patterns, a wideband geometric channel, downlink beam training with
//! grouping, and uplink compressed sensing with OMP.

pub mod beampattern;
pub mod ce_downlink;
pub mod ce_uplink;
pub mod channel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod sparse_recovery;

pub use error::{HolorisError, Result};
