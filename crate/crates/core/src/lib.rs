//! Detection and delay analysis for channel-based physical layer
//! authentication (PLA) in a machine-type-communication uplink.
pub mod attacks;
pub mod channel;
pub mod error;
pub mod par;
pub mod pla;
pub mod quad;
pub mod scenario;
pub mod sim;
pub mod snc;
pub mod specfun;

pub use error::{Error, Result};
