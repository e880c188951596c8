//! Joint receive beamforming and IRS phase-shift design for directional
//! modulation links with an eavesdropper.
//!
//! The crate builds line-of-sight channels for a multi-antenna transmitter,
//! an intelligent reflecting surface, a legitimate receiver and an
//! eavesdropper, and maximizes the legitimate receive power with two
//! alternating schemes ([`opt_gao`] and the zero-forcing [`opt_zf`]).
//! [`experiments`] wraps both with baselines and parameter sweeps.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod numerics;
pub mod opt_gao;
pub mod opt_zf;
pub mod precoding;

pub use error::{Error, Result};
