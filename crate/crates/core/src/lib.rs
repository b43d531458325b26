//! Broadband signal approximation with small dense networks.
//!
//! The crate fits a sampled real signal in one of three ways:
//!
//! - [`fitters::fit_vanilla`]: one network over the time grid.
//! - [`fitters::fit_phasednn`]: band extraction, shift to baseband, one network
//!   pair per band, inverse shift and sum.
//! - [`fitters::fit_pffdnn`]: one forward transform, one network pair per
//!   spectrum segment, concatenation and one inverse transform.
//!
//! Everything here is `no_std` (with `alloc`) and free of IO. Parallel training,
//! wall clocks, files and the CLI live in the `pffdnn` companion crate, which
//! plugs into [`fitters::Executor`].
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod fft;
pub mod fitters;
pub mod nn;
pub mod seed;
pub mod signals;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
