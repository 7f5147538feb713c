//! Simulation library for joint communication-and-sensing networking:
//! a CD-OFDM PHY with an FFT radar pipeline, sensing-prior neighbor
//! discovery, and a sensing-assisted slotted MAC.
//!
//! Continuous math is generic over [`num::Scalar`]; the simulators and
//! every CLI entry point run on the [`Real`] alias below.

pub mod geom;
pub mod mac;
pub mod nd;
pub mod num;
pub mod phy;
pub mod rng;
pub mod series;

/// Concrete scalar used by the simulators and the CLI.
pub type Real = f64;

/// Complex sample at the concrete scalar.
pub type Cx = num_complex::Complex<Real>;

pub use num::Scalar;
pub use rng::RngHandle;
