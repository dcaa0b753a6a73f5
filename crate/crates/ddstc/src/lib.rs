//! Link-level simulator and detector library for differential distributed
//! space-time coding over two-hop amplify-and-forward relay networks.
//!
//! The crate builds up in layers:
//!
//! * [`numerics`]: complex matrices, Toeplitz covariances, Cholesky factors,
//!   and a Bessel J0 implementation.
//! * [`fading`]: time-correlated Rayleigh fading with a Jakes autocorrelation.
//! * [`codebook`]: unitary Alamouti codebooks and differential encoding.
//! * [`network`]: source, relay and destination signal synthesis.
//! * [`detectors`]: coherent benchmark, two-symbol differential detection,
//!   multiple-symbol differential detection (exhaustive and sphere decoder),
//!   and a Monte-Carlo maximum-likelihood oracle.
//! * [`harness`]: seeded BER sweeps, CSV output, and run configuration.
//!
//! See the `examples/` directory for end-to-end usage.

pub mod codebook;
pub mod detectors;
pub mod error;
pub mod fading;
pub mod harness;
pub mod network;
pub mod numerics;

pub use error::{Error, Result};
