//! Detecting quadratic phase coupling with the bispectrum.
//!
//! - [`spectral`]: DFT, bispectrum, segment-averaged bicoherence and hotspot
//!   detection with a null-calibrated threshold.
//! - [`synthetic`]: coupled / uncoupled triads and uniform / Gaussian noise.
//! - [`simulator`]: pseudo-spectral forced Burgers and diffusion solver.
//! - [`market`]: minute-bar OHLCV ingest, cleaning and series building.
//! - [`io`] and [`cli`]: file formats, run manifests and the `qpc` commands.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod cli;
pub mod error;
pub mod io;
pub mod market;
pub mod series;
pub mod simulator;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
pub use series::TimeSeries;
