//! Spiking neural networks for multivariate time-series classification.
//!
//! The pipeline: [`data`] loads and normalizes labeled series, [`encoding`]
//! turns them into sparse spike rasters via CUBA population coding,
//! [`network`] runs the step-wise iterative SNN, [`training`] fits it with
//! surrogate-gradient BPTT, and [`event`] runs inference event-driven with
//! output provably matching the step-wise model.

pub mod error;
pub mod network;
pub mod numerics;
pub mod raster;

pub use error::{Error, Result};
pub use numerics::Matrix;
pub use raster::{SpikeEvent, SpikeRaster};
