//! Quantum discrete map (QDM) time-series forecasting on an exact
//! small-qubit simulator.
//!
//! The crate covers the full pipeline: amplitude encoding, shallow-circuit
//! evolution, per-qubit σ_z readout, multi-channel composition, the
//! parameter-shift-through-time gradient, Adam training, noise channels with
//! a learnable error-cancellation layer, a quantum reservoir computing
//! baseline, and numerical checks of the map's dynamical and approximation
//! properties.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod qrc;
pub mod quantum;
pub mod rng;
pub mod signals;
pub mod training;

pub use error::{QdmError, Result};
