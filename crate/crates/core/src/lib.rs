//! Steady states, photon statistics and phase diagrams of a driven cavity
//! holding one three-level atom under electromagnetically induced
//! transparency, in the semiclassical and full quantum descriptions.

pub mod meanfield;
pub mod qme;
pub mod sweep;
pub mod validate;
pub mod model;

pub use model::{Axis, SystemParams};
