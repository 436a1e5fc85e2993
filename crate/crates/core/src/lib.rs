//! Vanishing-viscosity laboratory for 2D Navier-Stokes in a periodic channel
//! with a Navier slip wall.

pub mod corrector;
pub mod criteria;
pub mod error;
pub mod field;
pub mod linalg;
pub mod poisson;
pub mod series;
pub mod sim;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
