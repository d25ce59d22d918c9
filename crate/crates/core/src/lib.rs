//! Numerical toolkit for entire gradient-graph equations in the plane.

pub mod asymptotics;
pub mod error;
pub mod harmonics;
pub mod legendre;
mod lsq;
pub mod operators;
pub mod solutions;

pub use error::{Error, Result};
