//! Euler–Poincaré dynamics with broken symmetry on SE(3), potential-shaping
//! controllers for underwater vehicles and a heavy top on a movable base, and
//! Lie–Poisson checks of the closed loops.

pub mod algebra;
pub mod cli;
pub mod control;
pub mod error;
pub mod poisson;
pub mod scenario;
pub mod sim;
pub mod systems;
pub mod verify;

pub use error::{Error, Result};
