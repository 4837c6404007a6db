//! Numerical verification of space-like surfaces with parallel mean curvature
//! vector in Lorentzian warped products `-dt^2 + f(t)^2 g_c`.

pub mod ambient;
pub mod catalog;
pub mod error;
pub mod export;
pub mod grid;
pub mod immersion;
pub mod linalg;
pub mod shape;
pub mod solvers;
pub mod verdicts;

pub use error::{Error, Result};
