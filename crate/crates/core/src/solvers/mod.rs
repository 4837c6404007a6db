//! ODE machinery: the Runge-Kutta integrator and the two warp equations.

pub mod constants;
pub mod rk;
pub mod thm4;
pub mod thm5;

pub use constants::{
    validate_constants, ConstantsL4, ConstantsL5, ConstantsProduct, RawConstants,
    ValidatedConstants,
};
pub use rk::{rk_integrate, DenseOutput, Rhs, SolverConfig, StopReason, Trajectory};
pub use thm4::{solve_f_theorem4, SolveSummary, WarpSolution};
pub use thm5::{solve_system_theorem5, Sys5Initial, SystemSolution};
