//! The scalar warp equation of the rotational family in `L^4_1(f, 0)`:
//! `b^2 f^3 f'' = (f'^2 - b^2 f^2)^2 + f'^4`, with `b^2 = a^2 - 4 H0^2`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::constants::ConstantsL4;
use super::rk::{rk_integrate, Rhs, SolverConfig, StopReason, Trajectory};
use crate::ambient::{OdeWarp, WarpingFunction};
use crate::error::{Error, Result};

/// `f''` solved from the warp equation.
pub fn f4_second_derivative(b2: f64, f: f64, fp: f64) -> f64 {
    let d = fp * fp - b2 * f * f;
    (d * d + fp.powi(4)) / (b2 * f.powi(3))
}

/// Relative residual of the warp equation for a given `(f, f', f'')`.
pub fn f4_residual(b2: f64, f: f64, fp: f64, fpp: f64) -> f64 {
    let d = fp * fp - b2 * f * f;
    let lhs = b2 * f.powi(3) * fpp;
    let rhs = d * d + fp.powi(4);
    (lhs - rhs).abs() / (lhs.abs() + rhs.abs()).max(1e-300)
}

/// State `(f, f')`.
#[derive(Clone, Copy, Debug)]
pub struct F4Rhs {
    pub b2: f64,
}

impl Rhs for F4Rhs {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> bool {
        if y[0] == 0.0 {
            return false;
        }
        dy[0] = y[1];
        dy[1] = f4_second_derivative(self.b2, y[0], y[1]);
        dy[1].is_finite()
    }
}

/// `f'^2 - b^2 f^2`, positive exactly where the rotational surface is space-like.
pub fn f4_admissibility(b2: f64, f: f64, fp: f64) -> f64 {
    fp * fp - b2 * f * f
}

/// An integrated warp with its admissible interval and stop reasons.
#[derive(Clone, Debug)]
pub struct WarpSolution {
    pub warp: WarpingFunction,
    pub trajectory: Trajectory,
}

impl WarpSolution {
    pub fn admissible(&self) -> (f64, f64) {
        self.trajectory.admissible()
    }

    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            admissible: self.admissible(),
            forward: self.trajectory.forward.clone(),
            backward: self.trajectory.backward.clone(),
            accepted_steps: self.trajectory.accepted_steps,
        }
    }
}

/// Stop reasons and the admissible interval of an integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub admissible: (f64, f64),
    pub forward: StopReason,
    pub backward: StopReason,
    pub accepted_steps: usize,
}

/// Integrates the warp equation from `f(t0) = f0`, `f'(t0) = f0p`, where
/// `t0` defaults to 0 when it lies in the interval and to its start otherwise.
pub fn solve_f_theorem4(
    k: &ConstantsL4,
    f0: f64,
    f0p: f64,
    config: &SolverConfig,
) -> Result<WarpSolution> {
    let (lo, hi) = config.interval;
    let t0 = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { lo };
    solve_f_theorem4_at(k, t0, f0, f0p, config)
}

pub fn solve_f_theorem4_at(
    k: &ConstantsL4,
    t0: f64,
    f0: f64,
    f0p: f64,
    config: &SolverConfig,
) -> Result<WarpSolution> {
    if !(f0 != 0.0 && f0.is_finite() && f0p.is_finite()) {
        return Err(Error::Precondition(format!(
            "f0 must be finite and non-zero, got {f0}"
        )));
    }
    let margin = f4_admissibility(k.b2, f0, f0p);
    if !(margin > 0.0) {
        return Err(Error::Precondition(format!(
            "inadmissible initial data: f'^2 - b^2 f^2 = {margin} must be positive"
        )));
    }
    let rhs = F4Rhs { b2: k.b2 };
    let b2 = k.b2;
    let monitor = move |_t: f64, y: &[f64]| {
        let m = f4_admissibility(b2, y[0], y[1]);
        if !(m > 0.0) {
            Some(format!("f'^2 - b^2 f^2 = {m:.3e}"))
        } else if (y[0] > 0.0) != (f0 > 0.0) {
            Some("f changed sign".to_string())
        } else {
            None
        }
    };
    let trajectory = rk_integrate(&rhs, t0, &[f0, f0p], config, Some(&monitor))?;
    let warp = WarpingFunction::from_ode(OdeWarp {
        dense: trajectory.dense.clone(),
        rhs: Arc::new(rhs),
        f_index: 0,
    });
    Ok(WarpSolution { warp, trajectory })
}
