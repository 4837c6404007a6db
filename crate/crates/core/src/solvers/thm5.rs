//! The coupled system for `(f, y)` of the PMCV family in `L^5_1(f, 0)`.
//!
//! Both equations are linear in `(f'', y'')`. The linear system is extracted
//! mechanically by evaluating the equations at `(f'', y'') = (0,0), (1,0), (0,1)`
//! and solved pointwise.

use std::sync::Arc;

use super::constants::ConstantsL5;
use super::rk::{rk_integrate, DenseOutput, Rhs, SolverConfig, Trajectory};
use super::thm4::SolveSummary;
use crate::ambient::{OdeWarp, WarpingFunction};
use crate::error::{Error, Result};

/// Relative determinant threshold of the pointwise 2x2 system.
pub const DET_TOL: f64 = 1e-10;

/// Jet of the unknowns at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sys5Jet {
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
    pub yp: f64,
    pub ypp: f64,
}

/// The two equations of the system, as printed.
pub fn sys5_equations(k: &ConstantsL5, j: &Sys5Jet) -> [f64; 2] {
    let ConstantsL5 {
        a,
        h0,
        c2,
        c3,
        c4,
        b2,
    } = *k;
    let Sys5Jet {
        f,
        fp,
        fpp,
        yp,
        ypp,
    } = *j;
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let a8 = a4 * a4;
    let c3s = c3 * c3;
    let h2 = h0 * h0;
    let h4 = h2 * h2;
    let fk = |n: i32| f.powi(n);

    let e1 = -a6 * b2 * c3s * fk(7) * yp * ypp
        - a4 * c3s * c4 * fk(3) * fp * fpp
        - 2.0 * a6 * c2 * c3s * h0 * fk(5) * (fpp * yp + fp * ypp)
        - 2.0 * a2 * c4 * fk(2) * fp.powi(3) * (a2 * c3s - 8.0 * c2 * h0 * fp * yp)
        - 4.0 * a4 * b2 * fk(6) * fp * yp * yp * (a2 * c3s - 4.0 * c2 * h0 * fp * yp)
        + a2 * fk(4)
            * fp
            * (-12.0 * a4 * c2 * c3s * h0 * fp * yp
                + 4.0 * (a4 * c3s - 12.0 * a2 * (c3s - 1.0) * h2 - 48.0 * h4) * fp * fp * yp * yp)
        + 2.0 * a4 * b2 * b2 * fk(8) * fp * yp.powi(4)
        + a8 * c3s * c3s * fk(4) * fp
        + 2.0 * c4 * c4 * fp.powi(5);

    let e2 = a4 * c3s * fk(3) * (fp * ypp - fpp * yp) - a2 * b2 * b2 * fk(6) * yp.powi(3)
        + a2 * b2 * fk(4) * yp * (a2 * c3s - 6.0 * c2 * h0 * fp * yp)
        + fk(2)
            * fp
            * (2.0 * a4 * c2 * c3s * h0
                + (a4 * c3s + 12.0 * a2 * (c3s - 1.0) * h2 + 48.0 * h4) * fp * yp)
        - 2.0 * c2 * c4 * h0 * fp.powi(3);
    [e1, e2]
}

/// `E(f'', y'') = e0 + m (f'', y'')` at fixed `(f, f', y')`.
struct PointwiseSystem {
    e0: [f64; 2],
    m: [[f64; 2]; 2],
}

impl PointwiseSystem {
    fn new(k: &ConstantsL5, f: f64, fp: f64, yp: f64) -> Self {
        let base = Sys5Jet {
            f,
            fp,
            fpp: 0.0,
            yp,
            ypp: 0.0,
        };
        let e0 = sys5_equations(k, &base);
        let ef = sys5_equations(k, &Sys5Jet { fpp: 1.0, ..base });
        let ey = sys5_equations(k, &Sys5Jet { ypp: 1.0, ..base });
        Self {
            e0,
            m: [
                [ef[0] - e0[0], ey[0] - e0[0]],
                [ef[1] - e0[1], ey[1] - e0[1]],
            ],
        }
    }

    fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    fn det_scale(&self) -> f64 {
        (self.m[0][0].abs() + self.m[0][1].abs()) * (self.m[1][0].abs() + self.m[1][1].abs())
    }

    /// Per-equation coefficient magnitude.
    fn row_scale(&self) -> [f64; 2] {
        [0, 1].map(|i| self.e0[i].abs() + self.m[i][0].abs() + self.m[i][1].abs())
    }
}

/// Solves for `(f'', y'')`. Returns `None` when the system is numerically singular.
pub fn sys5_second_derivatives(k: &ConstantsL5, f: f64, fp: f64, yp: f64) -> Option<(f64, f64)> {
    let sys = PointwiseSystem::new(k, f, fp, yp);
    let det = sys.det();
    if !(det.abs() > DET_TOL * sys.det_scale()) || !det.is_finite() {
        return None;
    }
    let (e0, m) = (sys.e0, sys.m);
    let fpp = (-e0[0] * m[1][1] + e0[1] * m[0][1]) / det;
    let ypp = (-e0[1] * m[0][0] + e0[0] * m[1][0]) / det;
    Some((fpp, ypp))
}

/// Relative determinant `|det| / scale` of the pointwise system.
pub fn sys5_conditioning(k: &ConstantsL5, f: f64, fp: f64, yp: f64) -> f64 {
    let sys = PointwiseSystem::new(k, f, fp, yp);
    sys.det().abs() / sys.det_scale().max(1e-300)
}

/// Relative residuals of both equations.
pub fn sys5_residuals(k: &ConstantsL5, j: &Sys5Jet) -> [f64; 2] {
    let e = sys5_equations(k, j);
    let s = PointwiseSystem::new(k, j.f, j.fp, j.yp).row_scale();
    let mag = [1.0 + j.fpp.abs().max(j.ypp.abs()); 2];
    [0, 1].map(|i| e[i].abs() / (s[i] * mag[i]).max(1e-300))
}

/// Space-likeness margin `f^2 (x'^2 + y'^2 + z'^2) - 1` of the surface built
/// from `(f, y)`, where `x = 1/(a f)` and `z` is fixed by the plane constraint.
pub fn sys5_spacelike_margin(k: &ConstantsL5, f: f64, fp: f64, yp: f64) -> f64 {
    let a2 = k.a * k.a;
    let xp = -fp / (k.a * f * f);
    let zp = -2.0 * k.h0 * fp / (k.c3 * a2 * f * f) - k.c2 / k.c3 * yp;
    f * f * (xp * xp + yp * yp + zp * zp) - 1.0
}

/// State `(f, f', y, y')`.
#[derive(Clone, Copy, Debug)]
pub struct Sys5Rhs {
    pub constants: ConstantsL5,
}

impl Rhs for Sys5Rhs {
    fn dim(&self) -> usize {
        4
    }
    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> bool {
        if y[0] == 0.0 {
            return false;
        }
        match sys5_second_derivatives(&self.constants, y[0], y[1], y[3]) {
            Some((fpp, ypp)) => {
                dy[0] = y[1];
                dy[1] = fpp;
                dy[2] = y[3];
                dy[3] = ypp;
                fpp.is_finite() && ypp.is_finite()
            }
            None => false,
        }
    }
}

/// Initial data `f(t0), f'(t0), y(t0), y'(t0)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Sys5Initial {
    pub f0: f64,
    pub f0p: f64,
    pub y0: f64,
    pub y0p: f64,
}

#[derive(Clone, Debug)]
pub struct SystemSolution {
    pub warp: WarpingFunction,
    pub constants: ConstantsL5,
    pub trajectory: Trajectory,
}

impl SystemSolution {
    pub fn dense(&self) -> &DenseOutput {
        &self.trajectory.dense
    }

    pub fn admissible(&self) -> (f64, f64) {
        self.trajectory.admissible()
    }

    /// `(y, y', y'')` at `t`.
    pub fn y(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (s, _) = self.trajectory.dense.eval(t)?;
        let (_, ypp) = sys5_second_derivatives(&self.constants, s[0], s[1], s[3])
            .ok_or_else(|| Error::Domain(format!("singular second-order system at t = {t}")))?;
        Ok((s[2], s[3], ypp))
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

/// Threshold on the relative determinant below which integration stops.
pub const SINGULAR_STOP: f64 = 1e-8;

/// Integrates the coupled system. The monitors stop integration where the
/// surface stops being space-like, where `f` reaches 0, and where the
/// pointwise system becomes singular.
pub fn solve_system_theorem5(
    k: &ConstantsL5,
    init: Sys5Initial,
    config: &SolverConfig,
) -> Result<SystemSolution> {
    let (lo, hi) = config.interval;
    let t0 = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { lo };
    let Sys5Initial { f0, f0p, y0, y0p } = init;
    if !(f0 > 0.0) || ![f0p, y0, y0p].iter().all(|x| x.is_finite()) {
        return Err(Error::Precondition(format!(
            "initial data must be finite with f0 > 0, got f0 = {f0}"
        )));
    }
    let cond = sys5_conditioning(k, f0, f0p, y0p);
    if !(cond > DET_TOL) {
        return Err(Error::Precondition(format!(
            "second-order system singular at the initial data (relative det {cond:.3e})"
        )));
    }
    let margin = sys5_spacelike_margin(k, f0, f0p, y0p);
    if !(margin > 0.0) {
        return Err(Error::Precondition(format!(
            "initial data not space-like: margin {margin:.3e}"
        )));
    }
    let kk = *k;
    let monitor = move |_t: f64, s: &[f64]| {
        if !(s[0] > 0.0) {
            return Some("f reached 0".to_string());
        }
        let m = sys5_spacelike_margin(&kk, s[0], s[1], s[3]);
        if !(m > 0.0) {
            return Some(format!("space-likeness margin {m:.3e}"));
        }
        let c = sys5_conditioning(&kk, s[0], s[1], s[3]);
        if !(c > SINGULAR_STOP) {
            return Some(format!("near-singular system (relative det {c:.3e})"));
        }
        None
    };
    let rhs = Sys5Rhs { constants: *k };
    let trajectory = rk_integrate(&rhs, t0, &[f0, f0p, y0, y0p], config, Some(&monitor))?;
    let warp = WarpingFunction::from_ode(OdeWarp {
        dense: trajectory.dense.clone(),
        rhs: Arc::new(rhs),
        f_index: 0,
    });
    Ok(SystemSolution {
        warp,
        constants: *k,
        trajectory,
    })
}

/// Fixed admissible initial data found by a coarse search over `(f'(0), y'(0))`
/// with `f(0) = 1`, `y(0) = 0` for `a = 2`, `H0 = 1/2`, `c3 = 0.6`: the
/// trajectory stays space-like with margin above 0.2 on `[-0.5, 0.5]`.
pub fn reference_fixture() -> (ConstantsL5, Sys5Initial) {
    let k = ConstantsL5::from_c3(2.0, 0.5, 0.6).expect("reference constants are valid");
    (
        k,
        Sys5Initial {
            f0: 1.0,
            f0p: 0.5,
            y0: 0.0,
            y0p: 1.0,
        },
    )
}

/// One candidate of [`search_initial_data`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcCandidate {
    pub f0p: f64,
    pub y0p: f64,
    pub admissible: (f64, f64),
    pub min_margin: f64,
}

/// Coarse grid search for initial data with `f(0) = 1`, `y(0) = 0`:
/// integrates each admissible grid point over `config.interval` and ranks by
/// covered length, then by the smallest space-likeness margin seen.
pub fn search_initial_data(
    k: &ConstantsL5,
    f0p: &[f64],
    y0p: &[f64],
    config: &SolverConfig,
) -> Vec<IcCandidate> {
    use rayon::prelude::*;
    let pairs: Vec<(f64, f64)> = f0p
        .iter()
        .flat_map(|&a| y0p.iter().map(move |&b| (a, b)))
        .collect();
    let mut out: Vec<IcCandidate> = pairs
        .par_iter()
        .filter_map(|&(fp, yp)| {
            let init = Sys5Initial {
                f0: 1.0,
                f0p: fp,
                y0: 0.0,
                y0p: yp,
            };
            let sol = solve_system_theorem5(k, init, config).ok()?;
            let mesh = sol.dense().mesh();
            let mut min_margin = f64::INFINITY;
            for t in mesh {
                let (s, _) = sol.dense().eval(t).ok()?;
                min_margin = min_margin.min(sys5_spacelike_margin(k, s[0], s[1], s[3]));
            }
            Some(IcCandidate {
                f0p: fp,
                y0p: yp,
                admissible: sol.admissible(),
                min_margin,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        let la = a.admissible.1 - a.admissible.0;
        let lb = b.admissible.1 - b.admissible.0;
        lb.total_cmp(&la)
            .then(b.min_margin.total_cmp(&a.min_margin))
    });
    out
}
