//! Dormand-Prince 5(4) integrator with quintic Hermite dense output.
//!
//! Each accepted step stores the state, its first derivative (the right-hand
//! side) and its second derivative at both ends. The second derivative is the
//! derivative of the right-hand side along the flow, taken with a 5-point
//! stencil, which makes the interpolant C^2 up to that stencil's error and
//! accurate to O(h^6) in value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Dormand-Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Right-hand side `y' = F(t, y)`. Returns `false` when `F` is undefined at
/// the given state (treated as a rejected trial step).
pub trait Rhs: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> bool;
}

impl<F> Rhs for (usize, F)
where
    F: Fn(f64, &[f64], &mut [f64]) -> bool + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> bool {
        (self.1)(t, y, dy)
    }
}

/// Admissibility check on accepted states: `Some(reason)` stops integration.
pub type Monitor<'a> = &'a (dyn Fn(f64, &[f64]) -> Option<String> + Sync);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub initial_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Integration interval; the initial time must lie inside it.
    pub interval: (f64, f64),
    pub monitors: bool,
    /// Constant step size without error control (used for order checks).
    #[serde(default)]
    pub fixed_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            initial_step: 1e-4,
            rtol: 1e-12,
            atol: 1e-12,
            max_step: 1e-2,
            interval: (0.0, 1.0),
            monitors: true,
            fixed_step: None,
            max_steps: 2_000_000,
        }
    }
}

impl SolverConfig {
    pub fn with_interval(mut self, lo: f64, hi: f64) -> Self {
        self.interval = (lo, hi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Usage("solver tolerances must be positive".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Usage(format!(
                "degenerate integration interval [{lo}, {hi}]"
            )));
        }
        if !(self.initial_step > 0.0 && self.max_step > 0.0) {
            return Err(Error::Usage("step sizes must be positive".into()));
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0) {
                return Err(Error::Usage("fixed step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StopReason {
    ReachedEnd { t: f64 },
    Monitor { t: f64, reason: String },
    StepUnderflow { t: f64 },
    MaxSteps { t: f64 },
}

impl StopReason {
    pub fn t(&self) -> f64 {
        match self {
            StopReason::ReachedEnd { t }
            | StopReason::Monitor { t, .. }
            | StopReason::StepUnderflow { t }
            | StopReason::MaxSteps { t } => *t,
        }
    }

    pub fn reached_end(&self) -> bool {
        matches!(self, StopReason::ReachedEnd { .. })
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::ReachedEnd { t } => write!(f, "reached-end at t={t}"),
            StopReason::Monitor { t, reason } => write!(f, "monitor ({reason}) at t={t}"),
            StopReason::StepUnderflow { t } => write!(f, "step-underflow at t={t}"),
            StopReason::MaxSteps { t } => write!(f, "max-steps at t={t}"),
        }
    }
}

/// One interpolation interval `[ta, tb]` with value, first and second
/// derivative at both ends.
#[derive(Clone, Debug)]
struct Segment {
    ta: f64,
    tb: f64,
    ya: Vec<f64>,
    yb: Vec<f64>,
    da: Vec<f64>,
    db: Vec<f64>,
    sa: Vec<f64>,
    sb: Vec<f64>,
}

impl Segment {
    fn eval(&self, t: f64, y: &mut [f64], dy: &mut [f64]) {
        let h = self.tb - self.ta;
        let s = (t - self.ta) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        // quintic Hermite basis and its s-derivative
        let b = [
            1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
            s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
            0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
            10.0 * s3 - 15.0 * s4 + 6.0 * s5,
            -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
            0.5 * (s3 - 2.0 * s4 + s5),
        ];
        let db = [
            -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
            1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
            0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4),
            30.0 * s2 - 60.0 * s3 + 30.0 * s4,
            -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
            0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4),
        ];
        let h2 = h * h;
        for i in 0..y.len() {
            let c = [
                self.ya[i],
                h * self.da[i],
                h2 * self.sa[i],
                self.yb[i],
                h * self.db[i],
                h2 * self.sb[i],
            ];
            y[i] = (0..6).map(|k| b[k] * c[k]).sum();
            dy[i] = (0..6).map(|k| db[k] * c[k]).sum::<f64>() / h;
        }
    }
}

/// Continuous solution on the covered interval `[t_min, t_max]`.
#[derive(Clone, Debug)]
pub struct DenseOutput {
    dim: usize,
    segments: Vec<Segment>,
    t_init: f64,
    y_init: Vec<f64>,
    dy_init: Vec<f64>,
}

impl DenseOutput {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_min(&self) -> f64 {
        self.segments.first().map_or(self.t_init, |s| s.ta)
    }

    pub fn t_max(&self) -> f64 {
        self.segments.last().map_or(self.t_init, |s| s.tb)
    }

    /// Accepted-step mesh, ascending.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.segments.iter().map(|s| s.ta).collect();
        if let Some(last) = self.segments.last() {
            m.push(last.tb);
        }
        m
    }

    /// State and first derivative at `t`.
    pub fn eval(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (lo, hi) = (self.t_min(), self.t_max());
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain(format!(
                "t = {t} outside dense-output interval [{lo}, {hi}]"
            )));
        }
        let mut y = vec![0.0; self.dim];
        let mut dy = vec![0.0; self.dim];
        if self.segments.is_empty() {
            y.copy_from_slice(&self.y_init);
            dy.copy_from_slice(&self.dy_init);
            return Ok((y, dy));
        }
        let idx = self
            .segments
            .partition_point(|s| s.tb < t)
            .min(self.segments.len() - 1);
        self.segments[idx].eval(t, &mut y, &mut dy);
        Ok((y, dy))
    }

    /// Stored state at the accepted-step node nearest to `t`.
    pub fn node_state(&self, t: f64) -> Option<(f64, Vec<f64>)> {
        let idx = self
            .segments
            .partition_point(|s| s.tb < t)
            .min(self.segments.len().checked_sub(1)?);
        let s = &self.segments[idx];
        if (t - s.ta).abs() <= (t - s.tb).abs() {
            Some((s.ta, s.ya.clone()))
        } else {
            Some((s.tb, s.yb.clone()))
        }
    }
}

/// Integration result: dense output plus the stop reason in each direction.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dense: DenseOutput,
    pub forward: StopReason,
    pub backward: StopReason,
    pub accepted_steps: usize,
}

impl Trajectory {
    /// The interval actually covered (every state there passed the monitors).
    pub fn admissible(&self) -> (f64, f64) {
        (self.dense.t_min(), self.dense.t_max())
    }
}

/// Integrate `y' = F(t, y)` from `(t0, y0)` forward to the end of
/// `config.interval` and backward to its start.
pub fn rk_integrate(
    rhs: &dyn Rhs,
    t0: f64,
    y0: &[f64],
    config: &SolverConfig,
    monitor: Option<Monitor<'_>>,
) -> Result<Trajectory> {
    config.validate()?;
    let (lo, hi) = config.interval;
    if !(t0 >= lo && t0 <= hi) {
        return Err(Error::Usage(format!(
            "initial time {t0} outside interval [{lo}, {hi}]"
        )));
    }
    if y0.len() != rhs.dim() {
        return Err(Error::DimensionMismatch {
            expected: rhs.dim(),
            got: y0.len(),
        });
    }
    let mut dy0 = vec![0.0; rhs.dim()];
    if !rhs.eval(t0, y0, &mut dy0) || dy0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition(format!(
            "right-hand side undefined at the initial state (t = {t0})"
        )));
    }
    if config.monitors {
        if let Some(reason) = monitor.and_then(|m| m(t0, y0)) {
            return Err(Error::Precondition(format!(
                "initial state inadmissible: {reason}"
            )));
        }
    }
    let monitor = if config.monitors { monitor } else { None };

    let (fwd, forward, n_f) = integrate_direction(rhs, t0, y0, &dy0, hi, config, monitor);
    let (mut bwd, backward, n_b) = integrate_direction(rhs, t0, y0, &dy0, lo, config, monitor);
    bwd.reverse();
    let mut segments = bwd;
    segments.extend(fwd);
    Ok(Trajectory {
        dense: DenseOutput {
            dim: rhs.dim(),
            segments,
            t_init: t0,
            y_init: y0.to_vec(),
            dy_init: dy0,
        },
        forward,
        backward,
        accepted_steps: n_f + n_b,
    })
}

struct Stepper<'a> {
    rhs: &'a dyn Rhs,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(rhs: &'a dyn Rhs) -> Self {
        let n = rhs.dim();
        Self {
            rhs,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    /// One DP5 step; returns (y_new, error estimate vector) or None if the
    /// right-hand side failed. `k[0]` must hold `F(t, y)`.
    fn step(&mut self, t: f64, y: &[f64], h: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let (head, tail) = self.k.split_at_mut(s);
            let _ = head;
            if !self.rhs.eval(t + C[s] * h, &self.tmp, &mut tail[0])
                || tail[0].iter().any(|x| !x.is_finite())
            {
                return None;
            }
        }
        let mut y_new = vec![0.0; n];
        let mut err = vec![0.0; n];
        for i in 0..n {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for j in 0..7 {
                s5 += B5[j] * self.k[j][i];
                s4 += B4[j] * self.k[j][i];
            }
            y_new[i] = y[i] + h * s5;
            err[i] = h * (s5 - s4);
        }
        Some((y_new, err))
    }
}

/// Derivative of `F` along the flow at `(t, y)`, i.e. `y''`.
fn flow_second_derivative(rhs: &dyn Rhs, t: f64, y: &[f64], dy: &[f64], delta: f64) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    let weights = [
        (-2.0, 1.0 / 12.0),
        (-1.0, -8.0 / 12.0),
        (1.0, 8.0 / 12.0),
        (2.0, -1.0 / 12.0),
    ];
    let mut ys = vec![0.0; n];
    let mut f = vec![0.0; n];
    for (m, w) in weights {
        for i in 0..n {
            ys[i] = y[i] + m * delta * dy[i];
        }
        if !rhs.eval(t + m * delta, &ys, &mut f) {
            // fall back to a one-sided estimate from the base point
            return vec![0.0; n];
        }
        for i in 0..n {
            out[i] += w * f[i] / delta;
        }
    }
    out
}

fn integrate_direction(
    rhs: &dyn Rhs,
    t0: f64,
    y0: &[f64],
    dy0: &[f64],
    t_end: f64,
    config: &SolverConfig,
    monitor: Option<Monitor<'_>>,
) -> (Vec<Segment>, StopReason, usize) {
    let mut segments = Vec::new();
    if t_end == t0 {
        return (segments, StopReason::ReachedEnd { t: t0 }, 0);
    }
    let dir = (t_end - t0).signum();
    let n = y0.len();
    let mut stepper = Stepper::new(rhs);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut dy = dy0.to_vec();
    let mut h = config
        .fixed_step
        .unwrap_or(config.initial_step)
        .min(config.max_step);
    let mut sdd: Option<Vec<f64>> = None;
    let mut accepted = 0usize;
    let mut attempts = 0usize;

    loop {
        if (t_end - t) * dir <= 0.0 {
            return (segments, StopReason::ReachedEnd { t }, accepted);
        }
        if attempts >= config.max_steps {
            return (segments, StopReason::MaxSteps { t }, accepted);
        }
        attempts += 1;
        let min_step = 1e-12 * t.abs().max(1.0);
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < min_step && !last {
            return (segments, StopReason::StepUnderflow { t }, accepted);
        }
        stepper.k[0].copy_from_slice(&dy);
        let trial = stepper.step(t, &y, dir * h);
        let fixed = config.fixed_step.is_some();
        let (y_new, err_norm) = match trial {
            Some((y_new, err)) => {
                let e = (err
                    .iter()
                    .zip(y.iter().zip(&y_new))
                    .map(|(e, (a, b))| {
                        let sc = config.atol + config.rtol * a.abs().max(b.abs());
                        (e / sc).powi(2)
                    })
                    .sum::<f64>()
                    / n as f64)
                    .sqrt();
                (Some(y_new), if e.is_finite() { e } else { f64::INFINITY })
            }
            None => (None, f64::INFINITY),
        };
        let y_new = match y_new {
            Some(v) if fixed || err_norm <= 1.0 => v,
            _ => {
                if fixed && y_new.is_none() {
                    return (segments, StopReason::StepUnderflow { t }, accepted);
                }
                let factor = if err_norm.is_finite() {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.25
                };
                h *= factor;
                continue;
            }
        };
        let t_new = if last { t_end } else { t + dir * h };
        // FSAL: k[6] holds F(t_new, y_new)
        let dy_new = stepper.k[6].clone();
        if let Some(m) = monitor {
            if let Some(reason) = m(t_new, &y_new) {
                return (segments, StopReason::Monitor { t, reason }, accepted);
            }
        }
        let delta = (0.05 * h).min(1e-3);
        let s_old = sdd
            .take()
            .unwrap_or_else(|| flow_second_derivative(rhs, t, &y, &dy, delta));
        let s_new = flow_second_derivative(rhs, t_new, &y_new, &dy_new, delta);
        let seg = if dir > 0.0 {
            Segment {
                ta: t,
                tb: t_new,
                ya: y.clone(),
                yb: y_new.clone(),
                da: dy.clone(),
                db: dy_new.clone(),
                sa: s_old,
                sb: s_new.clone(),
            }
        } else {
            Segment {
                ta: t_new,
                tb: t,
                ya: y_new.clone(),
                yb: y.clone(),
                da: dy_new.clone(),
                db: dy.clone(),
                sa: s_new.clone(),
                sb: s_old,
            }
        };
        segments.push(seg);
        accepted += 1;
        sdd = Some(s_new);
        t = t_new;
        y = y_new;
        dy = dy_new;
        if !fixed {
            let factor = if err_norm > 0.0 {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h * factor).min(config.max_step);
        }
    }
}

/// Global error ratio `err(h) / err(h/2)` at `t = 1` for `y' = y` under
/// fixed steps; close to 32 for a fifth-order method.
pub fn order_ratio(h: f64) -> f64 {
    let rhs = (1, |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[0];
        true
    });
    let err = |h: f64| {
        let cfg = SolverConfig {
            fixed_step: Some(h),
            max_step: h,
            ..SolverConfig::default()
        }
        .with_interval(0.0, 1.0);
        let tr = rk_integrate(&rhs, 0.0, &[1.0], &cfg, None).expect("valid fixed-step run");
        let (y, _) = tr.dense.eval(1.0).expect("t = 1 is covered");
        (y[0] - std::f64::consts::E).abs()
    };
    err(h) / err(h / 2.0)
}
