//! Lorentzian warped products `-dt^2 + f(t)^2 g_c`: metric, Levi-Civita
//! connection and curvature.
//!
//! Two backends are supported. `WarpedFlat` uses coordinates
//! `(t, x_1, .., x_{n-1})` on `I x_f R^{n-1}`. `ProductSpaceForm` realizes
//! `E^1_1 x S^{n-1}` (c = 1) or `E^1_1 x H^{n-1}` (c = -1) inside flat
//! `(n+1)`-space with metric `-dx_1^2 + c dx_2^2 + sum dx_i^2`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{AmbientVector, Metric};
use crate::solvers::rk::{DenseOutput, Rhs};

/// Relative tolerance for the fiber constraint `<p, p> = c` of the embedded backend.
pub const FIBER_TOL: f64 = 1e-10;

/// Default number of samples for [`is_constant_curvature`].
pub const CURVATURE_SAMPLES: usize = 257;

/// Warping functions given by a formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClosedForm {
    Constant {
        value: f64,
    },
    /// `scale * exp(rate * t) + offset`
    Exp {
        scale: f64,
        rate: f64,
        offset: f64,
    },
    /// `scale * cosh(rate * t)`
    Cosh {
        scale: f64,
        rate: f64,
    },
    /// Coefficients in ascending order.
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl ClosedForm {
    pub fn exp() -> Self {
        ClosedForm::Exp {
            scale: 1.0,
            rate: 1.0,
            offset: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match self {
            ClosedForm::Constant { value } => (*value, 0.0, 0.0),
            ClosedForm::Exp {
                scale,
                rate,
                offset,
            } => {
                let e = scale * (rate * t).exp();
                (e + offset, rate * e, rate * rate * e)
            }
            ClosedForm::Cosh { scale, rate } => {
                let (s, c) = ((rate * t).sinh(), (rate * t).cosh());
                (scale * c, scale * rate * s, scale * rate * rate * c)
            }
            ClosedForm::Polynomial { coefficients } => {
                // Horner for p, p', p'' simultaneously
                let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
                for &a in coefficients.iter().rev() {
                    ddp = ddp * t + 2.0 * dp;
                    dp = dp * t + p;
                    p = p * t + a;
                }
                (p, dp, ddp)
            }
        }
    }
}

/// Warp obtained from an ODE solution: `f` and `f'` are read from the dense
/// output and `f''` from the right-hand side at the interpolated state.
#[derive(Clone)]
pub struct OdeWarp {
    pub dense: DenseOutput,
    pub rhs: Arc<dyn Rhs + Send>,
    /// Index of `f` in the state; `f'` is expected at `f_index + 1`.
    pub f_index: usize,
}

impl fmt::Debug for OdeWarp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeWarp")
            .field("interval", &(self.dense.t_min(), self.dense.t_max()))
            .field("f_index", &self.f_index)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum WarpSource {
    ClosedForm(ClosedForm),
    Ode(OdeWarp),
}

/// Pointwise access to `(f, f', f'')` on a validity interval.
#[derive(Clone, Debug)]
pub struct WarpingFunction {
    source: WarpSource,
    interval: (f64, f64),
}

impl WarpingFunction {
    pub fn closed_form(form: ClosedForm, interval: (f64, f64)) -> Self {
        Self {
            source: WarpSource::ClosedForm(form),
            interval,
        }
    }

    /// `f = 1` on the whole line.
    pub fn unit() -> Self {
        Self::closed_form(
            ClosedForm::Constant { value: 1.0 },
            (f64::NEG_INFINITY, f64::INFINITY),
        )
    }

    pub fn exp() -> Self {
        Self::closed_form(ClosedForm::exp(), (f64::NEG_INFINITY, f64::INFINITY))
    }

    pub fn from_ode(warp: OdeWarp) -> Self {
        let interval = (warp.dense.t_min(), warp.dense.t_max());
        Self {
            source: WarpSource::Ode(warp),
            interval,
        }
    }

    pub fn source(&self) -> &WarpSource {
        &self.source
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn is_ode(&self) -> bool {
        matches!(self.source, WarpSource::Ode(_))
    }

    /// True for the constant function 1.
    pub fn is_unit(&self) -> bool {
        matches!(self.source, WarpSource::ClosedForm(ClosedForm::Constant { value }) if value == 1.0)
    }

    /// `(f(t), f'(t), f''(t))`. Errors outside the validity interval and when
    /// `f` vanishes.
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.interval;
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain(format!(
                "t = {t} outside warp interval [{lo}, {hi}]"
            )));
        }
        let v = match &self.source {
            WarpSource::ClosedForm(c) => c.eval(t),
            WarpSource::Ode(w) => {
                let (y, _) = w.dense.eval(t)?;
                let mut dy = vec![0.0; y.len()];
                if !w.rhs.eval(t, &y, &mut dy) {
                    return Err(Error::Domain(format!(
                        "warp right-hand side undefined at t = {t}"
                    )));
                }
                (y[w.f_index], y[w.f_index + 1], dy[w.f_index + 1])
            }
        };
        if !(v.0.abs() > 1e-300) || !v.0.is_finite() {
            return Err(Error::SingularWarp { t, value: v.0 });
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    WarpedFlat,
    ProductSpaceForm,
}

/// An ambient Robertson-Walker space.
#[derive(Clone, Debug)]
pub struct AmbientSpace {
    backend: Backend,
    n: usize,
    c: f64,
    warp: WarpingFunction,
}

/// `X = x0 * d/dt + bar`, with `bar` having zero time component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComovingSplit {
    pub x0: f64,
    pub bar: AmbientVector,
}

/// Christoffel symbols `Gamma^k_{ij}` at a point, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

impl AmbientSpace {
    /// `I x_f R^{n-1}` with flat fiber.
    pub fn warped_flat(n: usize, warp: WarpingFunction) -> Result<Self> {
        if n < 3 {
            return Err(Error::Usage(format!(
                "ambient dimension must be at least 3, got {n}"
            )));
        }
        Ok(Self {
            backend: Backend::WarpedFlat,
            n,
            c: 0.0,
            warp,
        })
    }

    /// `E^1_1 x S^{n-1}` (c = 1) or `E^1_1 x H^{n-1}` (c = -1), embedded in flat `(n+1)`-space.
    pub fn product_space_form(n: usize, c: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Usage(format!(
                "ambient dimension must be at least 3, got {n}"
            )));
        }
        if c != 1.0 && c != -1.0 {
            return Err(Error::Usage(format!(
                "product backend needs c = +1 or -1, got {c}"
            )));
        }
        Ok(Self {
            backend: Backend::ProductSpaceForm,
            n,
            c,
            warp: WarpingFunction::unit(),
        })
    }

    /// Minkowski space `L^n_1(1, 0)`.
    pub fn minkowski(n: usize) -> Result<Self> {
        Self::warped_flat(n, WarpingFunction::unit())
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Manifold dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of coordinates of points and vectors.
    pub fn coord_dim(&self) -> usize {
        match self.backend {
            Backend::WarpedFlat => self.n,
            Backend::ProductSpaceForm => self.n + 1,
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn warp(&self) -> &WarpingFunction {
        &self.warp
    }

    /// The unit time-like field `d/dt` (first coordinate vector in both backends).
    pub fn time_vector(&self) -> AmbientVector {
        AmbientVector::basis(self.coord_dim(), 0)
    }

    /// Geometry at a point: metric, warp values and curvature scalars.
    pub fn point(&self, p: &AmbientVector) -> Result<PointGeometry> {
        p.check_dim(self.coord_dim())?;
        if !p.is_finite() {
            return Err(Error::Domain("non-finite point".into()));
        }
        let t = p[0];
        match self.backend {
            Backend::WarpedFlat => {
                let (f, fp, fpp) = self.warp.eval(t)?;
                let mut d = vec![f * f; self.n];
                d[0] = -1.0;
                Ok(PointGeometry {
                    backend: self.backend,
                    point: p.clone(),
                    c: 0.0,
                    f,
                    fp,
                    fpp,
                    metric: Metric::diagonal(&d),
                })
            }
            Backend::ProductSpaceForm => {
                let mut d = vec![1.0; self.n + 1];
                d[0] = -1.0;
                d[1] = self.c;
                let metric = Metric::diagonal(&d);
                let fiber = fiber_part(p);
                let q = metric.self_inner(&fiber);
                let scale = metric.companion_dot(&fiber, &fiber).max(1.0);
                if (q - self.c).abs() > FIBER_TOL * scale {
                    return Err(Error::Domain(format!(
                        "point off the space-form locus: <p, p> = {q} (expected {})",
                        self.c
                    )));
                }
                Ok(PointGeometry {
                    backend: self.backend,
                    point: p.clone(),
                    c: self.c,
                    f: 1.0,
                    fp: 0.0,
                    fpp: 0.0,
                    metric,
                })
            }
        }
    }

    /// Metric matrix at `p`.
    pub fn metric_at(&self, p: &AmbientVector) -> Result<Metric> {
        Ok(self.point(p)?.metric)
    }
}

fn fiber_part(p: &AmbientVector) -> AmbientVector {
    let mut q = p.clone();
    q[0] = 0.0;
    q
}

/// Ambient data frozen at one point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub backend: Backend,
    pub point: AmbientVector,
    pub c: f64,
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
    pub metric: Metric,
}

impl PointGeometry {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn time_vector(&self) -> AmbientVector {
        AmbientVector::basis(self.dim(), 0)
    }

    /// `f''/f` and `(f'^2 + c)/f^2`.
    pub fn curvature_scalars(&self) -> RwCurvature {
        RwCurvature::from_warp(self.f, self.fp, self.fpp, self.c)
    }

    pub fn comoving_split(&self, x: &AmbientVector) -> ComovingSplit {
        comoving_split(x)
    }

    /// The unit normal of the product `E^1_1 x R^{n-1}(c)` in flat space,
    /// with `<N, N> = c`. `None` for the warped backend.
    pub fn product_normal(&self) -> Option<AmbientVector> {
        match self.backend {
            Backend::WarpedFlat => None,
            Backend::ProductSpaceForm => Some(fiber_part(&self.point)),
        }
    }

    /// Christoffel symbols of the warped backend:
    /// `Gamma^t_{ij} = f f' delta_ij`, `Gamma^i_{tj} = Gamma^i_{jt} = (f'/f) delta_ij`.
    pub fn christoffel(&self) -> Result<Christoffel> {
        if self.backend != Backend::WarpedFlat {
            return Err(Error::Inapplicable(
                "Christoffel symbols are only tabulated for the warped backend".into(),
            ));
        }
        let n = self.dim();
        let mut data = vec![0.0; n * n * n];
        let idx = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
        let ffp = self.f * self.fp;
        let h = self.fp / self.f;
        for i in 1..n {
            data[idx(0, i, i)] = ffp;
            data[idx(i, 0, i)] = h;
            data[idx(i, i, 0)] = h;
        }
        Ok(Christoffel { n, data })
    }

    /// The algebraic part of `nabla_X Y` beyond the coordinate derivative.
    pub fn connection_correction(&self, x: &AmbientVector, y: &AmbientVector) -> AmbientVector {
        let n = self.dim();
        match self.backend {
            Backend::WarpedFlat => {
                let mut out = AmbientVector::zeros(n);
                let h = self.fp / self.f;
                let ffp = self.f * self.fp;
                let mut s = 0.0;
                for i in 1..n {
                    s += x[i] * y[i];
                    out[i] = h * (x[0] * y[i] + x[i] * y[0]);
                }
                out[0] = ffp * s;
                out
            }
            Backend::ProductSpaceForm => {
                let normal = fiber_part(&self.point);
                let xs = fiber_part(x);
                let ys = fiber_part(y);
                normal.scale(self.c * self.metric.dot(&xs, &ys))
            }
        }
    }

    /// `nabla_X Y` from the coordinate derivative `dy = dY[X]`.
    pub fn covariant_derivative(
        &self,
        x: &AmbientVector,
        y: &AmbientVector,
        dy: &AmbientVector,
    ) -> Result<AmbientVector> {
        let n = self.dim();
        for v in [x, y, dy] {
            v.check_dim(n)?;
        }
        if !dy.is_finite() {
            return Err(Error::Usage("missing or non-finite derivative data".into()));
        }
        Ok(dy + &self.connection_correction(x, y))
    }

    /// Curvature tensor `R(X, Y) Z`.
    pub fn curvature(
        &self,
        x: &AmbientVector,
        y: &AmbientVector,
        z: &AmbientVector,
    ) -> AmbientVector {
        self.curvature_scalars().apply(&self.metric, x, y, z)
    }

    /// Removes the component along the product normal (embedded backend only).
    pub fn project_to_product(&self, v: &AmbientVector) -> AmbientVector {
        match self.backend {
            Backend::WarpedFlat => v.clone(),
            Backend::ProductSpaceForm => {
                let normal = fiber_part(&self.point);
                let k = self.c * self.metric.dot(v, &normal);
                v.axpy(-k, &normal)
            }
        }
    }
}

/// `X0 = -<d/dt, X>` and `X - X0 d/dt`. Both backends put `d/dt` first with
/// `g_00 = -1` and no cross terms.
pub fn comoving_split(x: &AmbientVector) -> ComovingSplit {
    let mut bar = x.clone();
    let x0 = x[0];
    bar[0] = 0.0;
    ComovingSplit { x0, bar }
}

/// The two scalars that determine the Robertson-Walker curvature tensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwCurvature {
    /// `f''/f`
    pub ddf_over_f: f64,
    /// `(f'^2 + c)/f^2`
    pub fiber: f64,
}

impl RwCurvature {
    pub fn from_warp(f: f64, fp: f64, fpp: f64, c: f64) -> Self {
        Self {
            ddf_over_f: fpp / f,
            fiber: (fp * fp + c) / (f * f),
        }
    }

    /// `f''/f - (f'^2 + c)/f^2`; zero exactly for constant curvature.
    pub fn defect(&self) -> f64 {
        self.ddf_over_f - self.fiber
    }

    /// `R(X,Y)Z` for vectors whose first component is along `d/dt`:
    ///
    /// `R(X,Y)Z = X0 R(dt,Ybar)Z - Y0 R(dt,Xbar)Z + R(Xbar,Ybar)Zbar` with
    /// `R(dt,Ybar)Z = (f''/f)(Z0 Ybar + <Ybar,Zbar> dt)` and
    /// `R(Xbar,Ybar)Zbar = K(<Ybar,Zbar> Xbar - <Xbar,Zbar> Ybar)`.
    pub fn apply(
        &self,
        metric: &Metric,
        x: &AmbientVector,
        y: &AmbientVector,
        z: &AmbientVector,
    ) -> AmbientVector {
        let xs = comoving_split(x);
        let ys = comoving_split(y);
        let zs = comoving_split(z);
        let yz = metric.dot(&ys.bar, &zs.bar);
        let xz = metric.dot(&xs.bar, &zs.bar);
        let k = self.fiber;
        let q = self.ddf_over_f;
        // spatial part
        let mut out = xs.bar.scale(k * yz - ys.x0 * q * zs.x0);
        out = out.axpy(-k * xz + xs.x0 * q * zs.x0, &ys.bar);
        // time part
        out[0] += q * (xs.x0 * yz - ys.x0 * xz);
        out
    }
}

/// Remark-style constant-curvature test: samples `f''/f - (f'^2+c)/f^2` on
/// `samples` uniform points of `interval` and returns `(max dev < tol, max dev)`.
pub fn is_constant_curvature(
    warp: &WarpingFunction,
    c: f64,
    interval: (f64, f64),
    tol: f64,
    samples: usize,
) -> Result<(bool, f64)> {
    let (lo, hi) = interval;
    if !(hi >= lo) || samples == 0 {
        return Err(Error::Usage("empty sampling interval".into()));
    }
    let mut dev: f64 = 0.0;
    for k in 0..samples {
        let t = if samples == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (samples - 1) as f64
        };
        let (f, fp, fpp) = warp.eval(t)?;
        dev = dev.max(RwCurvature::from_warp(f, fp, fpp, c).defect().abs());
    }
    Ok((dev < tol, dev))
}
