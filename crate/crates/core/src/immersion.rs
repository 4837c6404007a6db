//! Surface charts as 2-jets, the induced metric and the adapted frame
//! `e1 ~ T`, `e3 = eta / cosh(theta)`, `e4 ~ H`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientSpace, Backend, PointGeometry};
use crate::error::{Error, Result};
use crate::linalg::{
    orthonormalize_signature, reject_from, AmbientVector, Metric, SmallMatrix2, DEFAULT_ORTHO_TOL,
};

/// Position and first and second partial derivatives at `(u, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub u: f64,
    pub v: f64,
    pub point: AmbientVector,
    pub du: AmbientVector,
    pub dv: AmbientVector,
    pub duu: AmbientVector,
    pub duv: AmbientVector,
    pub dvv: AmbientVector,
}

impl Jet2 {
    pub fn first(&self, a: usize) -> &AmbientVector {
        if a == 0 {
            &self.du
        } else {
            &self.dv
        }
    }

    pub fn second(&self, a: usize, b: usize) -> &AmbientVector {
        match (a, b) {
            (0, 0) => &self.duu,
            (1, 1) => &self.dvv,
            _ => &self.duv,
        }
    }

    /// Largest relative difference between two jets over all six entries.
    pub fn max_relative_difference(&self, other: &Jet2) -> f64 {
        let pairs = [
            (&self.point, &other.point),
            (&self.du, &other.du),
            (&self.dv, &other.dv),
            (&self.duu, &other.duu),
            (&self.duv, &other.duv),
            (&self.dvv, &other.dvv),
        ];
        pairs
            .iter()
            .map(|(a, b)| (*a - *b).coord_norm() / b.coord_norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Parameter rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl ParamDomain {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Result<Self> {
        for (name, (lo, hi)) in [("u", u), ("v", v)] {
            if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
                return Err(Error::Usage(format!("empty {name}-range [{lo}, {hi}]")));
            }
        }
        Ok(Self { u, v })
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u.0 && u <= self.u.1 && v >= self.v.0 && v <= self.v.1
    }
}

/// A surface chart with 2-jets.
pub trait Immersion: Send + Sync {
    fn ambient(&self) -> &AmbientSpace;
    fn domain(&self) -> ParamDomain;
    fn position(&self, u: f64, v: f64) -> Result<AmbientVector>;
    fn jet(&self, u: f64, v: f64) -> Result<Jet2>;
    fn name(&self) -> String;
    /// True when `jet` is exact up to the accuracy of the warp.
    fn analytic_jets(&self) -> bool {
        false
    }
}

/// Step sizes for [`finite_difference_jet`], relative to `1 + |coordinate|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub first: f64,
    pub second: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        // A second-difference step of 1e-5 would amplify round-off to ~1e-6.
        Self {
            first: 1e-5,
            second: 1e-3,
        }
    }
}

/// Central differences with one Richardson level:
/// `D = (4 D(h/2) - D(h)) / 3` for first, second and mixed partials.
pub fn finite_difference_jet<F>(map: F, u: f64, v: f64, steps: FdSteps) -> Result<Jet2>
where
    F: Fn(f64, f64) -> Result<AmbientVector>,
{
    if !(steps.first > 0.0 && steps.second > 0.0) {
        return Err(Error::Usage(
            "finite-difference steps must be positive".into(),
        ));
    }
    let eval = |a: f64, b: f64| -> Result<AmbientVector> {
        let p = map(a, b)?;
        if !p.is_finite() {
            return Err(Error::Domain(format!("map is not finite at ({a}, {b})")));
        }
        Ok(p)
    };
    let p = eval(u, v)?;
    let hu = steps.first * (1.0 + u.abs());
    let hv = steps.first * (1.0 + v.abs());
    let first = |h: f64, along_u: bool| -> Result<AmbientVector> {
        let d = |h: f64| -> Result<AmbientVector> {
            let (a, b) = if along_u {
                (eval(u + h, v)?, eval(u - h, v)?)
            } else {
                (eval(u, v + h)?, eval(u, v - h)?)
            };
            Ok((&a - &b).scale(0.5 / h))
        };
        let (d1, d2) = (d(h)?, d(0.5 * h)?);
        Ok((&d2.scale(4.0) - &d1).scale(1.0 / 3.0))
    };
    let du = first(hu, true)?;
    let dv = first(hv, false)?;

    let su = steps.second * (1.0 + u.abs());
    let sv = steps.second * (1.0 + v.abs());
    let pure = |h: f64, along_u: bool| -> Result<AmbientVector> {
        let d = |h: f64| -> Result<AmbientVector> {
            let (a, b) = if along_u {
                (eval(u + h, v)?, eval(u - h, v)?)
            } else {
                (eval(u, v + h)?, eval(u, v - h)?)
            };
            Ok((&(&a + &b) - &p.scale(2.0)).scale(1.0 / (h * h)))
        };
        let (d1, d2) = (d(h)?, d(0.5 * h)?);
        Ok((&d2.scale(4.0) - &d1).scale(1.0 / 3.0))
    };
    let duu = pure(su, true)?;
    let dvv = pure(sv, false)?;
    let mixed = |k: f64, l: f64| -> Result<AmbientVector> {
        let pp = eval(u + k, v + l)?;
        let pm = eval(u + k, v - l)?;
        let mp = eval(u - k, v + l)?;
        let mm = eval(u - k, v - l)?;
        Ok((&(&pp - &pm) - &(&mp - &mm)).scale(0.25 / (k * l)))
    };
    let m1 = mixed(su, sv)?;
    let m2 = mixed(0.5 * su, 0.5 * sv)?;
    let duv = (&m2.scale(4.0) - &m1).scale(1.0 / 3.0);
    Ok(Jet2 {
        u,
        v,
        point: p,
        du,
        dv,
        duu,
        duv,
        dvv,
    })
}

type MapFn = dyn Fn(f64, f64) -> Result<AmbientVector> + Send + Sync;

/// A user-supplied pointwise map, differentiated numerically.
#[derive(Clone)]
pub struct MapSurface {
    name: String,
    ambient: AmbientSpace,
    domain: ParamDomain,
    map: Arc<MapFn>,
    steps: FdSteps,
}

impl fmt::Debug for MapSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSurface")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl MapSurface {
    pub fn new<F>(
        name: impl Into<String>,
        ambient: AmbientSpace,
        domain: ParamDomain,
        map: F,
    ) -> Self
    where
        F: Fn(f64, f64) -> Result<AmbientVector> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            ambient,
            domain,
            map: Arc::new(map),
            steps: FdSteps::default(),
        }
    }

    pub fn with_steps(mut self, steps: FdSteps) -> Self {
        self.steps = steps;
        self
    }
}

impl Immersion for MapSurface {
    fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }
    fn domain(&self) -> ParamDomain {
        self.domain
    }
    fn position(&self, u: f64, v: f64) -> Result<AmbientVector> {
        let p = (self.map)(u, v)?;
        p.check_dim(self.ambient.coord_dim())?;
        Ok(p)
    }
    fn jet(&self, u: f64, v: f64) -> Result<Jet2> {
        finite_difference_jet(|a, b| self.position(a, b), u, v, self.steps)
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// `g_ab = <phi_a, phi_b>`; errors unless positive definite.
pub fn induced_metric(jet: &Jet2, metric: &Metric) -> Result<SmallMatrix2> {
    let g11 = metric.dot(&jet.du, &jet.du);
    let g12 = metric.dot(&jet.du, &jet.dv);
    let g22 = metric.dot(&jet.dv, &jet.dv);
    let g = SmallMatrix2::new(g11, g12, g12, g22);
    let scale = metric.companion_dot(&jet.du, &jet.du) * metric.companion_dot(&jet.dv, &jet.dv);
    if !(g.is_positive_definite() && g.det() > 1e-14 * scale) {
        return Err(Error::NotSpacelike { u: jet.u, v: jet.v });
    }
    Ok(g)
}

/// Coordinate tangent plane with its inverse metric.
#[derive(Clone, Debug)]
pub struct TangentPlane {
    pub du: AmbientVector,
    pub dv: AmbientVector,
    pub g: SmallMatrix2,
    pub ginv: SmallMatrix2,
}

impl TangentPlane {
    pub fn new(jet: &Jet2, metric: &Metric) -> Result<Self> {
        let g = induced_metric(jet, metric)?;
        let ginv = g
            .inverse()
            .ok_or(Error::NotSpacelike { u: jet.u, v: jet.v })?;
        Ok(Self {
            du: jet.du.clone(),
            dv: jet.dv.clone(),
            g,
            ginv,
        })
    }

    fn basis(&self, a: usize) -> &AmbientVector {
        if a == 0 {
            &self.du
        } else {
            &self.dv
        }
    }

    /// Coordinates `(X^u, X^v)` of the tangential part of `x`.
    pub fn coordinates(&self, x: &AmbientVector, metric: &Metric) -> [f64; 2] {
        let p = [metric.dot(x, &self.du), metric.dot(x, &self.dv)];
        [0, 1].map(|b| self.ginv.get(b, 0) * p[0] + self.ginv.get(b, 1) * p[1])
    }

    pub fn tangent_part(&self, x: &AmbientVector, metric: &Metric) -> AmbientVector {
        let c = self.coordinates(x, metric);
        AmbientVector::combination(&c, &[self.basis(0), self.basis(1)])
    }

    /// Component normal to the surface and tangent to the ambient manifold.
    pub fn normal_part(&self, x: &AmbientVector, geom: &PointGeometry) -> AmbientVector {
        let n = geom.project_to_product(x);
        &n - &self.tangent_part(&n, &geom.metric)
    }
}

/// Mean curvature vector `1/2 g^ab (nabla_{phi_a} phi_b)^normal`, without a frame.
pub fn mean_curvature_coordinate(
    jet: &Jet2,
    geom: &PointGeometry,
    plane: &TangentPlane,
) -> AmbientVector {
    let mut h = AmbientVector::zeros(geom.dim());
    for a in 0..2 {
        for b in 0..2 {
            let w = plane.ginv.get(a, b);
            let d =
                &jet.second(a, b).clone() + &geom.connection_correction(jet.first(a), jet.first(b));
            h = h.axpy(0.5 * w, &plane.normal_part(&d, geom));
        }
    }
    h
}

/// Degeneracy thresholds for frame construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameOptions {
    /// Minimum `|T|` (horizontal-slice exclusion).
    pub tol_t: f64,
    /// Minimum `|H|` for the direction `e4`.
    pub tol_h: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self {
            tol_t: 1e-8,
            tol_h: 1e-8,
        }
    }
}

/// Pins the choices made when completing the normal frame, so that frames
/// at nearby points are built the same way.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameHint {
    pub use_mean_curvature: bool,
    pub completion: Vec<AmbientVector>,
}

/// Relative residual a candidate must keep after projection to be used for
/// completing the normal frame.
const COMPLETION_ACCEPT: f64 = 1e-3;

/// The adapted frame at one point.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub u: f64,
    pub v: f64,
    pub point: AmbientVector,
    pub e1: AmbientVector,
    pub e2: AmbientVector,
    /// Unit time-like normal `eta / cosh(theta)`.
    pub e3: AmbientVector,
    /// Unit normal along the `e3`-orthogonal part of `H`; `None` when that is below `tol_h`.
    pub e4: Option<AmbientVector>,
    /// Space-like completion `e5, ..` (or `e4, ..` when `e4` is absent).
    pub completion: Vec<AmbientVector>,
    pub theta: f64,
    pub sinh_theta: f64,
    pub cosh_theta: f64,
    /// Tangential part `T` of `d/dt`.
    pub t_part: AmbientVector,
    /// Normal part `eta` of `d/dt`.
    pub eta: AmbientVector,
    /// Frame-free mean curvature vector.
    pub mean_curvature: AmbientVector,
    /// `e_i = coeffs[i][0] phi_u + coeffs[i][1] phi_v`.
    pub coeffs: [[f64; 2]; 2],
    pub plane: TangentPlane,
    /// Unit normal of the product inside flat space (embedded backend only).
    pub product_normal: Option<(AmbientVector, f64)>,
}

impl FrameData {
    pub fn tangent(&self, i: usize) -> &AmbientVector {
        if i == 0 {
            &self.e1
        } else {
            &self.e2
        }
    }

    /// Normal frame `e3, e4?, completion..` with self-inner products.
    pub fn normals(&self) -> Vec<(&AmbientVector, f64)> {
        let mut out = vec![(&self.e3, -1.0)];
        if let Some(e4) = &self.e4 {
            out.push((e4, 1.0));
        }
        out.extend(self.completion.iter().map(|v| (v, 1.0)));
        out
    }

    /// Normals other than `e4`.
    pub fn normals_orthogonal_to_e4(&self) -> Vec<(&AmbientVector, f64)> {
        let mut out = vec![(&self.e3, -1.0)];
        out.extend(self.completion.iter().map(|v| (v, 1.0)));
        out
    }

    /// Coefficients of `x` in the orthonormal frame `e1, e2, normals.., N`.
    pub fn coefficients(&self, x: &AmbientVector, metric: &Metric) -> Vec<f64> {
        let mut c = vec![metric.dot(x, &self.e1), metric.dot(x, &self.e2)];
        for (n, s) in self.normals() {
            c.push(s * metric.dot(x, n));
        }
        if let Some((n, s)) = &self.product_normal {
            c.push(s * metric.dot(x, n));
        }
        c
    }

    /// Euclidean length of the frame coefficients: a positive norm that
    /// agrees with `sqrt(<x,x>)` on tangent and space-like normal vectors.
    pub fn norm(&self, x: &AmbientVector, metric: &Metric) -> f64 {
        self.coefficients(x, metric)
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Tangential part expressed in `e1, e2`.
    pub fn tangent_coefficients(&self, x: &AmbientVector, metric: &Metric) -> [f64; 2] {
        [metric.dot(x, &self.e1), metric.dot(x, &self.e2)]
    }

    pub fn hint(&self) -> FrameHint {
        FrameHint {
            use_mean_curvature: self.e4.is_some(),
            completion: self.completion.clone(),
        }
    }
}

/// Builds the adapted frame. `hint` pins the completion of the normal frame
/// to that of a nearby point; without it the coordinate axes are used in
/// index order and the last completion vector is oriented so that
/// `det[e1, e2, e3, .., N] > 0`.
pub fn adapted_frame(
    jet: &Jet2,
    geom: &PointGeometry,
    opts: &FrameOptions,
    hint: Option<&FrameHint>,
) -> Result<FrameData> {
    let metric = &geom.metric;
    let n = geom.dim();
    for v in [&jet.point, &jet.du, &jet.dv, &jet.duu, &jet.duv, &jet.dvv] {
        v.check_dim(n)?;
    }
    let plane = TangentPlane::new(jet, metric)?;
    let dt = geom.time_vector();
    let tc = plane.coordinates(&dt, metric);
    let t_part = AmbientVector::combination(&tc, &[&jet.du, &jet.dv]);
    let eta = &dt - &t_part;
    let sinh_sq = metric.dot(&t_part, &t_part);
    let sinh_theta = sinh_sq.max(0.0).sqrt();
    if !(sinh_theta > opts.tol_t) {
        return Err(Error::HorizontalSlice { norm: sinh_theta });
    }
    let cosh_theta = (1.0 + sinh_theta * sinh_theta).sqrt();

    let c1 = [tc[0] / sinh_theta, tc[1] / sinh_theta];
    let e1 = AmbientVector::combination(&c1, &[&jet.du, &jet.dv]);
    // e2: phi_v (or phi_u if phi_v is along T) made orthogonal to e1.
    let (pick, base) = {
        let pv = metric.dot(&jet.dv, &e1);
        let rv = plane.g.get(1, 1) - pv * pv;
        if rv > 1e-12 * plane.g.get(1, 1) {
            (1usize, pv)
        } else {
            (0usize, metric.dot(&jet.du, &e1))
        }
    };
    let mut c2 = [0.0, 0.0];
    c2[pick] = 1.0;
    c2[0] -= base * c1[0];
    c2[1] -= base * c1[1];
    let e2_raw = AmbientVector::combination(&c2, &[&jet.du, &jet.dv]);
    let len = metric.dot(&e2_raw, &e2_raw).max(0.0).sqrt();
    if !(len > 0.0) {
        return Err(Error::NotSpacelike { u: jet.u, v: jet.v });
    }
    let c2 = [c2[0] / len, c2[1] / len];
    let e2 = AmbientVector::combination(&c2, &[&jet.du, &jet.dv]);

    let e3 = eta.scale(1.0 / cosh_theta);
    let mean_curvature = mean_curvature_coordinate(jet, geom, &plane);
    let product_normal = geom.product_normal().map(|p| (p, geom.c));

    let normal_dim = n - 2 - usize::from(product_normal.is_some());
    let mut frame = vec![e3.clone()];
    let mut signs = vec![-1.0];
    let use_h = match hint {
        Some(h) => h.use_mean_curvature,
        None => {
            let hn = reject_from(&mean_curvature, &frame, &signs, metric);
            metric.norm(&hn) > opts.tol_h
        }
    };
    let mut e4 = None;
    if use_h {
        let hn = reject_from(&mean_curvature, &frame, &signs, metric);
        let q = metric.self_inner(&hn);
        let nrm = metric.norm(&hn);
        if !(nrm > opts.tol_h) || !(q > DEFAULT_ORTHO_TOL * nrm * nrm) {
            return Err(Error::MinimalDirection { norm: nrm });
        }
        let v = hn.scale(1.0 / q.sqrt());
        frame.push(v.clone());
        signs.push(1.0);
        e4 = Some(v);
    }
    // completion candidates
    let candidates: Vec<AmbientVector> = match hint {
        Some(h) => h.completion.clone(),
        None => (0..n).map(|k| AmbientVector::basis(n, k)).collect(),
    };
    let mut completion = Vec::new();
    let mut full: Vec<AmbientVector> = frame.clone();
    let mut full_signs = signs.clone();
    for cand in candidates {
        if frame.len() + completion.len() >= normal_dim {
            break;
        }
        let nc = plane.normal_part(&cand, geom);
        let w = reject_from(&nc, &full, &full_signs, metric);
        let cn = metric.norm(&cand).max(f64::MIN_POSITIVE);
        if metric.norm(&w) <= COMPLETION_ACCEPT * cn && hint.is_none() {
            continue;
        }
        let SignedFrameOne { vector, sign } = normalize_one(&w, metric)?;
        if sign < 0.0 {
            return Err(Error::DegenerateFrame {
                self_inner: metric.self_inner(&w),
            });
        }
        full.push(vector.clone());
        full_signs.push(sign);
        completion.push(vector);
    }
    if frame.len() + completion.len() != normal_dim {
        return Err(Error::DegenerateFrame { self_inner: 0.0 });
    }
    if hint.is_none() && !completion.is_empty() {
        let mut cols: Vec<&AmbientVector> = vec![&e1, &e2];
        cols.extend(frame.iter());
        cols.extend(completion.iter());
        if let Some((pn, _)) = &product_normal {
            cols.push(pn);
        }
        let m = DMatrix::from_fn(n, n, |r, c| cols[c][r]);
        if m.determinant() < 0.0 {
            let last = completion.len() - 1;
            completion[last] = -&completion[last];
        }
    }
    Ok(FrameData {
        u: jet.u,
        v: jet.v,
        point: jet.point.clone(),
        e1,
        e2,
        e3,
        e4,
        completion,
        theta: sinh_theta.asinh(),
        sinh_theta,
        cosh_theta,
        t_part,
        eta,
        mean_curvature,
        coeffs: [c1, c2],
        plane,
        product_normal,
    })
}

struct SignedFrameOne {
    vector: AmbientVector,
    sign: f64,
}

fn normalize_one(w: &AmbientVector, metric: &Metric) -> Result<SignedFrameOne> {
    let f = orthonormalize_signature(std::slice::from_ref(w), metric, DEFAULT_ORTHO_TOL)?;
    Ok(SignedFrameOne {
        vector: f.vectors[0].clone(),
        sign: f.signs[0],
    })
}

/// Convenience: jet, point geometry and frame for an immersion at `(u, v)`.
pub fn frame_at(
    surface: &dyn Immersion,
    u: f64,
    v: f64,
    opts: &FrameOptions,
) -> Result<(Jet2, PointGeometry, FrameData)> {
    let jet = surface.jet(u, v)?;
    let geom = surface.ambient().point(&jet.point)?;
    let frame = adapted_frame(&jet, &geom, opts, None)?;
    Ok((jet, geom, frame))
}

/// Orthonormality defect `max |<f_i, f_j> - s_i delta_ij|` over the full frame.
pub fn frame_defect(frame: &FrameData, metric: &Metric) -> f64 {
    let mut vs: Vec<(&AmbientVector, f64)> = vec![(&frame.e1, 1.0), (&frame.e2, 1.0)];
    vs.extend(frame.normals());
    let mut worst: f64 = 0.0;
    for (i, (a, sa)) in vs.iter().enumerate() {
        for (j, (b, _)) in vs.iter().enumerate() {
            let target = if i == j { *sa } else { 0.0 };
            worst = worst.max((metric.dot(a, b) - target).abs());
        }
    }
    worst
}

/// `|sinh(theta) e1 + cosh(theta) e3 - d/dt|`.
pub fn reassembly_defect(frame: &FrameData, metric: &Metric) -> f64 {
    let dt = AmbientVector::basis(frame.point.dim(), 0);
    let r = &(&frame.e1.scale(frame.sinh_theta) + &frame.e3.scale(frame.cosh_theta)) - &dt;
    metric.norm(&r)
}

pub fn backend_of(surface: &dyn Immersion) -> Backend {
    surface.ambient().backend()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{ClosedForm, WarpingFunction};

    fn v(c: &[f64]) -> AmbientVector {
        AmbientVector::from_slice(c)
    }

    #[test]
    fn fd_affine_and_quadratic() {
        let j = finite_difference_jet(
            |u, w| Ok(v(&[u, w, 0.0, 0.0])),
            0.3,
            -0.2,
            FdSteps::default(),
        )
        .unwrap();
        assert!((&j.du - &v(&[1.0, 0.0, 0.0, 0.0])).coord_norm() < 1e-10);
        assert!(j.duu.coord_norm() < 1e-9);
        let j = finite_difference_jet(
            |u, _| Ok(v(&[0.0, u * u, 0.0, 0.0])),
            0.7,
            0.0,
            FdSteps::default(),
        )
        .unwrap();
        assert!((&j.duu - &v(&[0.0, 2.0, 0.0, 0.0])).coord_norm() < 1e-9);
        assert!(j.duv.coord_norm() < 1e-9);
    }

    #[test]
    fn fd_mixed_partials() {
        let j = finite_difference_jet(
            |u, w| Ok(v(&[(u * w).sin(), u.exp() * w, 0.0])),
            0.4,
            0.9,
            FdSteps::default(),
        )
        .unwrap();
        let (u, w) = (0.4f64, 0.9f64);
        let exact = -u * w * (u * w).sin() + (u * w).cos();
        assert!((j.duv[0] - exact).abs() < 1e-8);
        assert!((j.duv[1] - u.exp()).abs() < 1e-8);
    }

    #[test]
    fn fd_domain_error() {
        let r = finite_difference_jet(
            |u, w| {
                if u > 1.0 {
                    Err(Error::Domain("outside".into()))
                } else {
                    Ok(v(&[u, w, 0.0]))
                }
            },
            1.0,
            0.0,
            FdSteps::default(),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    fn jet_plane(du: &[f64], dv: &[f64]) -> Jet2 {
        Jet2 {
            u: 0.0,
            v: 0.0,
            point: AmbientVector::zeros(du.len()),
            du: v(du),
            dv: v(dv),
            duu: AmbientVector::zeros(du.len()),
            duv: AmbientVector::zeros(du.len()),
            dvv: AmbientVector::zeros(du.len()),
        }
    }

    #[test]
    fn induced_metric_examples() {
        let g = Metric::minkowski(4);
        let m =
            induced_metric(&jet_plane(&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]), &g).unwrap();
        assert_eq!(m, SmallMatrix2::IDENTITY);
        let r = induced_metric(&jet_plane(&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]), &g);
        assert!(matches!(r, Err(Error::NotSpacelike { .. })));
    }

    #[test]
    fn horizontal_slice_is_degenerate() {
        let s = AmbientSpace::minkowski(4).unwrap();
        let jet = jet_plane(&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]);
        let geom = s.point(&jet.point).unwrap();
        let r = adapted_frame(&jet, &geom, &FrameOptions::default(), None);
        assert!(matches!(r, Err(Error::HorizontalSlice { .. })));
    }

    #[test]
    fn tilted_plane_frame() {
        // (0.5 u, u, v, 0) in Minkowski: totally geodesic, T != 0, H = 0
        let s = AmbientSpace::minkowski(4).unwrap();
        let jet = jet_plane(&[0.5, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]);
        let geom = s.point(&jet.point).unwrap();
        let f = adapted_frame(&jet, &geom, &FrameOptions::default(), None).unwrap();
        assert!(f.e4.is_none());
        assert_eq!(f.completion.len(), 1);
        assert!(frame_defect(&f, &geom.metric) < 1e-12);
        assert!(reassembly_defect(&f, &geom.metric) < 1e-12);
        // sinh(theta)^2 = <T,T> with T = -<dt,phi_u>/g_uu phi_u = 0.5/0.75 phi_u
        let expected = (0.5f64 / 0.75f64.sqrt()).abs();
        assert!((f.sinh_theta - expected).abs() < 1e-14);
        assert!(geom.metric.dot(&f.e2, &jet.dv) > 0.0);
    }

    #[test]
    fn frame_in_warped_space_and_hint_reproduces() {
        let warp = WarpingFunction::closed_form(
            ClosedForm::Exp {
                scale: 1.0,
                rate: 1.0,
                offset: 2.0,
            },
            (-3.0, 3.0),
        );
        let s = AmbientSpace::warped_flat(4, warp).unwrap();
        let map = |u: f64, w: f64| {
            Ok(AmbientVector::new(vec![
                0.3 * u + 0.1 * w * w,
                u,
                w,
                0.2 * u * w,
            ]))
        };
        let surf = MapSurface::new(
            "graph",
            s,
            ParamDomain::new((-1.0, 1.0), (-1.0, 1.0)).unwrap(),
            map,
        );
        let (jet, geom, f) = frame_at(&surf, 0.2, 0.4, &FrameOptions::default()).unwrap();
        assert!(frame_defect(&f, &geom.metric) < 1e-9);
        assert!(reassembly_defect(&f, &geom.metric) < 1e-9);
        assert!(f.e4.is_some());
        assert!(geom.metric.dot(&f.eta, &f.e1).abs() < 1e-12);
        assert!(geom.metric.dot(&f.t_part, &f.e3).abs() < 1e-12);
        let again = adapted_frame(&jet, &geom, &FrameOptions::default(), Some(&f.hint())).unwrap();
        assert_eq!(again.e1, f.e1);
        for (a, b) in again.normals().iter().zip(f.normals()) {
            assert!((a.0 - b.0).coord_norm() < 1e-12);
        }
    }
}
