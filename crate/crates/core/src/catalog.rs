//! Closed-form surfaces with analytic 2-jets, fixtures, and the
//! non-existence scans.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientSpace, ClosedForm, WarpingFunction};
use crate::error::{Error, Result};
use crate::immersion::{Immersion, Jet2, MapSurface, ParamDomain};
use crate::linalg::AmbientVector;
use crate::solvers::{ConstantsL4, ConstantsL5, ConstantsProduct, SystemSolution};

/// Fraction of the admissible interval dropped at each end for stencil headroom.
pub const DOMAIN_SHRINK: f64 = 0.05;

/// `[lo, hi]` shrunk by [`DOMAIN_SHRINK`] of its length at each end.
pub fn shrink(interval: (f64, f64)) -> (f64, f64) {
    let w = interval.1 - interval.0;
    (
        interval.0 + DOMAIN_SHRINK * w,
        interval.1 - DOMAIN_SHRINK * w,
    )
}

fn check_inside(domain: &ParamDomain, interval: (f64, f64)) -> Result<()> {
    if domain.u.0 < interval.0 || domain.u.1 > interval.1 {
        return Err(Error::Domain(format!(
            "u-domain [{}, {}] not inside the warp interval [{}, {}]",
            domain.u.0, domain.u.1, interval.0, interval.1
        )));
    }
    Ok(())
}

fn v3(c: [f64; 4]) -> AmbientVector {
    AmbientVector::from_slice(&c)
}

/// Rotational surface in `L^4_1(f, 0)`:
/// `(u, sin(av)/(a f), cos(av)/(a f), 2 H0/(a^2 c2 f))`.
#[derive(Clone, Debug)]
pub struct RotationalL4 {
    pub constants: ConstantsL4,
    ambient: AmbientSpace,
    domain: ParamDomain,
}

impl RotationalL4 {
    /// `domain` defaults to the shrunk warp interval times one `v`-period.
    pub fn new(
        constants: ConstantsL4,
        warp: WarpingFunction,
        domain: Option<ParamDomain>,
    ) -> Result<Self> {
        let interval = warp.interval();
        let domain = match domain {
            Some(d) => d,
            None => {
                if !(interval.0.is_finite() && interval.1.is_finite()) {
                    return Err(Error::Usage(
                        "an unbounded warp needs an explicit u-domain".into(),
                    ));
                }
                ParamDomain::new(shrink(interval), (0.0, 2.0 * PI / constants.a))?
            }
        };
        check_inside(&domain, interval)?;
        Ok(Self {
            constants,
            ambient: AmbientSpace::warped_flat(4, warp)?,
            domain,
        })
    }

    fn height(&self) -> f64 {
        let k = &self.constants;
        2.0 * k.h0 / (k.a * k.a * k.c2)
    }
}

impl Immersion for RotationalL4 {
    fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }
    fn domain(&self) -> ParamDomain {
        self.domain
    }
    fn position(&self, u: f64, v: f64) -> Result<AmbientVector> {
        Ok(self.jet(u, v)?.point)
    }
    fn jet(&self, u: f64, v: f64) -> Result<Jet2> {
        let a = self.constants.a;
        let (f, f1, f2) = self.ambient.warp().eval(u)?;
        let k = self.height();
        let r = 1.0 / (a * f);
        let r1 = -f1 / (a * f * f);
        let r2 = -f2 / (a * f * f) + 2.0 * f1 * f1 / (a * f * f * f);
        let w = k / f;
        let w1 = -k * f1 / (f * f);
        let w2 = -k * f2 / (f * f) + 2.0 * k * f1 * f1 / (f * f * f);
        let (s, c) = (a * v).sin_cos();
        Ok(Jet2 {
            u,
            v,
            point: v3([u, r * s, r * c, w]),
            du: v3([1.0, r1 * s, r1 * c, w1]),
            dv: v3([0.0, a * r * c, -a * r * s, 0.0]),
            duu: v3([0.0, r2 * s, r2 * c, w2]),
            duv: v3([0.0, a * r1 * c, -a * r1 * s, 0.0]),
            dvv: v3([0.0, -a * a * r * s, -a * a * r * c, 0.0]),
        })
    }
    fn name(&self) -> String {
        "rotational-l4".into()
    }
    fn analytic_jets(&self) -> bool {
        true
    }
}

/// Surface in `L^5_1(f, 0)`:
/// `(u, sin(av)/(a f), cos(av)/(a f), y, z)` with `z` solved from
/// `c2 y + c3 z = 2 H0 / (a^2 f)`.
#[derive(Clone, Debug)]
pub struct SurfaceL5 {
    pub constants: ConstantsL5,
    solution: SystemSolution,
    ambient: AmbientSpace,
    domain: ParamDomain,
}

impl SurfaceL5 {
    pub fn new(solution: SystemSolution, domain: Option<ParamDomain>) -> Result<Self> {
        let constants = solution.constants;
        if constants.c3.abs() < 1e-12 {
            return Err(Error::Constraint {
                equation: "c3 != 0",
                residual: constants.c3.abs(),
            });
        }
        let interval = solution.warp.interval();
        let domain = match domain {
            Some(d) => d,
            None => ParamDomain::new(shrink(interval), (0.0, 2.0 * PI / constants.a))?,
        };
        check_inside(&domain, interval)?;
        let ambient = AmbientSpace::warped_flat(5, solution.warp.clone())?;
        Ok(Self {
            constants,
            solution,
            ambient,
            domain,
        })
    }

    pub fn solution(&self) -> &SystemSolution {
        &self.solution
    }

    /// `|c2 y + c3 z - (2 H0 / a) x|` with `x = 1/(a f)`, at `(u, v)`.
    pub fn plane_constraint_residual(&self, u: f64, v: f64) -> Result<f64> {
        let p = self.position(u, v)?;
        let k = &self.constants;
        let x = (p[1] * p[1] + p[2] * p[2]).sqrt();
        Ok((k.c2 * p[3] + k.c3 * p[4] - 2.0 * k.h0 / k.a * x).abs())
    }
}

impl Immersion for SurfaceL5 {
    fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }
    fn domain(&self) -> ParamDomain {
        self.domain
    }
    fn position(&self, u: f64, v: f64) -> Result<AmbientVector> {
        Ok(self.jet(u, v)?.point)
    }
    fn jet(&self, u: f64, v: f64) -> Result<Jet2> {
        let ConstantsL5 { a, h0, c2, c3, .. } = self.constants;
        let (f, f1, f2) = self.ambient.warp().eval(u)?;
        let (y, y1, y2) = self.solution.y(u)?;
        let k = 2.0 * h0 / (c3 * a * a);
        let m = c2 / c3;
        let r = 1.0 / (a * f);
        let r1 = -f1 / (a * f * f);
        let r2 = -f2 / (a * f * f) + 2.0 * f1 * f1 / (a * f * f * f);
        let z = k / f - m * y;
        let z1 = -k * f1 / (f * f) - m * y1;
        let z2 = -k * f2 / (f * f) + 2.0 * k * f1 * f1 / (f * f * f) - m * y2;
        let (s, c) = (a * v).sin_cos();
        let vec = |x: [f64; 5]| AmbientVector::from_slice(&x);
        Ok(Jet2 {
            u,
            v,
            point: vec([u, r * s, r * c, y, z]),
            du: vec([1.0, r1 * s, r1 * c, y1, z1]),
            dv: vec([0.0, a * r * c, -a * r * s, 0.0, 0.0]),
            duu: vec([0.0, r2 * s, r2 * c, y2, z2]),
            duv: vec([0.0, a * r1 * c, -a * r1 * s, 0.0, 0.0]),
            dvv: vec([0.0, -a * a * r * s, -a * a * r * c, 0.0, 0.0]),
        })
    }
    fn name(&self) -> String {
        "surface-l5".into()
    }
    fn analytic_jets(&self) -> bool {
        true
    }
}

/// Surface in `E^1_1 x S^4`, embedded in flat 6-space:
/// `(-b1 u, b0 cos(w u), b0 sin(w u), b2, b3 sin(v/b3), b3 cos(v/b3))`
/// with `b0 = sqrt(1 - b2^2 - b3^2)` and `w = sqrt(1 + b1^2)/b0`, so that
/// `phi_u` has unit length and the angle is `asinh(b1)` for every member
/// of the family, parallel or not.
#[derive(Clone, Debug)]
pub struct ProductE11S4 {
    pub constants: ConstantsProduct,
    ambient: AmbientSpace,
    domain: ParamDomain,
}

impl ProductE11S4 {
    pub fn new(constants: ConstantsProduct, domain: Option<ParamDomain>) -> Result<Self> {
        let domain = match domain {
            Some(d) => d,
            None => ParamDomain::new((-1.0, 1.0), (0.0, 2.0 * PI * constants.b3.abs()))?,
        };
        Ok(Self {
            constants,
            ambient: AmbientSpace::product_space_form(5, 1.0)?,
            domain,
        })
    }

    pub fn frequency(&self) -> f64 {
        (1.0 + self.constants.b1 * self.constants.b1).sqrt() / self.constants.b0()
    }

    /// `|sum of squared fiber coordinates - 1|` at `(u, v)`.
    pub fn fiber_norm_residual(&self, u: f64, v: f64) -> Result<f64> {
        let p = self.position(u, v)?;
        Ok((p.as_slice()[1..].iter().map(|x| x * x).sum::<f64>() - 1.0).abs())
    }
}

impl Immersion for ProductE11S4 {
    fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }
    fn domain(&self) -> ParamDomain {
        self.domain
    }
    fn position(&self, u: f64, v: f64) -> Result<AmbientVector> {
        Ok(self.jet(u, v)?.point)
    }
    fn jet(&self, u: f64, v: f64) -> Result<Jet2> {
        let ConstantsProduct { b1, b2, b3, .. } = self.constants;
        let b0 = self.constants.b0();
        let w = self.frequency();
        let (su, cu) = (w * u).sin_cos();
        let (sv, cv) = (v / b3).sin_cos();
        let vec = |x: [f64; 6]| AmbientVector::from_slice(&x);
        Ok(Jet2 {
            u,
            v,
            point: vec([-b1 * u, b0 * cu, b0 * su, b2, b3 * sv, b3 * cv]),
            du: vec([-b1, -b0 * w * su, b0 * w * cu, 0.0, 0.0, 0.0]),
            dv: vec([0.0, 0.0, 0.0, 0.0, cv, -sv]),
            duu: vec([0.0, -b0 * w * w * cu, -b0 * w * w * su, 0.0, 0.0, 0.0]),
            duv: AmbientVector::zeros(6),
            dvv: vec([0.0, 0.0, 0.0, 0.0, -sv / b3, -cv / b3]),
        })
    }
    fn name(&self) -> String {
        "product-e11-s4".into()
    }
    fn analytic_jets(&self) -> bool {
        true
    }
}

/// A catalog surface by family.
#[derive(Clone, Debug)]
pub enum SurfaceSpec {
    RotationalL4(RotationalL4),
    SurfaceL5(SurfaceL5),
    ProductE11S4(ProductE11S4),
}

impl SurfaceSpec {
    pub fn immersion(&self) -> &dyn Immersion {
        match self {
            SurfaceSpec::RotationalL4(s) => s,
            SurfaceSpec::SurfaceL5(s) => s,
            SurfaceSpec::ProductE11S4(s) => s,
        }
    }

    /// `|H|` predicted by the constants.
    pub fn expected_mean_curvature(&self) -> f64 {
        match self {
            SurfaceSpec::RotationalL4(s) => s.constants.h0,
            SurfaceSpec::SurfaceL5(s) => s.constants.h0,
            SurfaceSpec::ProductE11S4(s) => s.constants.mean_curvature_norm(),
        }
    }
}

// ---- fixtures ----

/// Rotational surface over `f = e^t` (a constant-curvature ambient) with
/// `a = 1.2`, `H0 = 1/2` on `u` in `[-1/2, 1/2]`.
pub fn exp_rotational() -> RotationalL4 {
    let k = ConstantsL4::new(1.2, 0.5).expect("valid constants");
    let d = ParamDomain::new((-0.5, 0.5), (0.0, 2.0 * PI / 1.2)).expect("valid domain");
    RotationalL4::new(k, WarpingFunction::exp(), Some(d)).expect("valid fixture")
}

/// The plane `(0.5 u, u, v, 0)` in Minkowski 4-space.
pub fn tilted_plane() -> MapSurface {
    let d = ParamDomain::new((-1.0, 1.0), (-1.0, 1.0)).expect("valid domain");
    MapSurface::new(
        "tilted-plane",
        AmbientSpace::minkowski(4).expect("n = 4"),
        d,
        |u, v| Ok(v3([0.5 * u, u, v, 0.0])),
    )
}

/// Round unit sphere in the space-like hyperplane `t = k x3` of Minkowski
/// 4-space, away from the poles.
pub fn tilted_sphere(k: f64) -> Result<MapSurface> {
    if !(k.abs() < 1.0) {
        return Err(Error::Usage(format!(
            "hyperplane slope must satisfy |k| < 1, got {k}"
        )));
    }
    let s = 1.0 / (1.0 - k * k).sqrt();
    let d = ParamDomain::new((0.8, 2.3), (0.0, 2.0 * PI))?;
    Ok(MapSurface::new(
        "tilted-sphere",
        AmbientSpace::minkowski(4)?,
        d,
        move |u, v| {
            let (su, cu) = u.sin_cos();
            let (sv, cv) = v.sin_cos();
            Ok(v3([k * s * cu, su * cv, su * sv, s * cu]))
        },
    ))
}

/// Graph `(0.3 u + 0.1 v^2, u, v, 0.2 u v)` in `L^4_1(e^t + 2, 0)`.
pub fn graph_surface() -> MapSurface {
    let warp = WarpingFunction::closed_form(
        ClosedForm::Exp {
            scale: 1.0,
            rate: 1.0,
            offset: 2.0,
        },
        (f64::NEG_INFINITY, f64::INFINITY),
    );
    let d = ParamDomain::new((-0.5, 0.5), (-0.5, 0.5)).expect("valid domain");
    MapSurface::new(
        "graph",
        AmbientSpace::warped_flat(4, warp).expect("n = 4"),
        d,
        |u, v| Ok(v3([0.3 * u + 0.1 * v * v, u, v, 0.2 * u * v])),
    )
}

// ---- non-existence scans ----

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub theta: f64,
    pub tau: f64,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub min_abs_residual: f64,
    /// `|residual| >= bound` at every node.
    pub bound_holds: bool,
    /// Nodes with `theta = 0`, which are not part of the claim.
    pub excluded: usize,
}

/// `sinh(theta) cosh(theta) + tau^2 tanh(theta)`.
pub fn h4_obstruction(theta: f64, tau: f64) -> f64 {
    theta.sinh() * theta.cosh() + tau * tau * theta.tanh()
}

fn finish(rows: Vec<ScanRow>, excluded: usize) -> Result<ScanResult> {
    if rows.is_empty() {
        return Err(Error::Usage("scan has no admissible nodes".into()));
    }
    let min_abs_residual = rows
        .iter()
        .map(|r| r.residual.abs())
        .fold(f64::INFINITY, f64::min);
    let bound_holds = rows.iter().all(|r| r.residual.abs() >= r.bound);
    Ok(ScanResult {
        rows,
        min_abs_residual,
        bound_holds,
        excluded,
    })
}

/// Evaluates the obstruction over a `theta x tau` grid and checks
/// `|r| >= |tanh(theta)|` node by node.
pub fn nonexistence_scan_h4(thetas: &[f64], taus: &[f64]) -> Result<ScanResult> {
    if thetas.is_empty() || taus.is_empty() {
        return Err(Error::Usage("empty theta or tau range".into()));
    }
    let mut rows = Vec::with_capacity(thetas.len() * taus.len());
    let mut excluded = 0;
    for &theta in thetas {
        for &tau in taus {
            if theta == 0.0 {
                excluded += 1;
                continue;
            }
            rows.push(ScanRow {
                theta,
                tau,
                residual: h4_obstruction(theta, tau),
                bound: theta.tanh().abs(),
            });
        }
    }
    finish(rows, excluded)
}

/// `|sinh(theta) cosh(theta) c|` over `theta != 0`; must stay positive.
pub fn nonexistence_slice_check(c: f64, thetas: &[f64]) -> Result<ScanResult> {
    if c == 0.0 {
        return Err(Error::Inapplicable(
            "the flat product (c = 0) carries no obstruction".into(),
        ));
    }
    if thetas.is_empty() {
        return Err(Error::Usage("empty theta range".into()));
    }
    let mut rows = Vec::with_capacity(thetas.len());
    let mut excluded = 0;
    for &theta in thetas {
        if theta == 0.0 {
            excluded += 1;
            continue;
        }
        let r = (theta.sinh() * theta.cosh() * c).abs();
        rows.push(ScanRow {
            theta,
            tau: 0.0,
            residual: r,
            bound: f64::MIN_POSITIVE,
        });
    }
    finish(rows, excluded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotational_circle_radius() {
        let s = exp_rotational();
        for u in [-0.4, 0.0, 0.3] {
            let p = s.position(u, 0.7).unwrap();
            let r = (p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((r - 1.0 / (1.2 * u.exp())).abs() < 1e-14);
            assert_eq!(p[0], u);
        }
    }

    #[test]
    fn product_fiber_norm() {
        let k = ConstantsProduct::from_b1_b3(1.0, 0.5).unwrap();
        assert!((k.b2 - 1.0 / 12f64.sqrt()).abs() < 1e-15);
        let s = ProductE11S4::new(k, None).unwrap();
        for (u, v) in [(0.0, 0.0), (0.7, 1.1), (-0.9, 2.5)] {
            assert!(s.fiber_norm_residual(u, v).unwrap() < 1e-14);
        }
        assert!((k.mean_curvature_norm() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn scan_values() {
        assert!((h4_obstruction(1.0, 2.0) - 4.859_8).abs() < 1e-4);
        let r = nonexistence_slice_check(1.0, &[0.5]).unwrap();
        assert!((r.min_abs_residual - 0.587_6).abs() < 1e-4);
        let r = nonexistence_slice_check(-1.0, &[0.0, 0.5]).unwrap();
        assert_eq!(r.excluded, 1);
        assert!((r.min_abs_residual - 0.587_6).abs() < 1e-4);
        assert!(matches!(
            nonexistence_slice_check(0.0, &[0.5]),
            Err(Error::Inapplicable(_))
        ));
        assert!(matches!(
            nonexistence_scan_h4(&[], &[1.0]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn sphere_rejects_steep_hyperplane() {
        assert!(tilted_sphere(1.0).is_err());
    }
}
