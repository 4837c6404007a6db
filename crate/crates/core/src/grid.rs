//! Two-phase grid evaluation. Phase one samples the surface at every node
//! and at the 5-point stencil offsets around it; phase two differentiates
//! the completed, immutable samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::PointGeometry;
use crate::error::Error;
use crate::immersion::{
    adapted_frame, FrameData, FrameHint, FrameOptions, Immersion, Jet2, ParamDomain,
};
use crate::linalg::AmbientVector;
use crate::shape::{second_fundamental_form, SecondFundamentalData};

/// Largest stencil step for surfaces with analytic jets. Truncation error
/// dominates above it.
pub const MAX_STENCIL_STEP: f64 = 2.5e-4;
/// Largest stencil step for numerically differentiated maps, whose jet noise
/// is amplified by `1/step`.
pub const MAX_STENCIL_STEP_FD: f64 = 4e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
    pub domain: ParamDomain,
    /// Defaults to `min(spacing / 4, cap)` with the cap depending on the jet source.
    #[serde(default)]
    pub stencil_step: Option<f64>,
}

impl GridSpec {
    pub fn new(nu: usize, nv: usize, domain: ParamDomain) -> Self {
        Self {
            nu,
            nv,
            domain,
            stencil_step: None,
        }
    }

    pub fn square(n: usize, domain: ParamDomain) -> Self {
        Self::new(n, n, domain)
    }

    fn axis(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    pub fn u_at(&self, i: usize) -> f64 {
        Self::axis(self.domain.u.0, self.domain.u.1, self.nu, i)
    }

    pub fn v_at(&self, j: usize) -> f64 {
        Self::axis(self.domain.v.0, self.domain.v.1, self.nv, j)
    }

    /// Stencil step for a surface with analytic jets.
    pub fn step(&self) -> f64 {
        self.step_for(true)
    }

    pub fn step_for(&self, analytic_jets: bool) -> f64 {
        if let Some(s) = self.stencil_step {
            return s;
        }
        let cap = if analytic_jets {
            MAX_STENCIL_STEP
        } else {
            MAX_STENCIL_STEP_FD
        };
        let spacing = |lo: f64, hi: f64, n: usize| {
            if n > 1 {
                (hi - lo) / (n - 1) as f64
            } else {
                f64::INFINITY
            }
        };
        let h = spacing(self.domain.u.0, self.domain.u.1, self.nu).min(spacing(
            self.domain.v.0,
            self.domain.v.1,
            self.nv,
        ));
        let h = if h.is_finite() && h > 0.0 {
            h / 4.0
        } else {
            cap
        };
        h.min(cap)
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.nu == 0 || self.nv == 0 {
            return Err(Error::Usage(
                "grid must have at least one node per direction".into(),
            ));
        }
        let s = self.step();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Usage(format!("invalid stencil step {s}")));
        }
        Ok(())
    }
}

/// Everything computed pointwise at one parameter value.
#[derive(Clone, Debug)]
pub struct PointSample {
    pub jet: Jet2,
    pub geom: PointGeometry,
    pub frame: FrameData,
    pub sff: SecondFundamentalData,
}

impl PointSample {
    pub fn h_squared(&self) -> f64 {
        self.geom
            .metric
            .dot(&self.sff.mean_curvature, &self.sff.mean_curvature)
    }
}

pub fn sample_point(
    surface: &dyn Immersion,
    u: f64,
    v: f64,
    opts: &FrameOptions,
    hint: Option<&FrameHint>,
) -> crate::Result<PointSample> {
    let jet = surface.jet(u, v)?;
    let geom = surface.ambient().point(&jet.point)?;
    let frame = adapted_frame(&jet, &geom, opts, hint)?;
    let sff = second_fundamental_form(&jet, &geom, &frame);
    Ok(PointSample {
        jet,
        geom,
        frame,
        sff,
    })
}

/// Stencil offsets in units of the step.
const OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

/// Phase-one output for a node.
#[derive(Clone, Debug)]
pub struct NodeSamples {
    pub center: PointSample,
    /// Samples at `u + k s` for `k` in `-2, -1, 1, 2`.
    pub u_stencil: [PointSample; 4],
    pub v_stencil: [PointSample; 4],
}

/// Derivatives at a node. Index `i` is the frame direction `e_{i+1}`.
#[derive(Clone, Debug)]
pub struct NodeDerivatives {
    /// `e_i(theta)`
    pub d_theta: [f64; 2],
    /// `e_i(<H, H>)`
    pub d_h_squared: [f64; 2],
    /// `omega_i = <nabla_{e_i} e1, e2>`, so that `nabla_{e_i} e1 = omega_i e2`.
    pub omega: [f64; 2],
    /// Ambient `nabla_{e_i} e_j`.
    pub nabla_tangent: [[AmbientVector; 2]; 2],
    /// `nabla^perp_{e_i} xi` for each frame normal, in frame order.
    pub nabla_perp_normals: Vec<[AmbientVector; 2]>,
    /// `(nabla^perp_{e_i} h)(e_j, e_k)` for `jk` in `11, 12, 22`.
    pub nabla_perp_h: [[AmbientVector; 3]; 2],
    /// `nabla^perp_{e_i} H`
    pub nabla_perp_mean: [AmbientVector; 2],
}

#[derive(Clone, Debug)]
pub struct NodeData {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    pub sample: PointSample,
    pub deriv: NodeDerivatives,
}

/// A fully evaluated grid.
#[derive(Clone, Debug)]
pub struct SurfaceGrid {
    pub spec: GridSpec,
    pub step: f64,
    pub surface: String,
    /// Row-major: `u` index outer, `v` index inner.
    pub nodes: Vec<NodeData>,
}

/// Failure at a specific node.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{error} at grid node ({i}, {j}), (u, v) = ({u}, {v})")]
pub struct GridError {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    pub error: Error,
}

impl From<GridError> for Error {
    fn from(g: GridError) -> Self {
        g.error
    }
}

fn node_samples(
    surface: &dyn Immersion,
    u: f64,
    v: f64,
    s: f64,
    opts: &FrameOptions,
) -> crate::Result<NodeSamples> {
    let center = sample_point(surface, u, v, opts, None)?;
    let hint = center.frame.hint();
    let mut us = Vec::with_capacity(4);
    let mut vs = Vec::with_capacity(4);
    for k in OFFSETS {
        us.push(sample_point(surface, u + k * s, v, opts, Some(&hint))?);
        vs.push(sample_point(surface, u, v + k * s, opts, Some(&hint))?);
    }
    let arr = |x: Vec<PointSample>| -> [PointSample; 4] {
        x.try_into().unwrap_or_else(|_| unreachable!())
    };
    Ok(NodeSamples {
        center,
        u_stencil: arr(us),
        v_stencil: arr(vs),
    })
}

fn stencil_vec(vals: [&AmbientVector; 4], s: f64) -> AmbientVector {
    let w = [1.0, -8.0, 8.0, -1.0];
    let mut out = AmbientVector::zeros(vals[0].dim());
    for (k, v) in vals.iter().enumerate() {
        out = out.axpy(w[k] / (12.0 * s), v);
    }
    out
}

fn stencil_scalar(vals: [f64; 4], s: f64) -> f64 {
    (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * s)
}

/// Phase two for one node.
fn differentiate(ns: &NodeSamples, s: f64) -> NodeDerivatives {
    let c = &ns.center;
    let f = &c.frame;
    let geom = &c.geom;
    let metric = &geom.metric;
    let plane = &f.plane;

    // coordinate derivatives of a sampled field, then directional along e_i
    let dvec = |get: &dyn Fn(&PointSample) -> AmbientVector| -> [AmbientVector; 2] {
        let uv = [&ns.u_stencil, &ns.v_stencil].map(|st| {
            let vals: Vec<AmbientVector> = st.iter().map(get).collect();
            stencil_vec([&vals[0], &vals[1], &vals[2], &vals[3]], s)
        });
        [0, 1].map(|i| &uv[0].scale(f.coeffs[i][0]) + &uv[1].scale(f.coeffs[i][1]))
    };
    let dscalar = |get: &dyn Fn(&PointSample) -> f64| -> [f64; 2] {
        let uv = [&ns.u_stencil, &ns.v_stencil]
            .map(|st| stencil_scalar([get(&st[0]), get(&st[1]), get(&st[2]), get(&st[3])], s));
        [0, 1].map(|i| f.coeffs[i][0] * uv[0] + f.coeffs[i][1] * uv[1])
    };
    // ambient covariant derivative of a field along e_i
    let cov = |get: &dyn Fn(&PointSample) -> AmbientVector| -> [AmbientVector; 2] {
        let d = dvec(get);
        let y = get(c);
        [0, 1].map(|i| &d[i] + &geom.connection_correction(f.tangent(i), &y))
    };
    let perp = |v: &AmbientVector| plane.normal_part(v, geom);

    let d_theta = dscalar(&|p| p.frame.theta);
    let d_h_squared = dscalar(&|p| p.h_squared());
    let n_e1 = cov(&|p| p.frame.e1.clone());
    let n_e2 = cov(&|p| p.frame.e2.clone());
    let omega = [0, 1].map(|i| metric.dot(&n_e1[i], &f.e2));

    let normal_count = f.normals().len();
    let nabla_perp_normals = (0..normal_count)
        .map(|k| {
            let d = cov(&|p: &PointSample| p.frame.normals()[k].0.clone());
            [perp(&d[0]), perp(&d[1])]
        })
        .collect();

    let dh11 = cov(&|p| p.sff.h11.clone());
    let dh12 = cov(&|p| p.sff.h12.clone());
    let dh22 = cov(&|p| p.sff.h22.clone());
    let sff = &c.sff;
    let nabla_perp_h = [0, 1].map(|i| {
        let w = omega[i];
        [
            &perp(&dh11[i]) - &sff.h12.scale(2.0 * w),
            &(&perp(&dh12[i]) - &sff.h22.scale(w)) + &sff.h11.scale(w),
            &perp(&dh22[i]) + &sff.h12.scale(2.0 * w),
        ]
    });
    let dmean = cov(&|p| p.sff.mean_curvature.clone());
    let nabla_perp_mean = [perp(&dmean[0]), perp(&dmean[1])];
    NodeDerivatives {
        d_theta,
        d_h_squared,
        omega,
        nabla_tangent: [
            [n_e1[0].clone(), n_e2[0].clone()],
            [n_e1[1].clone(), n_e2[1].clone()],
        ],
        nabla_perp_normals,
        nabla_perp_h,
        nabla_perp_mean,
    }
}

/// Evaluates the surface on the grid. Any degeneracy at a node aborts with
/// the location of the first failing node in grid order.
pub fn evaluate_grid(
    surface: &dyn Immersion,
    spec: &GridSpec,
    opts: &FrameOptions,
) -> Result<SurfaceGrid, GridError> {
    spec.validate().map_err(|error| GridError {
        i: 0,
        j: 0,
        u: spec.u_at(0),
        v: spec.v_at(0),
        error,
    })?;
    let s = spec.step_for(surface.analytic_jets());
    let coords: Vec<(usize, usize, f64, f64)> = (0..spec.nu)
        .flat_map(|i| (0..spec.nv).map(move |j| (i, j, spec.u_at(i), spec.v_at(j))))
        .collect();

    // phase one: fill
    let samples: Vec<Result<NodeSamples, GridError>> = coords
        .par_iter()
        .map(|&(i, j, u, v)| {
            node_samples(surface, u, v, s, opts).map_err(|error| GridError { i, j, u, v, error })
        })
        .collect();
    let samples: Vec<NodeSamples> = samples.into_iter().collect::<Result<_, _>>()?;

    // phase two: differentiate the immutable samples
    let nodes: Vec<NodeData> = samples
        .into_par_iter()
        .zip(coords.par_iter())
        .map(|(ns, &(i, j, u, v))| {
            let deriv = differentiate(&ns, s);
            NodeData {
                i,
                j,
                u,
                v,
                sample: ns.center,
                deriv,
            }
        })
        .collect();
    Ok(SurfaceGrid {
        spec: *spec,
        step: s,
        surface: surface.name(),
        nodes,
    })
}

impl SurfaceGrid {
    pub fn node(&self, i: usize, j: usize) -> &NodeData {
        &self.nodes[i * self.spec.nv + j]
    }
}
