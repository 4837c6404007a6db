//! Second fundamental form, shape operators, mean curvature vector, normal
//! connection and normal curvature.

use serde::{Deserialize, Serialize};

use crate::ambient::PointGeometry;
use crate::error::{Error, Result};
use crate::grid::SurfaceGrid;
use crate::immersion::{FrameData, Jet2};
use crate::linalg::{numeric_rank, AmbientVector, Metric, SmallMatrix2};

/// Pointwise extrinsic data in the adapted frame.
#[derive(Clone, Debug)]
pub struct SecondFundamentalData {
    pub h11: AmbientVector,
    pub h12: AmbientVector,
    pub h22: AmbientVector,
    /// `(h11 + h22) / 2`
    pub mean_curvature: AmbientVector,
    /// `A_xi` for every frame normal, in the order of [`FrameData::normals`].
    pub shape: Vec<SmallMatrix2>,
}

impl SecondFundamentalData {
    /// `h(e_i, e_j)` for `i, j` in `{0, 1}`.
    pub fn h(&self, i: usize, j: usize) -> &AmbientVector {
        match (i, j) {
            (0, 0) => &self.h11,
            (1, 1) => &self.h22,
            _ => &self.h12,
        }
    }

    /// `A_{e3}`.
    pub fn shape_e3(&self) -> SmallMatrix2 {
        self.shape[0]
    }
}

/// `nabla_{phi_a} phi_b` in the ambient space.
pub fn coordinate_connection(
    jet: &Jet2,
    geom: &PointGeometry,
    a: usize,
    b: usize,
) -> AmbientVector {
    jet.second(a, b) + &geom.connection_correction(jet.first(a), jet.first(b))
}

/// `h(e_i, e_j)` as the normal part of `nabla_{e_i} e_j`, expanded over
/// coordinate tangents.
pub fn second_fundamental_form(
    jet: &Jet2,
    geom: &PointGeometry,
    frame: &FrameData,
) -> SecondFundamentalData {
    let n = geom.dim();
    let gamma: [[AmbientVector; 2]; 2] =
        [0, 1].map(|a| [0, 1].map(|b| coordinate_connection(jet, geom, a, b)));
    let normal: [[AmbientVector; 2]; 2] =
        [0, 1].map(|a| [0, 1].map(|b| frame.plane.normal_part(&gamma[a][b], geom)));
    let h = |i: usize, j: usize| {
        let mut out = AmbientVector::zeros(n);
        for a in 0..2 {
            for b in 0..2 {
                out = out.axpy(frame.coeffs[i][a] * frame.coeffs[j][b], &normal[a][b]);
            }
        }
        out
    };
    let (h11, h12, h22) = (h(0, 0), h(0, 1), h(1, 1));
    let mean_curvature = (&h11 + &h22).scale(0.5);
    let metric = &geom.metric;
    let shape = frame
        .normals()
        .iter()
        .map(|(xi, _)| raw_shape_matrix(&h11, &h12, &h22, xi, metric))
        .collect();
    SecondFundamentalData {
        h11,
        h12,
        h22,
        mean_curvature,
        shape,
    }
}

fn raw_shape_matrix(
    h11: &AmbientVector,
    h12: &AmbientVector,
    h22: &AmbientVector,
    xi: &AmbientVector,
    g: &Metric,
) -> SmallMatrix2 {
    let a12 = g.dot(h12, xi);
    SmallMatrix2::new(g.dot(h11, xi), a12, a12, g.dot(h22, xi))
}

/// `(A_xi)_ij = <h(e_i, e_j), xi>` in the `(e1, e2)` basis, for a unit normal `xi`.
pub fn shape_operator(
    sfd: &SecondFundamentalData,
    frame: &FrameData,
    xi: &AmbientVector,
    metric: &Metric,
) -> Result<SmallMatrix2> {
    let q = metric.dot(xi, xi);
    if (q.abs() - 1.0).abs() > 1e-8 {
        return Err(Error::Usage(format!(
            "shape operator needs a unit normal, got <xi,xi> = {q}"
        )));
    }
    let scale = metric.norm(xi);
    for e in [&frame.e1, &frame.e2] {
        if metric.dot(xi, e).abs() > 1e-8 * scale {
            return Err(Error::Usage("shape operator needs a normal vector".into()));
        }
    }
    Ok(raw_shape_matrix(&sfd.h11, &sfd.h12, &sfd.h22, xi, metric))
}

/// `A_xi X` for `X = x1 e1 + x2 e2` (any normal `xi`), as `e1, e2` coefficients.
pub fn shape_apply(
    sfd: &SecondFundamentalData,
    xi: &AmbientVector,
    x: [f64; 2],
    metric: &Metric,
) -> [f64; 2] {
    let a = raw_shape_matrix(&sfd.h11, &sfd.h12, &sfd.h22, xi, metric);
    [
        x[0] * a.get(0, 0) + x[1] * a.get(1, 0),
        x[0] * a.get(0, 1) + x[1] * a.get(1, 1),
    ]
}

/// `R^perp(e1, e2) xi = h(e1, A_xi e2) - h(A_xi e1, e2)`.
pub fn normal_curvature(
    sfd: &SecondFundamentalData,
    xi: &AmbientVector,
    metric: &Metric,
) -> AmbientVector {
    let a = raw_shape_matrix(&sfd.h11, &sfd.h12, &sfd.h22, xi, metric);
    // h(e1, A e2) = A_21 h11 + A_22 h12 and h(A e1, e2) = A_11 h12 + A_12 h22
    let h_e1_ae2 = &sfd.h11.scale(a.get(1, 0)) + &sfd.h12.scale(a.get(1, 1));
    let h_ae1_e2 = &sfd.h12.scale(a.get(0, 0)) + &sfd.h22.scale(a.get(0, 1));
    &h_e1_ae2 - &h_ae1_e2
}

/// Classification of the mean curvature vector by causal character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalCharacter {
    Spacelike,
    Null,
    Timelike,
}

/// Sign of `<H, H>` with a null band `|<H,H>| < band`.
pub fn marginally_trapped_check(h: &AmbientVector, metric: &Metric, band: f64) -> CausalCharacter {
    let q = metric.dot(h, h);
    if q.abs() < band {
        CausalCharacter::Null
    } else if q > 0.0 {
        CausalCharacter::Spacelike
    } else {
        CausalCharacter::Timelike
    }
}

/// `max |nabla^perp_{e_i} H|` over the grid.
pub fn pmcv_residual(grid: &SurfaceGrid) -> f64 {
    grid.nodes
        .iter()
        .flat_map(|n| {
            let m = &n.sample.geom.metric;
            n.deriv
                .nabla_perp_mean
                .iter()
                .map(move |d| n.sample.frame.norm(d, m))
        })
        .fold(0.0, f64::max)
}

/// Ranges of `dim N1` and `dim N2` over the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalSpaceDims {
    pub n1_min: usize,
    pub n1_max: usize,
    pub n2_min: usize,
    pub n2_max: usize,
}

/// Numerical ranks of `span{h}` and `span{h, nabla^perp h}` at each node.
pub fn normal_space_dims(grid: &SurfaceGrid, tol: f64) -> NormalSpaceDims {
    let mut d = NormalSpaceDims {
        n1_min: usize::MAX,
        n1_max: 0,
        n2_min: usize::MAX,
        n2_max: 0,
    };
    for n in &grid.nodes {
        let (n1, n2) = node_normal_space_dims(n, tol);
        d.n1_min = d.n1_min.min(n1);
        d.n1_max = d.n1_max.max(n1);
        d.n2_min = d.n2_min.min(n2);
        d.n2_max = d.n2_max.max(n2);
    }
    if grid.nodes.is_empty() {
        d.n1_min = 0;
        d.n2_min = 0;
    }
    d
}

pub fn node_normal_space_dims(node: &crate::grid::NodeData, tol: f64) -> (usize, usize) {
    let s = &node.sample.sff;
    let m = &node.sample.geom.metric;
    let mut v = vec![s.h11.clone(), s.h12.clone(), s.h22.clone()];
    let n1 = numeric_rank(&v, m, tol);
    for row in &node.deriv.nabla_perp_h {
        v.extend(row.iter().cloned());
    }
    (n1, numeric_rank(&v, m, tol))
}

/// `max |R^perp(e1,e2) xi|` over the grid and all frame normals.
pub fn flat_normal_bundle_residual(grid: &SurfaceGrid) -> f64 {
    grid.nodes
        .iter()
        .flat_map(|n| {
            let m = &n.sample.geom.metric;
            let f = &n.sample.frame;
            f.normals()
                .into_iter()
                .map(|(xi, _)| f.norm(&normal_curvature(&n.sample.sff, xi, m), m))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> AmbientVector {
        AmbientVector::from_slice(c)
    }

    #[test]
    fn commuting_shape_operators_have_zero_normal_curvature() {
        // h11 = n1, h22 = n2, h12 = 0 in R^4 with normals n1 = x3, n2 = x4
        let g = Metric::diagonal(&[1.0, 1.0, 1.0, 1.0]);
        let sfd = SecondFundamentalData {
            h11: v(&[0.0, 0.0, 1.0, 0.0]),
            h12: v(&[0.0, 0.0, 0.0, 0.0]),
            h22: v(&[0.0, 0.0, 0.0, 2.0]),
            mean_curvature: v(&[0.0, 0.0, 0.5, 1.0]),
            shape: vec![],
        };
        for xi in [v(&[0.0, 0.0, 1.0, 0.0]), v(&[0.0, 0.0, 0.0, 1.0])] {
            assert!(normal_curvature(&sfd, &xi, &g).coord_norm() < 1e-15);
        }
    }

    #[test]
    fn non_commuting_shape_operators() {
        // A_{n1} = diag(1, -1), A_{n2} = [[0,1],[1,0]]: [A1, A2] != 0
        let g = Metric::diagonal(&[1.0, 1.0, 1.0, 1.0]);
        let n1 = v(&[0.0, 0.0, 1.0, 0.0]);
        let n2 = v(&[0.0, 0.0, 0.0, 1.0]);
        let sfd = SecondFundamentalData {
            h11: n1.clone(),
            h12: n2.clone(),
            h22: -&n1,
            mean_curvature: AmbientVector::zeros(4),
            shape: vec![],
        };
        let a1 = SmallMatrix2::diag(1.0, -1.0);
        let a2 = SmallMatrix2::new(0.0, 1.0, 1.0, 0.0);
        assert!(a1.commutator(&a2).max_abs() > 0.0);
        // R(e1,e2) n1 = h(e1, A1 e2) - h(A1 e1, e2) = -h12 - h12 = -2 n2
        let r = normal_curvature(&sfd, &n1, &g);
        assert!((&r - &n2.scale(-2.0)).coord_norm() < 1e-15);
    }

    #[test]
    fn causal_character() {
        let g = Metric::minkowski(4);
        assert_eq!(
            marginally_trapped_check(&v(&[1.0, 0.0, 0.0, 0.0]), &g, 1e-8),
            CausalCharacter::Timelike
        );
        assert_eq!(
            marginally_trapped_check(&v(&[1.0, 1.0, 0.0, 0.0]), &g, 1e-8),
            CausalCharacter::Null
        );
        assert_eq!(
            marginally_trapped_check(&v(&[0.0, 1.0, 0.0, 0.0]), &g, 1e-8),
            CausalCharacter::Spacelike
        );
    }
}
