#![allow(dead_code)]

use bicons_core::ambient::{ClosedForm, RwCurvature};
use bicons_core::catalog::{ProductE11S4, RotationalL4, SurfaceL5};
use bicons_core::grid::{evaluate_grid, GridSpec, SurfaceGrid};
use bicons_core::immersion::{FrameOptions, Immersion};
use bicons_core::linalg::{AmbientVector, Metric};
use bicons_core::solvers::thm5::reference_fixture;
use bicons_core::solvers::{
    solve_f_theorem4, solve_system_theorem5, ConstantsL4, ConstantsProduct, SolverConfig,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn solver_config() -> SolverConfig {
    SolverConfig {
        max_step: 5e-3,
        ..SolverConfig::default()
    }
    .with_interval(-0.5, 0.5)
}

/// a = 2, H0 = 1/2, f(0) = 1, f'(0) = 2.
pub fn thm4_surface() -> RotationalL4 {
    let k = ConstantsL4::new(2.0, 0.5).unwrap();
    let sol = solve_f_theorem4(&k, 1.0, 2.0, &solver_config()).unwrap();
    RotationalL4::new(k, sol.warp, None).unwrap()
}

pub fn thm5_surface() -> SurfaceL5 {
    let (k, init) = reference_fixture();
    let sol = solve_system_theorem5(&k, init, &solver_config()).unwrap();
    SurfaceL5::new(sol, None).unwrap()
}

/// (b1, b2, b3) = (1, 1/sqrt(12), 1/2).
pub fn product_surface() -> ProductE11S4 {
    ProductE11S4::new(ConstantsProduct::from_b1_b3(1.0, 0.5).unwrap(), None).unwrap()
}

/// Same b1, b3 with b2 = 0.4, violating the constraint.
pub fn broken_product_surface() -> ProductE11S4 {
    ProductE11S4::new(ConstantsProduct::unchecked(1.0, 0.4, 0.5).unwrap(), None).unwrap()
}

pub fn grid(surface: &dyn Immersion, n: usize) -> SurfaceGrid {
    evaluate_grid(
        surface,
        &GridSpec::square(n, surface.domain()),
        &FrameOptions::default(),
    )
    .unwrap()
}

/// Interior sample points of the parameter domain.
pub fn interior_points(surface: &dyn Immersion, n: usize) -> Vec<(f64, f64)> {
    let d = surface.domain();
    let mut out = vec![];
    for i in 1..=n {
        for j in 1..=n {
            let s = i as f64 / (n + 1) as f64;
            let t = j as f64 / (n + 1) as f64;
            out.push((d.u.0 + s * (d.u.1 - d.u.0), d.v.0 + t * (d.v.1 - d.v.0)));
        }
    }
    out
}

/// Random warp with `f > 1/2` at a random `t`, as `(f, f', f'')`.
pub fn random_warp(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    loop {
        let t = rng.gen_range(-1.0..1.0);
        let form = match rng.gen_range(0..3) {
            0 => ClosedForm::Polynomial {
                coefficients: (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            },
            1 => ClosedForm::Exp {
                scale: rng.gen_range(0.1..2.0),
                rate: rng.gen_range(-2.0..2.0),
                offset: rng.gen_range(0.0..1.0),
            },
            _ => ClosedForm::Cosh {
                scale: rng.gen_range(0.2..2.0),
                rate: rng.gen_range(-2.0..2.0),
            },
        };
        let (f, fp, fpp) = form.eval(t);
        if f > 0.5 {
            return (f, fp, fpp);
        }
    }
}

/// Orthonormal Euclidean vectors in the spatial slots of `dim`-space.
pub fn random_spatial_frame(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![];
    while out.len() < count {
        let mut v: Vec<f64> = (0..dim)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    rng.gen_range(-1.0..1.0)
                }
            })
            .collect();
        for w in &out {
            let d: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(w).for_each(|(a, b)| *a -= d * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-3 {
            out.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    out
}

pub const LEMMA_SEED: u64 = 0x1e33a;

/// A random point configuration for the curvature trace identity: a warp
/// jet, an adapted frame at angle `theta` in `[-3, 3]` and a normal `H`.
pub struct LemmaCase {
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
    pub c: f64,
    pub dim: usize,
    pub theta: f64,
    pub metric: Metric,
    pub curv: RwCurvature,
    pub e1: AmbientVector,
    pub e2: AmbientVector,
    pub e3: AmbientVector,
    pub h: AmbientVector,
    pub dt: AmbientVector,
}

/// `case` picks the dimension (4 or 5) and `c` in `{-1, 0, 1}`.
pub fn lemma_case(rng: &mut ChaCha8Rng, case: usize) -> LemmaCase {
    let dim = if case % 2 == 0 { 4 } else { 5 };
    let c = [-1.0, 0.0, 1.0][case % 3];
    let (f, fp, fpp) = random_warp(rng);
    let mut diag = vec![f * f; dim];
    diag[0] = -1.0;
    let metric = Metric::diagonal(&diag);
    let curv = RwCurvature::from_warp(f, fp, fpp, c);
    let theta: f64 = rng.gen_range(-3.0..3.0);
    let (sh, ch) = (theta.sinh(), theta.cosh());
    let u = random_spatial_frame(rng, dim, dim - 1);
    let spatial = |k: usize| AmbientVector::new(u[k].iter().map(|a| a / f).collect());
    let dt = AmbientVector::basis(dim, 0);
    let e1 = &dt.scale(-sh) + &spatial(0).scale(ch);
    let e2 = spatial(1);
    let e3 = &dt.scale(ch) - &spatial(0).scale(sh);
    let mut h = e3.scale(rng.gen_range(-1.0..1.0));
    for k in 2..dim - 1 {
        h = h.axpy(rng.gen_range(-1.0..1.0), &spatial(k));
    }
    LemmaCase {
        f,
        fp,
        fpp,
        c,
        dim,
        theta,
        metric,
        curv,
        e1,
        e2,
        e3,
        h,
        dt,
    }
}
