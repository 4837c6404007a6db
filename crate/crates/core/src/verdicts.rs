//! Residual checks over an evaluated grid and the verification report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::{PointGeometry, RwCurvature};
use crate::grid::{evaluate_grid, GridSpec, NodeData, SurfaceGrid};
use crate::immersion::{FrameData, FrameOptions, Immersion};
use crate::linalg::{AmbientVector, Metric, DEFAULT_RANK_TOL};
use crate::shape::{
    marginally_trapped_check, node_normal_space_dims, normal_curvature, CausalCharacter,
    NormalSpaceDims, SecondFundamentalData,
};
use crate::solvers::SolveSummary;

pub const REPORT_SCHEMA: &str = "bicons.report/1";

/// Tolerance for quantities computed pointwise from jets.
pub const ALGEBRAIC_TOL_ANALYTIC: f64 = 1e-8;
pub const ALGEBRAIC_TOL_ODE: f64 = 1e-6;
pub const ALGEBRAIC_TOL_FD: f64 = 1e-5;
/// Tolerance for quantities that need a stencil derivative of frame fields.
pub const STENCIL_TOL: f64 = 1e-5;
/// Band `|<H,H>| < band` classified as null.
pub const NULL_BAND: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub algebraic: f64,
    pub stencil: f64,
    pub null_band: f64,
    pub rank: f64,
}

impl Tolerances {
    /// Tiers for a surface: analytic jets over a closed-form warp get the
    /// tight algebraic tolerance, ODE-sourced warps and numerical jets looser ones.
    pub fn for_surface(surface: &dyn Immersion) -> Self {
        let algebraic = if !surface.analytic_jets() {
            ALGEBRAIC_TOL_FD
        } else if surface.ambient().warp().is_ode() {
            ALGEBRAIC_TOL_ODE
        } else {
            ALGEBRAIC_TOL_ANALYTIC
        };
        Self {
            algebraic,
            stencil: STENCIL_TOL,
            null_band: NULL_BAND,
            rank: DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    Algebraic,
    Stencil,
}

/// One named residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub tier: Tier,
    pub passed: bool,
}

impl Entry {
    fn new(name: &str, value: f64, tolerance: f64, tier: Tier) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            tier,
            passed: value <= tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Degenerate => 2,
        }
    }
}

/// A check that could not be run, with the reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<(f64, f64)>,
}

/// A check that does not apply to this ambient (not a failure).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut r: Option<Range> = None;
        for x in values {
            r = Some(match r {
                None => Range { min: x, max: x },
                Some(r) => Range {
                    min: r.min.min(x),
                    max: r.max.max(x),
                },
            });
        }
        r
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub theta: Option<Range>,
    pub theta_variance: Option<f64>,
    /// `(A_{e3})_11`
    pub gamma: Option<Range>,
    /// `(A_{e5})_11`, when the frame has an `e5`.
    pub tau: Option<Range>,
    /// `sqrt(<H,H>)` where `H` is space-like.
    pub h0: Option<Range>,
    pub h_squared: Option<Range>,
    pub normal_space_dims: Option<NormalSpaceDims>,
    pub causal_character: Vec<CausalCharacter>,
    /// `max |f''/f - (f'^2 + c)/f^2|` over the nodes.
    pub curvature_defect: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub nu: usize,
    pub nv: usize,
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub stencil_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub surface: String,
    pub grid: GridMeta,
    pub tolerances: Tolerances,
    pub entries: Vec<Entry>,
    pub skipped: Vec<Skipped>,
    pub diagnostics: Diagnostics,
    pub degeneracies: Vec<Degeneracy>,
    /// Integration that produced the warp, when there was one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolveSummary>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn entry(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.entry(name).map(|e| e.value)
    }

    pub fn failing(&self) -> Vec<&Entry> {
        self.entries.iter().filter(|e| !e.passed).collect()
    }

    /// One line naming the outcome and the first failing entry or degeneracy.
    pub fn reason(&self) -> String {
        match self.verdict {
            Verdict::Pass => format!("pass: {} entries", self.entries.len()),
            Verdict::Fail => {
                let f = self.failing();
                let e = f[0];
                format!(
                    "fail: {} = {:.3e} > {:.1e} ({} failing)",
                    e.name,
                    e.value,
                    e.tolerance,
                    f.len()
                )
            }
            Verdict::Degenerate => {
                let d = &self.degeneracies[0];
                format!("degenerate: {}: {}", d.kind, d.message)
            }
        }
    }

    fn finalize(&mut self) {
        self.verdict = if self.entries.iter().any(|e| !e.passed) {
            Verdict::Fail
        } else if !self.degeneracies.is_empty() {
            Verdict::Degenerate
        } else {
            Verdict::Pass
        };
    }
}

// ---- pointwise operations ----

/// `|<H, eta>|`.
pub fn reduced_criterion(frame: &FrameData, h: &AmbientVector, metric: &Metric) -> f64 {
    metric.dot(h, &frame.eta).abs()
}

/// Both sides of the trace identity for the curvature term.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTrace {
    /// `sum_i (R(e_i, H) e_i)^T`
    pub direct: AmbientVector,
    /// `(f''/f - (f'^2 + c)/f^2) <H, eta> T`
    pub closed_form: AmbientVector,
    /// Length of `direct - closed_form` in the `e1, e2` basis.
    pub defect: f64,
}

/// Evaluates the trace term directly through the curvature tensor and by
/// its closed form. `e` is an orthonormal tangent pair, `dt` the unit time
/// field; `T` and `eta` are derived here.
pub fn curvature_trace_term(
    curv: &RwCurvature,
    metric: &Metric,
    e: [&AmbientVector; 2],
    h: &AmbientVector,
    dt: &AmbientVector,
) -> CurvatureTrace {
    let tangent = |x: &AmbientVector| {
        let c = [metric.dot(x, e[0]), metric.dot(x, e[1])];
        (AmbientVector::combination(&c, &e), c)
    };
    let mut sum = AmbientVector::zeros(h.dim());
    for ei in e {
        sum = &sum + &curv.apply(metric, ei, h, ei);
    }
    let (direct, dc) = tangent(&sum);
    let (t, _) = tangent(dt);
    let eta = dt - &t;
    let closed_form = t.scale(curv.defect() * metric.dot(h, &eta));
    let cc = [
        metric.dot(&closed_form, e[0]),
        metric.dot(&closed_form, e[1]),
    ];
    let defect = ((dc[0] - cc[0]).powi(2) + (dc[1] - cc[1]).powi(2)).sqrt();
    CurvatureTrace {
        direct,
        closed_form,
        defect,
    }
}

/// `e_j` components of the curvature trace term, `sum_i <R(e_i, H) e_i, e_j>`.
fn curvature_trace_coefficients(
    geom: &PointGeometry,
    frame: &FrameData,
    h: &AmbientVector,
) -> [f64; 2] {
    let mut c = [0.0; 2];
    for i in 0..2 {
        let r = geom.curvature(frame.tangent(i), h, frame.tangent(i));
        for (j, cj) in c.iter_mut().enumerate() {
            *cj += geom.metric.dot(&r, frame.tangent(j));
        }
    }
    c
}

/// The three terms of the tangential bitension condition with `m = 2`, as
/// `e1, e2` coefficients: `2 grad <H,H>`, `4 sum_i A_{nabla^perp_{e_i} H} e_i`
/// and `4 sum_i (R(e_i, H) e_i)^T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiconservativityTerms {
    pub gradient: [f64; 2],
    pub shape: [f64; 2],
    pub curvature: [f64; 2],
}

impl BiconservativityTerms {
    pub fn total(&self) -> [f64; 2] {
        [0, 1].map(|j| self.gradient[j] + self.shape[j] + self.curvature[j])
    }

    pub fn norm(v: [f64; 2]) -> f64 {
        v[0].hypot(v[1])
    }
}

pub fn biconservativity_terms(node: &NodeData) -> BiconservativityTerms {
    let s = &node.sample;
    let m = &s.geom.metric;
    let h = &s.sff.mean_curvature;
    let d = &node.deriv;
    let gradient = [2.0 * d.d_h_squared[0], 2.0 * d.d_h_squared[1]];
    let mut shape = [0.0; 2];
    for (j, sj) in shape.iter_mut().enumerate() {
        for i in 0..2 {
            *sj += 4.0 * m.dot(s.sff.h(i, j), &d.nabla_perp_mean[i]);
        }
    }
    let c = curvature_trace_coefficients(&s.geom, &s.frame, h);
    BiconservativityTerms {
        gradient,
        shape,
        curvature: [4.0 * c[0], 4.0 * c[1]],
    }
}

/// Per-node residual of the tangential bitension condition.
pub fn node_biconservativity(node: &NodeData) -> f64 {
    BiconservativityTerms::norm(biconservativity_terms(node).total())
}

/// `(r1, r2)` at a node.
pub fn node_codazzi(node: &NodeData) -> (f64, f64) {
    let s = &node.sample;
    let f = &s.frame;
    let m = &s.geom.metric;
    let nph = &node.deriv.nabla_perp_h;
    let r1 = &nph[0][1] - &nph[1][0];
    let curv = s.geom.curvature_scalars();
    let term = f.eta.scale(f.sinh_theta * (curv.fiber - curv.ddf_over_f));
    let r2 = &(&nph[0][2] - &nph[1][1]) - &term;
    (f.norm(&r1, m), f.norm(&r2, m))
}

/// The four frame identities coupling `theta`, the connection and `A_{e3}`.
pub fn node_frame_identities(node: &NodeData) -> [f64; 4] {
    let s = &node.sample;
    let f = &s.frame;
    let m = &s.geom.metric;
    let d = &node.deriv;
    let (sh, ch) = (f.sinh_theta, f.cosh_theta);
    let hub = s.geom.fp / s.geom.f;
    let a = s.sff.shape_e3();
    let ra = [
        d.d_theta[0] * ch - ch * a.get(0, 0) - hub * ch * ch,
        sh * d.omega[0] - ch * a.get(0, 1),
    ];
    let rb = [
        d.d_theta[1] * ch - ch * a.get(1, 0),
        sh * d.omega[1] - ch * a.get(1, 1) - hub,
    ];
    let ne3 = &d.nabla_perp_normals[0];
    let rc = &(&(&f.e3.scale(d.d_theta[0] * sh) + &s.sff.h11.scale(sh)) + &ne3[0].scale(ch))
        - &f.e3.scale(hub * ch * sh);
    let rd = &(&f.e3.scale(d.d_theta[1] * sh) + &s.sff.h12.scale(sh)) + &ne3[1].scale(ch);
    [
        ra[0].hypot(ra[1]),
        rb[0].hypot(rb[1]),
        f.norm(&rc, m),
        f.norm(&rd, m),
    ]
}

/// Structure of a surface with parallel `H`: with `e4 = H/|H|`,
/// `A_{e4} = diag(0, 2 H0)`, every other `A_xi` traceless and diagonal,
/// `e4` parallel and orthogonal to `eta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureResiduals {
    pub a4_11: f64,
    pub a4_12: f64,
    pub a4_22: f64,
    pub trace_other: f64,
    pub offdiag_other: f64,
    pub nabla_e4: f64,
    pub e4_eta: f64,
}

pub const STRUCTURE_NAMES: [&str; 7] = [
    "structure-a-e4-11",
    "structure-a-e4-12",
    "structure-a-e4-22",
    "structure-trace-a-xi",
    "structure-a-xi-12",
    "structure-nabla-perp-e4",
    "structure-e4-eta",
];

/// `None` when the frame has no `e4` at this node.
pub fn node_structure(node: &NodeData) -> Option<StructureResiduals> {
    let s = &node.sample;
    let f = &s.frame;
    let m = &s.geom.metric;
    let e4 = f.e4.as_ref()?;
    let h0 = m
        .dot(&s.sff.mean_curvature, &s.sff.mean_curvature)
        .max(0.0)
        .sqrt();
    let a4 = s.sff.shape[1];
    let mut trace_other: f64 = 0.0;
    let mut offdiag_other: f64 = 0.0;
    for (k, a) in s.sff.shape.iter().enumerate() {
        if k == 1 {
            continue;
        }
        trace_other = trace_other.max(a.trace().abs());
        offdiag_other = offdiag_other.max(a.get(0, 1).abs());
    }
    let ne4 = &node.deriv.nabla_perp_normals[1];
    Some(StructureResiduals {
        a4_11: a4.get(0, 0).abs(),
        a4_12: a4.get(0, 1).abs(),
        a4_22: (a4.get(1, 1) - 2.0 * h0).abs(),
        trace_other,
        offdiag_other,
        nabla_e4: f.norm(&ne4[0], m).max(f.norm(&ne4[1], m)),
        e4_eta: m.dot(e4, &f.eta).abs(),
    })
}

/// `max |R^perp(e1, e2) xi|` over the frame normals at a node.
pub fn node_normal_curvature(
    sff: &SecondFundamentalData,
    frame: &FrameData,
    metric: &Metric,
) -> f64 {
    frame
        .normals()
        .into_iter()
        .map(|(xi, _)| frame.norm(&normal_curvature(sff, xi, metric), metric))
        .fold(0.0, f64::max)
}

// ---- grid aggregates ----

fn grid_max(grid: &SurfaceGrid, f: impl Fn(&NodeData) -> f64 + Sync + Send) -> f64 {
    grid.nodes
        .par_iter()
        .map(f)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

pub fn biconservativity_residual(grid: &SurfaceGrid) -> f64 {
    grid_max(grid, node_biconservativity)
}

pub fn codazzi_residuals(grid: &SurfaceGrid) -> (f64, f64) {
    let r: Vec<(f64, f64)> = grid.nodes.par_iter().map(node_codazzi).collect();
    r.into_iter()
        .fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

pub fn frame_identity_residuals(grid: &SurfaceGrid) -> [f64; 4] {
    let r: Vec<[f64; 4]> = grid.nodes.par_iter().map(node_frame_identities).collect();
    r.into_iter()
        .fold([0.0; 4], |a, b| [0, 1, 2, 3].map(|k| a[k].max(b[k])))
}

/// Grid maxima of the structure residuals; `Err` names the first node without `e4`.
pub fn prop33_structure_check(grid: &SurfaceGrid) -> Result<StructureResiduals, (usize, usize)> {
    let mut acc = StructureResiduals {
        a4_11: 0.0,
        a4_12: 0.0,
        a4_22: 0.0,
        trace_other: 0.0,
        offdiag_other: 0.0,
        nabla_e4: 0.0,
        e4_eta: 0.0,
    };
    for n in &grid.nodes {
        let r = node_structure(n).ok_or((n.i, n.j))?;
        acc.a4_11 = acc.a4_11.max(r.a4_11);
        acc.a4_12 = acc.a4_12.max(r.a4_12);
        acc.a4_22 = acc.a4_22.max(r.a4_22);
        acc.trace_other = acc.trace_other.max(r.trace_other);
        acc.offdiag_other = acc.offdiag_other.max(r.offdiag_other);
        acc.nabla_e4 = acc.nabla_e4.max(r.nabla_e4);
        acc.e4_eta = acc.e4_eta.max(r.e4_eta);
    }
    Ok(acc)
}

pub fn flat_normal_bundle_check(grid: &SurfaceGrid) -> f64 {
    grid_max(grid, |n| {
        node_normal_curvature(&n.sample.sff, &n.sample.frame, &n.sample.geom.metric)
    })
}

// ---- aggregation ----

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub frame: FrameOptions,
    /// Defaults to [`Tolerances::for_surface`].
    pub tolerances: Option<Tolerances>,
    /// Expected `|H|`, checked when given.
    pub expected_mean_curvature: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            frame: FrameOptions::default(),
            tolerances: None,
            expected_mean_curvature: None,
        }
    }
}

fn grid_meta(spec: &GridSpec, step: f64) -> GridMeta {
    GridMeta {
        nu: spec.nu,
        nv: spec.nv,
        u: spec.domain.u,
        v: spec.domain.v,
        stencil_step: step,
    }
}

/// Evaluates the grid and runs every applicable check.
pub fn verify_surface(
    surface: &dyn Immersion,
    spec: &GridSpec,
    opts: &VerifyOptions,
) -> VerificationReport {
    let tol = opts
        .tolerances
        .unwrap_or_else(|| Tolerances::for_surface(surface));
    let mut report = VerificationReport {
        schema: REPORT_SCHEMA.into(),
        surface: surface.name(),
        grid: grid_meta(spec, spec.step_for(surface.analytic_jets())),
        tolerances: tol,
        entries: vec![],
        skipped: vec![],
        diagnostics: Diagnostics::default(),
        degeneracies: vec![],
        solver: None,
        verdict: Verdict::Degenerate,
    };
    match evaluate_grid(surface, spec, &opts.frame) {
        Ok(grid) => check_grid(&grid, &tol, opts.expected_mean_curvature, &mut report),
        Err(g) => report.degeneracies.push(Degeneracy {
            kind: g.error.kind().into(),
            message: g.error.to_string(),
            node: Some((g.i, g.j)),
            at: Some((g.u, g.v)),
        }),
    }
    report.finalize();
    report
}

/// Runs every check on an evaluated grid.
pub fn verify_grid(
    grid: &SurfaceGrid,
    tol: &Tolerances,
    expected_mean_curvature: Option<f64>,
) -> VerificationReport {
    let mut report = VerificationReport {
        schema: REPORT_SCHEMA.into(),
        surface: grid.surface.clone(),
        grid: grid_meta(&grid.spec, grid.step),
        tolerances: *tol,
        entries: vec![],
        skipped: vec![],
        diagnostics: Diagnostics::default(),
        degeneracies: vec![],
        solver: None,
        verdict: Verdict::Degenerate,
    };
    check_grid(grid, tol, expected_mean_curvature, &mut report);
    report.finalize();
    report
}

fn check_grid(
    grid: &SurfaceGrid,
    tol: &Tolerances,
    expected: Option<f64>,
    report: &mut VerificationReport,
) {
    let alg = tol.algebraic;
    let st = tol.stencil;
    let push = |r: &mut VerificationReport, name: &str, value: f64, t: f64, tier: Tier| {
        r.entries.push(Entry::new(name, value, t, tier));
    };
    let nodes = &grid.nodes;
    let metric_of = |n: &NodeData| n.sample.geom.metric.clone();

    // parallel mean curvature and its length
    let pmcv = crate::shape::pmcv_residual(grid);
    push(report, "pmcv", pmcv, st, Tier::Stencil);
    let hsq: Vec<f64> = nodes.iter().map(|n| n.sample.h_squared()).collect();
    let hsq_range = Range::of(hsq.iter().copied());
    if let Some(r) = hsq_range {
        push(
            report,
            "mean-curvature-constancy",
            r.max - r.min,
            alg,
            Tier::Algebraic,
        );
    }
    if let Some(h0) = expected {
        let dev = hsq
            .iter()
            .map(|q| (q.max(0.0).sqrt() - h0).abs())
            .fold(0.0, f64::max);
        push(report, "mean-curvature-value", dev, alg, Tier::Algebraic);
    }

    // tangential bitension condition
    push(
        report,
        "biconservativity",
        biconservativity_residual(grid),
        st,
        Tier::Stencil,
    );
    let trace = grid_max(grid, |n| {
        let s = &n.sample;
        let e = [&s.frame.e1, &s.frame.e2];
        curvature_trace_term(
            &s.geom.curvature_scalars(),
            &s.geom.metric,
            e,
            &s.sff.mean_curvature,
            &s.geom.time_vector(),
        )
        .defect
    });
    push(
        report,
        "curvature-trace-identity",
        trace,
        alg,
        Tier::Algebraic,
    );
    let defect = nodes
        .iter()
        .map(|n| n.sample.geom.curvature_scalars().defect().abs())
        .fold(0.0, f64::max);
    report.diagnostics.curvature_defect = Some(defect);
    let reduced = grid_max(grid, |n| {
        reduced_criterion(&n.sample.frame, &n.sample.sff.mean_curvature, &metric_of(n))
    });
    if defect > 1e-12 {
        push(report, "reduced-criterion", reduced, alg, Tier::Algebraic);
    } else {
        report.skipped.push(Skipped {
            name: "reduced-criterion".into(),
            reason: format!(
                "constant-curvature ambient; |<H, eta>| = {reduced:.3e} carries no obstruction"
            ),
        });
    }

    // integrability
    let (r1, r2) = codazzi_residuals(grid);
    push(report, "codazzi-r1", r1, st, Tier::Stencil);
    push(report, "codazzi-r2", r2, st, Tier::Stencil);
    let fi = frame_identity_residuals(grid);
    for (k, name) in [
        "frame-identity-a",
        "frame-identity-b",
        "frame-identity-c",
        "frame-identity-d",
    ]
    .iter()
    .enumerate()
    {
        push(report, name, fi[k], st, Tier::Stencil);
    }
    push(
        report,
        "flat-normal-bundle",
        flat_normal_bundle_check(grid),
        alg,
        Tier::Algebraic,
    );

    // causal character of H
    let mut causal = vec![];
    let mut null_nodes = 0usize;
    for n in nodes {
        let m = &n.sample.geom.metric;
        let h = &n.sample.sff.mean_curvature;
        let c = marginally_trapped_check(h, m, tol.null_band);
        if n.sample.frame.norm(h, m) <= 1e-8 {
            continue;
        }
        if c == CausalCharacter::Null {
            null_nodes += 1;
        }
        if !causal.contains(&c) {
            causal.push(c);
        }
    }
    causal.sort_by_key(|c| *c as u8);
    push(
        report,
        "marginally-trapped",
        null_nodes as f64 / nodes.len().max(1) as f64,
        0.0,
        Tier::Algebraic,
    );
    report.diagnostics.causal_character = causal;

    // structure with e4 = H/|H|
    match prop33_structure_check(grid) {
        Ok(s) => {
            let v = [
                s.a4_11,
                s.a4_12,
                s.a4_22,
                s.trace_other,
                s.offdiag_other,
                s.nabla_e4,
                s.e4_eta,
            ];
            for (k, name) in STRUCTURE_NAMES.iter().enumerate() {
                let tier = if k == 5 {
                    Tier::Stencil
                } else {
                    Tier::Algebraic
                };
                push(report, name, v[k], if k == 5 { st } else { alg }, tier);
            }
        }
        Err((i, j)) => {
            let n = grid.node(i, j);
            report.degeneracies.push(Degeneracy {
                kind: "minimal-direction".into(),
                message: "mean curvature vector too small to define e4; structure checks not run"
                    .into(),
                node: Some((i, j)),
                at: Some((n.u, n.v)),
            });
        }
    }

    // diagnostics
    let d = &mut report.diagnostics;
    let thetas: Vec<f64> = nodes.iter().map(|n| n.sample.frame.theta).collect();
    d.theta = Range::of(thetas.iter().copied());
    if !thetas.is_empty() {
        let mean = thetas.iter().sum::<f64>() / thetas.len() as f64;
        d.theta_variance =
            Some(thetas.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / thetas.len() as f64);
    }
    d.gamma = Range::of(nodes.iter().map(|n| n.sample.sff.shape_e3().get(0, 0)));
    d.tau = Range::of(nodes.iter().filter_map(|n| {
        let s = &n.sample;
        let k = if s.frame.e4.is_some() { 2 } else { 1 };
        s.sff.shape.get(k).map(|a| a.get(0, 0))
    }));
    d.h_squared = hsq_range;
    d.h0 = Range::of(hsq.iter().filter(|q| **q > 0.0).map(|q| q.sqrt()));
    let dims: Vec<(usize, usize)> = nodes
        .par_iter()
        .map(|n| node_normal_space_dims(n, tol.rank))
        .collect();
    if !dims.is_empty() {
        let mut nd = NormalSpaceDims {
            n1_min: usize::MAX,
            n1_max: 0,
            n2_min: usize::MAX,
            n2_max: 0,
        };
        for (a, b) in dims {
            nd.n1_min = nd.n1_min.min(a);
            nd.n1_max = nd.n1_max.max(a);
            nd.n2_min = nd.n2_min.min(b);
            nd.n2_max = nd.n2_max.max(b);
        }
        d.normal_space_dims = Some(nd);
    }
}
