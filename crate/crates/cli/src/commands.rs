use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use bicons_core::catalog::{
    linspace, nonexistence_scan_h4, nonexistence_slice_check, ProductE11S4, RotationalL4,
    ScanResult, SurfaceL5, SurfaceSpec,
};
use bicons_core::export::{
    fmt_f64, write_residual_grid_csv, write_scan_csv, write_surface_csv, write_system_csv,
    write_warp_csv,
};
use bicons_core::grid::{evaluate_grid, GridSpec};
use bicons_core::immersion::{FrameOptions, Immersion, ParamDomain};
use bicons_core::solvers::thm5::reference_fixture;
use bicons_core::solvers::{
    solve_f_theorem4, solve_system_theorem5, validate_constants, ConstantsL4, ConstantsL5,
    ConstantsProduct, RawConstants, SolveSummary, SolverConfig, Sys5Initial, ValidatedConstants,
};
use bicons_core::verdicts::{
    verify_grid, verify_surface, Tolerances, VerificationReport, VerifyOptions,
};
use bicons_core::{Error, Result};
use clap::ValueEnum;

use crate::config::{
    GridParams, OutputParams, ScanParams, SolverParams, SurfaceParams, ToleranceParams,
};
use crate::user_map::user_map;

/// Exit code plus the `key=value` fields of the status line.
pub struct Outcome {
    pub code: i32,
    pub fields: Vec<(&'static str, String)>,
}

impl Outcome {
    pub fn status_line(&self) -> String {
        let status = match self.code {
            0 => "pass",
            1 => "fail",
            _ => "degenerate",
        };
        let mut s = format!("status={status} code={}", self.code);
        for (k, v) in &self.fields {
            if v.contains(' ') || v.contains('"') {
                s.push_str(&format!(" {k}={v:?}"));
            } else {
                s.push_str(&format!(" {k}={v}"));
            }
        }
        s
    }
}

pub fn error_line(e: &Error) -> String {
    format!(
        "status=invalid code=2 kind={} detail={:?}",
        e.kind(),
        e.to_string()
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    Thm4,
    Thm5,
    Product,
    UserMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveTarget {
    F4,
    Sys5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanTarget {
    H4,
    Slice,
}

/// Writes to `path`, or to stdout when absent.
fn with_output<F>(path: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let mut w = BufWriter::new(
                File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
            );
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn solver_config(p: &SolverParams) -> Result<SolverConfig> {
    let d = SolverConfig::default();
    let c = SolverConfig {
        max_step: p.max_step.unwrap_or(5e-3),
        rtol: p.rtol.unwrap_or(d.rtol),
        atol: p.atol.unwrap_or(d.atol),
        ..d
    }
    .with_interval(p.t_min.unwrap_or(-0.5), p.t_max.unwrap_or(0.5));
    c.validate()?;
    Ok(c)
}

fn range(r: &Option<Vec<f64>>, name: &str) -> Result<Option<(f64, f64)>> {
    match r.as_deref() {
        None => Ok(None),
        Some([lo, hi]) => Ok(Some((*lo, *hi))),
        Some(_) => Err(Error::Usage(format!("{name} takes two values lo,hi"))),
    }
}

fn domain(p: &SurfaceParams) -> Result<Option<ParamDomain>> {
    let u = range(&p.u_range, "u-range")?;
    let v = range(&p.v_range, "v-range")?;
    match (u, v) {
        (None, None) => Ok(None),
        (Some(u), Some(v)) => Ok(Some(ParamDomain::new(u, v)?)),
        _ => Err(Error::Usage(
            "give both u-range and v-range or neither".into(),
        )),
    }
}

fn l4_constants(p: &SurfaceParams) -> Result<ConstantsL4> {
    match validate_constants(RawConstants::L4 {
        a: p.a.unwrap_or(2.0),
        h0: p.h0.unwrap_or(0.5),
        c2: None,
    })? {
        ValidatedConstants::L4(k) => Ok(k),
        _ => unreachable!(),
    }
}

fn l5_setup(p: &SurfaceParams) -> Result<(ConstantsL5, Sys5Initial)> {
    let (k, init) = reference_fixture();
    let k = match validate_constants(RawConstants::L5 {
        a: p.a.unwrap_or(k.a),
        h0: p.h0.unwrap_or(k.h0),
        c2: None,
        c3: p.c3.unwrap_or(k.c3),
    })? {
        ValidatedConstants::L5(k) => k,
        _ => unreachable!(),
    };
    let init = Sys5Initial {
        f0: p.f0.unwrap_or(init.f0),
        f0p: p.f0p.unwrap_or(init.f0p),
        y0: p.y0.unwrap_or(init.y0),
        y0p: p.y0p.unwrap_or(init.y0p),
    };
    Ok((k, init))
}

fn product_constants(p: &SurfaceParams) -> Result<ConstantsProduct> {
    let b1 = p.b1.unwrap_or(1.0);
    let b3 = p.b3.unwrap_or(0.5);
    match (p.b2, p.force_b4) {
        (Some(_), Some(_)) => Err(Error::Usage(
            "b2 and force-b4 are mutually exclusive".into(),
        )),
        (None, Some(b4)) => ConstantsProduct::with_b4(b1, b3, b4),
        (b2, None) => match validate_constants(RawConstants::Product { b1, b2, b3 })? {
            ValidatedConstants::Product(k) => Ok(k),
            _ => unreachable!(),
        },
    }
}

struct Built {
    surface: Box<dyn Immersion>,
    expected: Option<f64>,
    solver: Option<SolveSummary>,
}

fn build_surface(target: VerifyTarget, p: &SurfaceParams, s: &SolverParams) -> Result<Built> {
    let dom = domain(p)?;
    let (spec, solver) = match target {
        VerifyTarget::Thm4 => {
            let k = l4_constants(p)?;
            let sol = solve_f_theorem4(
                &k,
                p.f0.unwrap_or(1.0),
                p.f0p.unwrap_or(2.0),
                &solver_config(s)?,
            )?;
            let summary = sol.summary();
            (
                SurfaceSpec::RotationalL4(RotationalL4::new(k, sol.warp, dom)?),
                Some(summary),
            )
        }
        VerifyTarget::Thm5 => {
            let (k, init) = l5_setup(p)?;
            let sol = solve_system_theorem5(&k, init, &solver_config(s)?)?;
            let summary = sol.summary();
            (
                SurfaceSpec::SurfaceL5(SurfaceL5::new(sol, dom)?),
                Some(summary),
            )
        }
        VerifyTarget::Product => (
            SurfaceSpec::ProductE11S4(ProductE11S4::new(product_constants(p)?, dom)?),
            None,
        ),
        VerifyTarget::UserMap => {
            let components = p.components.as_deref().unwrap_or_default();
            if components.is_empty() {
                return Err(Error::Usage(
                    "user-map needs one --component per coordinate".into(),
                ));
            }
            let d = match dom {
                Some(d) => d,
                None => ParamDomain::new((-0.5, 0.5), (-0.5, 0.5))?,
            };
            return Ok(Built {
                surface: Box::new(user_map(components, d, p.warp.clone())?),
                expected: None,
                solver: None,
            });
        }
    };
    let expected = Some(spec.expected_mean_curvature());
    let surface: Box<dyn Immersion> = match spec {
        SurfaceSpec::RotationalL4(x) => Box::new(x),
        SurfaceSpec::SurfaceL5(x) => Box::new(x),
        SurfaceSpec::ProductE11S4(x) => Box::new(x),
    };
    Ok(Built {
        surface,
        expected,
        solver,
    })
}

fn tolerances(surface: &dyn Immersion, p: &ToleranceParams) -> Result<Tolerances> {
    let d = Tolerances::for_surface(surface);
    let t = Tolerances {
        algebraic: p.algebraic.unwrap_or(d.algebraic),
        stencil: p.stencil.unwrap_or(d.stencil),
        null_band: p.null_band.unwrap_or(d.null_band),
        rank: p.rank.unwrap_or(d.rank),
    };
    if ![t.algebraic, t.stencil, t.null_band, t.rank]
        .iter()
        .all(|x| *x > 0.0 && x.is_finite())
    {
        return Err(Error::Usage("tolerances must be positive".into()));
    }
    Ok(t)
}

pub struct VerifyArgs {
    pub surface: SurfaceParams,
    pub grid: GridParams,
    pub tolerances: ToleranceParams,
    pub solver: SolverParams,
    pub output: OutputParams,
}

pub fn verify(target: VerifyTarget, a: &VerifyArgs) -> Result<Outcome> {
    let built = build_surface(target, &a.surface, &a.solver)?;
    let surface = built.surface.as_ref();
    let n = a.grid.grid.unwrap_or(17);
    let spec = GridSpec {
        nu: a.grid.nu.unwrap_or(n),
        nv: a.grid.nv.unwrap_or(n),
        domain: surface.domain(),
        stencil_step: a.grid.stencil_step,
    };
    spec.validate()?;
    let tol = tolerances(surface, &a.tolerances)?;
    let frame = FrameOptions::default();
    let mut report = match evaluate_grid(surface, &spec, &frame) {
        Ok(grid) => {
            if let Some(path) = &a.output.residuals_csv {
                with_output(Some(path), |w| write_residual_grid_csv(w, &grid))?;
            }
            verify_grid(&grid, &tol, built.expected)
        }
        Err(_) => verify_surface(
            surface,
            &spec,
            &VerifyOptions {
                frame,
                tolerances: Some(tol),
                expected_mean_curvature: built.expected,
            },
        ),
    };
    report.solver = built.solver;
    if let Some(path) = &a.output.surface_csv {
        with_output(Some(path), |w| {
            write_surface_csv(w, surface, spec.nu, spec.nv)
        })?;
    }
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Io(format!("serializing report: {e}")))?;
    with_output(a.output.out.as_deref(), |w| {
        writeln!(w, "{json}")?;
        Ok(())
    })?;
    Ok(Outcome {
        code: report.verdict.exit_code(),
        fields: vec![
            ("surface", report.surface.clone()),
            ("entries", report.entries.len().to_string()),
            ("detail", report.reason()),
        ],
    })
}

pub struct SolveArgs {
    pub surface: SurfaceParams,
    pub solver: SolverParams,
    pub output: OutputParams,
}

fn summary_fields(s: &SolveSummary) -> Vec<(&'static str, String)> {
    vec![
        (
            "admissible",
            format!("{},{}", fmt_f64(s.admissible.0), fmt_f64(s.admissible.1)),
        ),
        ("steps", s.accepted_steps.to_string()),
        ("forward", s.forward.to_string()),
        ("backward", s.backward.to_string()),
    ]
}

pub fn solve(target: SolveTarget, a: &SolveArgs) -> Result<Outcome> {
    let config = solver_config(&a.solver)?;
    let samples = a.output.samples.unwrap_or(201);
    if samples < 2 {
        return Err(Error::Usage("samples must be at least 2".into()));
    }
    let out = a.output.out.as_deref();
    let summary = match target {
        SolveTarget::F4 => {
            let k = l4_constants(&a.surface)?;
            let sol = solve_f_theorem4(
                &k,
                a.surface.f0.unwrap_or(1.0),
                a.surface.f0p.unwrap_or(2.0),
                &config,
            )?;
            let (lo, hi) = sol.admissible();
            with_output(out, |w| {
                write_warp_csv(w, &sol.warp, &linspace(lo, hi, samples))
            })?;
            sol.summary()
        }
        SolveTarget::Sys5 => {
            let (k, init) = l5_setup(&a.surface)?;
            let sol = solve_system_theorem5(&k, init, &config)?;
            let (lo, hi) = sol.admissible();
            with_output(out, |w| {
                write_system_csv(w, &sol, &linspace(lo, hi, samples))
            })?;
            sol.summary()
        }
    };
    Ok(Outcome {
        code: 0,
        fields: summary_fields(&summary),
    })
}

fn axis(r: &Option<Vec<f64>>, default: (f64, f64, usize), name: &str) -> Result<Vec<f64>> {
    let (lo, hi, n) = match r.as_deref() {
        None => default,
        Some([lo, hi, n]) => {
            if !(*n >= 0.0 && n.fract() == 0.0) {
                return Err(Error::Usage(format!(
                    "{name}: node count must be a whole number"
                )));
            }
            (*lo, *hi, *n as usize)
        }
        Some(_) => return Err(Error::Usage(format!("{name} takes lo,hi,n"))),
    };
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Usage(format!("{name}: bounds must be finite")));
    }
    Ok(linspace(lo, hi, n))
}

pub struct ScanArgs {
    pub scan: ScanParams,
    pub output: OutputParams,
}

pub fn scan(target: ScanTarget, a: &ScanArgs) -> Result<Outcome> {
    let result: ScanResult = match target {
        ScanTarget::H4 => nonexistence_scan_h4(
            &axis(&a.scan.theta, (0.1, 3.0, 301), "theta")?,
            &axis(&a.scan.tau, (0.0, 5.0, 501), "tau")?,
        )?,
        ScanTarget::Slice => nonexistence_slice_check(
            a.scan.c.unwrap_or(1.0),
            &axis(&a.scan.theta, (-3.0, 3.0, 601), "theta")?,
        )?,
    };
    if let Some(path) = &a.output.out {
        with_output(Some(path), |w| write_scan_csv(w, &result.rows))?;
    }
    Ok(Outcome {
        code: if result.bound_holds { 0 } else { 1 },
        fields: vec![
            ("min_abs_residual", fmt_f64(result.min_abs_residual)),
            ("nodes", result.rows.len().to_string()),
            ("excluded", result.excluded.to_string()),
            ("bound_holds", result.bound_holds.to_string()),
        ],
    })
}

/// Human-readable rendering of a saved report.
pub fn render_report(r: &VerificationReport) -> String {
    let mut s = String::new();
    let g = &r.grid;
    s += &format!("surface   {}  ({})\n", r.surface, r.schema);
    s += &format!(
        "grid      {} x {} on u [{}, {}], v [{}, {}], stencil step {:.3e}\n",
        g.nu, g.nv, g.u.0, g.u.1, g.v.0, g.v.1, g.stencil_step
    );
    if let Some(sv) = &r.solver {
        s += &format!(
            "solver    admissible [{:.6}, {:.6}], {} steps, forward {}, backward {}\n",
            sv.admissible.0, sv.admissible.1, sv.accepted_steps, sv.forward, sv.backward
        );
    }
    let width = r.entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
    for e in &r.entries {
        s += &format!(
            "  {}  {:<width$}  {:.3e}  (tol {:.1e})\n",
            if e.passed { "PASS" } else { "FAIL" },
            e.name,
            e.value,
            e.tolerance,
        );
    }
    for k in &r.skipped {
        s += &format!("  SKIP  {}: {}\n", k.name, k.reason);
    }
    for d in &r.degeneracies {
        s += &format!("  DEGENERATE  {}: {}", d.kind, d.message);
        if let Some((i, j)) = d.node {
            s += &format!(" at node ({i}, {j})");
        }
        s += "\n";
    }
    let dg = &r.diagnostics;
    if let Some(t) = dg.theta {
        s += &format!("theta     [{:.6}, {:.6}]\n", t.min, t.max);
    }
    if let Some(h) = dg.h0 {
        s += &format!("|H|       [{:.6}, {:.6}]\n", h.min, h.max);
    }
    if let Some(n) = &dg.normal_space_dims {
        s += &format!("normal    {n:?}\n");
    }
    s += &format!("verdict   {}\n", r.reason());
    s
}

pub fn report(path: &Path) -> Result<Outcome> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let r: VerificationReport = serde_json::from_str(&text)
        .map_err(|e| Error::Usage(format!("{}: not a report: {e}", path.display())))?;
    with_output(None, |w| {
        write!(w, "{}", render_report(&r))?;
        Ok(())
    })?;
    Ok(Outcome {
        code: r.verdict.exit_code(),
        fields: vec![("detail", r.reason())],
    })
}
