//! CSV writers. Floats are written with 17 significant digits.

use std::io::Write;

use crate::ambient::WarpingFunction;
use crate::catalog::ScanRow;
use crate::error::Result;
use crate::grid::SurfaceGrid;
use crate::immersion::Immersion;
use crate::solvers::SystemSolution;
use crate::verdicts::{node_biconservativity, node_codazzi, reduced_criterion};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn row<W: Write>(w: &mut csv::Writer<W>, values: &[f64]) -> Result<()> {
    w.write_record(values.iter().map(|x| fmt_f64(*x)))?;
    Ok(())
}

/// `t, f, f', f''` at each `t`.
pub fn write_warp_csv<W: Write>(out: W, warp: &WarpingFunction, ts: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "f", "fp", "fpp"])?;
    for &t in ts {
        let (f, fp, fpp) = warp.eval(t)?;
        row(&mut w, &[t, f, fp, fpp])?;
    }
    w.flush()?;
    Ok(())
}

/// `t, f, f', f'', y, y'` at each `t`.
pub fn write_system_csv<W: Write>(out: W, sol: &SystemSolution, ts: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "f", "fp", "fpp", "y", "yp"])?;
    for &t in ts {
        let (f, fp, fpp) = sol.warp.eval(t)?;
        let (y, yp, _) = sol.y(t)?;
        row(&mut w, &[t, f, fp, fpp, y, yp])?;
    }
    w.flush()?;
    Ok(())
}

/// `u, v, x0, x1, ..` on an `nu x nv` sampling of the parameter domain.
pub fn write_surface_csv<W: Write>(
    out: W,
    surface: &dyn Immersion,
    nu: usize,
    nv: usize,
) -> Result<()> {
    let d = surface.domain();
    let us = crate::catalog::linspace(d.u.0, d.u.1, nu);
    let vs = crate::catalog::linspace(d.v.0, d.v.1, nv);
    let n = surface.ambient().coord_dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["u".to_string(), "v".to_string()];
    header.extend((0..n).map(|k| format!("x{k}")));
    w.write_record(&header)?;
    for &u in &us {
        for &v in &vs {
            let p = surface.position(u, v)?;
            let mut r = vec![u, v];
            r.extend_from_slice(p.as_slice());
            row(&mut w, &r)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `theta, tau, residual, bound` per scan node.
pub fn write_scan_csv<W: Write>(out: W, rows: &[ScanRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "tau", "residual", "bound"])?;
    for r in rows {
        row(&mut w, &[r.theta, r.tau, r.residual, r.bound])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-node residuals of an evaluated grid.
pub fn write_residual_grid_csv<W: Write>(out: W, grid: &SurfaceGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "i",
        "j",
        "u",
        "v",
        "theta",
        "h_squared",
        "pmcv",
        "biconservativity",
        "reduced",
        "codazzi_r1",
        "codazzi_r2",
    ])?;
    for n in &grid.nodes {
        let s = &n.sample;
        let m = &s.geom.metric;
        let pm = n
            .deriv
            .nabla_perp_mean
            .iter()
            .map(|d| s.frame.norm(d, m))
            .fold(0.0, f64::max);
        let (r1, r2) = node_codazzi(n);
        let mut rec = vec![n.i.to_string(), n.j.to_string()];
        rec.extend(
            [
                n.u,
                n.v,
                s.frame.theta,
                s.h_squared(),
                pm,
                node_biconservativity(n),
                reduced_criterion(&s.frame, &s.sff.mean_curvature, m),
                r1,
                r2,
            ]
            .iter()
            .map(|x| fmt_f64(*x)),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
