mod common;

use bicons_core::catalog::{
    h4_obstruction, linspace, nonexistence_scan_h4, nonexistence_slice_check, ProductE11S4,
    SurfaceSpec,
};
use bicons_core::error::Error;
use bicons_core::export::{write_scan_csv, write_surface_csv, write_system_csv, write_warp_csv};
use bicons_core::immersion::{induced_metric, Immersion};
use bicons_core::solvers::ConstantsProduct;
use common::*;

#[test]
fn h4_scan_certifies_the_bound_everywhere() {
    let thetas = linspace(0.1, 3.0, 59);
    let taus = linspace(0.0, 5.0, 51);
    let r = nonexistence_scan_h4(&thetas, &taus).unwrap();
    assert_eq!(r.rows.len(), 59 * 51);
    assert_eq!(r.excluded, 0);
    assert!(r.bound_holds);
    let floor = 0.1f64.tanh();
    for row in &r.rows {
        // every term is non-negative for theta > 0, so the first term alone bounds it
        let independent = row.theta.sinh() * row.theta.cosh() + row.tau.powi(2) * row.theta.tanh();
        assert_eq!(row.residual, independent);
        assert!(row.residual.abs() >= floor);
    }
    assert!((r.min_abs_residual - 0.1f64.sinh() * 0.1f64.cosh()).abs() < 1e-15);
}

#[test]
fn obstruction_is_odd_in_theta() {
    for theta in linspace(-3.0, 3.0, 31) {
        for tau in linspace(0.0, 5.0, 11) {
            assert_eq!(h4_obstruction(-theta, tau), -h4_obstruction(theta, tau));
        }
    }
}

#[test]
fn slice_scan_is_positive_off_zero() {
    let thetas = linspace(-3.0, 3.0, 61);
    for c in [-1.0, 1.0] {
        let r = nonexistence_slice_check(c, &thetas).unwrap();
        assert_eq!(r.excluded, 1);
        assert!(r.rows.iter().all(|row| row.residual > 0.0));
        assert!(r.bound_holds);
    }
    assert!(matches!(
        nonexistence_slice_check(0.0, &thetas),
        Err(Error::Inapplicable(_))
    ));
    assert!(matches!(
        nonexistence_slice_check(1.0, &[]),
        Err(Error::Usage(_))
    ));
    assert!(matches!(
        nonexistence_scan_h4(&[], &[1.0]),
        Err(Error::Usage(_))
    ));
    assert!(matches!(
        nonexistence_scan_h4(&[0.0], &[1.0]),
        Err(Error::Usage(_))
    ));
}

#[test]
fn time_coordinate_and_circle_radius() {
    let s4 = thm4_surface();
    for (u, v) in interior_points(&s4, 5) {
        let p = s4.position(u, v).unwrap();
        assert_eq!(p[0], u);
        let (f, _, _) = s4.ambient().warp().eval(u).unwrap();
        assert!((p[1].hypot(p[2]) - 1.0 / (2.0 * f)).abs() < 1e-14);
        let jet = s4.jet(u, v).unwrap();
        let geom = s4.ambient().point(&jet.point).unwrap();
        let g = induced_metric(&jet, &geom.metric).unwrap();
        assert!(g.is_positive_definite());
    }
    let s5 = thm5_surface();
    for (u, v) in interior_points(&s5, 5) {
        let p = s5.position(u, v).unwrap();
        assert_eq!(p[0], u);
        let (f, _, _) = s5.ambient().warp().eval(u).unwrap();
        assert!((p[1].hypot(p[2]) - 1.0 / (2.0 * f)).abs() < 1e-14);
    }
    let sp = product_surface();
    for (u, v) in interior_points(&sp, 5) {
        assert_eq!(sp.position(u, v).unwrap()[0], -u);
    }
}

#[test]
fn closed_form_identities() {
    let s5 = thm5_surface();
    for (u, v) in interior_points(&s5, 8) {
        assert!(s5.plane_constraint_residual(u, v).unwrap() < 1e-12);
    }
    for s in [product_surface(), broken_product_surface()] {
        for (u, v) in interior_points(&s, 8) {
            assert!(s.fiber_norm_residual(u, v).unwrap() < 1e-12);
        }
    }
}

#[test]
fn product_family_by_b4() {
    let k = ConstantsProduct::with_b4(1.0, 0.5, 0.0).unwrap();
    assert!((k.b2 - 1.0 / 12f64.sqrt()).abs() < 1e-14);
    let k = ConstantsProduct::with_b4(1.0, 0.5, -0.15).unwrap();
    assert!((k.b4() + 0.15).abs() < 1e-13);
    let broken = ConstantsProduct::unchecked(1.0, 0.4, 0.5).unwrap();
    assert!((broken.b4() + 0.1497).abs() < 1e-3);
    assert!(ConstantsProduct::with_b4(1.0, 0.9, 0.0).is_err());
    let s = ProductE11S4::new(k, None).unwrap();
    assert!((s.frequency() - 2f64.sqrt() / k.b0()).abs() < 1e-15);
}

#[test]
fn surface_spec_dispatch() {
    let spec = SurfaceSpec::ProductE11S4(product_surface());
    assert_eq!(spec.immersion().name(), "product-e11-s4");
    assert!((spec.expected_mean_curvature() - 0.5).abs() < 1e-12);
    let spec = SurfaceSpec::RotationalL4(thm4_surface());
    assert_eq!(spec.expected_mean_curvature(), 0.5);
}

#[test]
fn csv_exports_round_trip() {
    let s5 = thm5_surface();
    let ts = linspace(-0.4, 0.4, 9);
    let mut buf = Vec::new();
    write_system_csv(&mut buf, s5.solution(), &ts).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(
        rd.headers().unwrap(),
        vec!["t", "f", "fp", "fpp", "y", "yp"]
    );
    let rows: Vec<Vec<f64>> = rd
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for (row, t) in rows.iter().zip(&ts) {
        assert_eq!(row[0], *t);
        let (f, fp, fpp) = s5.ambient().warp().eval(*t).unwrap();
        assert_eq!(&row[1..4], &[f, fp, fpp]);
    }

    let mut buf = Vec::new();
    write_warp_csv(
        &mut buf,
        thm4_surface().ambient().warp(),
        &linspace(-0.4, 0.1, 9),
    )
    .unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 10);

    let mut buf = Vec::new();
    write_surface_csv(&mut buf, &product_surface(), 3, 4).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "u,v,x0,x1,x2,x3,x4,x5");
    assert_eq!(text.lines().count(), 13);

    let scan = nonexistence_scan_h4(&[0.5], &[0.0, 1.0]).unwrap();
    let mut buf = Vec::new();
    write_scan_csv(&mut buf, &scan.rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "theta,tau,residual,bound");
    assert_eq!(text.lines().count(), 3);
}

mod random_nodes {
    use super::*;
    use proptest::prelude::*;
    use proptest::test_runner::RngSeed;

    proptest! {
        #![proptest_config(ProptestConfig { rng_seed: RngSeed::Fixed(0x5ca7), ..ProptestConfig::default() })]

        #[test]
        fn h4_bound_off_grid(theta in 0.1f64..3.0, tau in 0.0f64..5.0) {
            let r = nonexistence_scan_h4(&[theta], &[tau]).unwrap();
            prop_assert!(r.bound_holds);
            prop_assert!(h4_obstruction(theta, tau).abs() >= 0.1f64.tanh());
        }

        #[test]
        fn slice_positive(theta in -3.0f64..3.0) {
            prop_assume!(theta != 0.0);
            prop_assert!(nonexistence_slice_check(1.0, &[theta]).unwrap().rows[0].residual > 0.0);
        }
    }
}
