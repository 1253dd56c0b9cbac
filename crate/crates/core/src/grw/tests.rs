use super::*;
use crate::numeric::root;

fn desitter(m: usize) -> GrwSpace {
    GrwSpace::new(WarpingProfile::cosh(), FibreModel::sphere(m, 1.0))
}

#[test]
fn metric_evaluation_basics() {
    let sp = desitter(3);
    let p = [0.7, 1.0, 1.2, 0.3];
    let dt = [1.0, 0.0, 0.0, 0.0];
    assert_eq!(sp.metric_eval(&p, &dt, &dt).unwrap(), -1.0);
    let z = sp.zeta(&p).unwrap();
    assert!((sp.metric_eval(&p, &z, &z).unwrap() + 0.7f64.cosh().powi(2)).abs() < 1e-14);
    assert_eq!(sp.metric_eval(&p, &dt, &[0.0, 1.0, 0.0, 0.0]).unwrap(), 0.0);
    assert!(matches!(
        GrwSpace::new(WarpingProfile::parse("cos(t)", &[], -1.5, 1.5).unwrap(), FibreModel::euclidean(2))
            .metric_eval(&[2.0, 0.0, 0.0], &dt[..3], &dt[..3]),
        Err(Error::OutsideInterval { .. })
    ));
}

#[test]
fn catalog_inverses() {
    let one = WarpingProfile::constant(1.0);
    assert!((one.quad_invert(Quadrature::A, 0.3, 1.7).unwrap() - 2.0).abs() < 1e-15);
    let ch = WarpingProfile::cosh();
    assert!(ch.has_closed_form());
    for sigma in [-3.0, 0.2, 5.0] {
        let t = ch.quad_invert(Quadrature::A, 0.0, sigma).unwrap();
        assert!((t - f64::asinh(sigma)).abs() < 1e-14);
    }
    let tc = ch.c_inv(0.0, std::f64::consts::FRAC_PI_4).unwrap();
    let oracle = root::brent(
        |t| 2.0 * (t / 2.0).tanh().atan() - std::f64::consts::FRAC_PI_4,
        0.0,
        3.0,
        1e-15,
        200,
    )
    .unwrap();
    assert!((tc - oracle).abs() < 1e-12);
    assert!((tc - 0.881374).abs() < 1e-6);
    assert!((ch.total_c() - std::f64::consts::PI).abs() < 1e-14);
    assert!(matches!(ch.c_inv(0.0, 1.7), Err(Error::QuadratureRange { .. })));
}

#[test]
fn numeric_tables_match_closed_forms() {
    let exact = WarpingProfile::parse("cosh(t)", &[], -4.0, 4.0).unwrap();
    let table = WarpingProfile::parse("1*cosh(t)", &[], -4.0, 4.0).unwrap();
    assert!(exact.has_closed_form() && !table.has_closed_form());
    for t in [-3.9, -1.0, 0.0, 0.4, 2.5, 3.99] {
        for which in [Quadrature::A, Quadrature::C] {
            let a = exact.quad(which, 0.3, t).unwrap();
            let b = table.quad(which, 0.3, t).unwrap();
            assert!((a - b).abs() < 1e-12, "{which:?} {t} {a} {b}");
        }
    }
    let t = table.c_inv(0.0, 0.9).unwrap();
    assert!((t - exact.c_inv(0.0, 0.9).unwrap()).abs() < 1e-12);
}

#[test]
fn inverse_round_trip_across_range() {
    let prof = WarpingProfile::parse("2 + sin(3*t)", &[], 0.0, 6.0).unwrap();
    let (lo, hi) = prof.quad_range(Quadrature::C, 2.0).unwrap();
    for i in 1..100 {
        let v = lo + (hi - lo) * i as f64 / 100.0;
        let t = prof.c_inv(2.0, v).unwrap();
        assert!((prof.c(2.0, t).unwrap() - v).abs() <= 1e-10 * (1.0 + v.abs()));
    }
}

#[test]
fn null_geodesic_straight_line_in_minkowski() {
    let sp = GrwSpace::new(WarpingProfile::constant(1.0), FibreModel::euclidean(3));
    let u = [0.6, 0.0, 0.8];
    let c = sp.null_geodesic_quadrature(0.5, &[1.0, 2.0, 3.0], &u, Orientation::Future, &[0.0, 1.0, 2.5]).unwrap();
    for (k, s) in c.params.iter().enumerate() {
        let p = &c.points[k];
        assert!((p[0] - 0.5 - s).abs() < 1e-14);
        assert!((p[1] - 1.0 - 0.6 * s).abs() < 1e-12);
        assert!((p[3] - 3.0 - 0.8 * s).abs() < 1e-12);
    }
}

#[test]
fn null_geodesic_desitter_invariants() {
    let sp = desitter(3);
    let xs = [1.0, 1.2, 0.3];
    let u = [1.0, 0.0, 0.0];
    let params: Vec<f64> = (0..12).map(|i| 0.15 * i as f64).collect();
    for orient in [Orientation::Future, Orientation::Past] {
        let c = sp.null_geodesic_quadrature(0.2, &xs, &u, orient, &params).unwrap();
        for k in 0..params.len() {
            let p = &c.points[k];
            let v = &c.velocities[k];
            assert!(sp.metric_eval(p, v, v).unwrap().abs() < 1e-8);
            let gz = sp.metric_eval(p, v, &sp.zeta(p).unwrap()).unwrap();
            assert!((gz + orient.sign()).abs() < 1e-8);
            let b = p[1] - xs[0];
            assert!((b.abs() - sp.warping.c(0.2, p[0]).unwrap().abs()).abs() < 1e-10);
        }
        let v0 = c.velocities[0].clone();
        let n = sp.null_geodesic_numeric(&c.points[0], &v0, &params).unwrap();
        for k in 0..params.len() {
            for i in 0..4 {
                assert!((n.points[k][i] - c.points[k][i]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn reversed_null_velocity_reverses_curve() {
    let sp = GrwSpace::new(WarpingProfile::exp(), FibreModel::hyperbolic(2, -1.0));
    let p = [0.0, 1.0, 0.5];
    let v = [1.0, 0.6, 0.8 / 1.0f64.sinh()];
    let fwd = sp.null_geodesic_numeric(&p, &v, &[0.3]).unwrap();
    let q = &fwd.points[0];
    let w: Vec<f64> = fwd.velocities[0].iter().map(|c| -c).collect();
    let ret = sp.null_geodesic_numeric(q, &w, &[0.3]).unwrap();
    for i in 0..3 {
        assert!((ret.points[0][i] - p[i]).abs() < 1e-9);
    }
    assert!(sp.null_geodesic_numeric(&p, &[1.0, 2.0, 0.0], &[0.3]).is_err());
}

#[test]
fn null_sectional_curvature_formula_and_tensor() {
    let cases = [
        (GrwSpace::new(WarpingProfile::constant(1.0), FibreModel::euclidean(3)), 0.0),
        (GrwSpace::new(WarpingProfile::constant(1.0), FibreModel::sphere(3, 1.0)), 1.0),
        (desitter(3), 0.0),
    ];
    let p = [0.4, 1.1, 1.3, 0.2];
    for (sp, want) in &cases {
        let g = sp.fibre.orthonormal_frame(&p[1..]).unwrap();
        let k = sp.null_sectional_curvature(&p, &g[1], &g[2]).unwrap();
        assert!((k - want).abs() < 1e-12, "{k}");
        let kt = sp.null_sectional_curvature_tensor(&p, &g[1], &g[2]).unwrap();
        assert!((k - kt).abs() < 1e-5, "{k} {kt}");
    }
    let sp = GrwSpace::new(WarpingProfile::exp(), FibreModel::hyperbolic(3, -1.0));
    let g = sp.fibre.orthonormal_frame(&p[1..]).unwrap();
    let k = sp.null_sectional_curvature(&p, &g[0], &g[2]).unwrap();
    let kt = sp.null_sectional_curvature_tensor(&p, &g[0], &g[2]).unwrap();
    assert!((k - kt).abs() < 1e-5, "{k} {kt}");
    assert!(sp.null_sectional_curvature(&p, &g[0], &g[0]).is_err());
}

#[test]
fn zeta_is_conformal() {
    let grid: Vec<Vec<f64>> = (0..5).map(|i| vec![-0.5 + 0.3 * i as f64, 0.8, 1.0 + 0.1 * i as f64, 0.4]).collect();
    let flat = GrwSpace::new(WarpingProfile::constant(1.0), FibreModel::sphere(3, 1.0));
    assert!(flat.conformal_check(&grid).unwrap() < 1e-12);
    assert!(desitter(3).conformal_check(&grid).unwrap() < 1e-6);
    let e = GrwSpace::new(WarpingProfile::exp(), FibreModel::sphere(3, 1.0));
    assert!(e.conformal_check(&grid).unwrap() < 1e-6);
}
