use super::*;
use crate::fibre::{DistanceField, FibreModel};
use crate::field::{ExprField, SumField};
use crate::fixtures;
use crate::grw::WarpingProfile;

fn minkowski_cone(n: usize) -> GraphHypersurface {
    let space = Arc::new(fixtures::minkowski(n));
    let h = Arc::new(DistanceField { fibre: FibreModel::euclidean(n - 1), center: vec![0.0; n - 1] });
    GraphHypersurface::new(space, h).unwrap()
}

fn einstein_static_cone() -> (GraphHypersurface, Vec<f64>) {
    let space = Arc::new(fixtures::einstein_static(4));
    let xs = vec![1.0, 1.2, 0.3];
    let h = Arc::new(DistanceField { fibre: space.fibre.clone(), center: xs.clone() });
    (GraphHypersurface::new(space, h).unwrap(), xs)
}

fn es_grid() -> Vec<Vec<f64>> {
    box_grid(&[1.3, 0.8, 0.3], &[1.7, 1.2, 0.7], 3)
}

#[test]
fn minkowski_cone_is_null_and_umbilic() {
    let l = minkowski_cone(4);
    let grid = box_grid(&[0.3, 0.3, 0.3], &[1.5, 1.5, 1.5], 3);
    assert!(l.validate_null_graph(&grid).unwrap().max_residual < 1e-12);
    assert!(l.radial_identity_check(&grid).unwrap().max_residual < 1e-12);
    let rep = l.umbilicity_test(&grid, DEFAULT_UMBILIC_TOL, 7).unwrap();
    assert!(rep.umbilic && rep.max_residual < 1e-12, "{}", rep.max_residual);
    for s in &rep.samples {
        let d = s.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((s.rho - 1.0 / d).abs() < 1e-12);
        assert!((s.mean_curvature - 2.0 / d).abs() < 1e-12);
        assert!(s.pair_residual < 1e-12 && s.frame_spread < 1e-12);
    }
}

#[test]
fn constant_graph_is_not_null() {
    let space = Arc::new(fixtures::minkowski(3));
    let h = Arc::new(ExprField::parse("0.5", &["x", "y"], &[]).unwrap());
    let l = GraphHypersurface::new(space, h).unwrap();
    let rep = l.validate_null_graph(&[vec![0.2, 0.4]]).unwrap();
    assert!((rep.max_residual - 1.0).abs() < 1e-15);
    assert!(l.screen_basis(&[0.2, 0.4]).is_err());
}

#[test]
fn wrong_dimension_is_rejected() {
    let space = Arc::new(fixtures::minkowski(4));
    let h = Arc::new(ExprField::parse("x", &["x", "y"], &[]).unwrap());
    assert!(matches!(GraphHypersurface::new(space, h), Err(Error::Config(_))));
}

#[test]
fn xi_and_screen_frame() {
    let (l, _) = einstein_static_cone();
    let space = l.space.clone();
    for x in random_grid(&[1.3, 0.8, 0.3], &[1.7, 1.2, 0.7], 100, 3) {
        let p = l.point(&x).unwrap();
        let xi = l.xi_field(&x).unwrap();
        assert!(space.metric_eval(&p, &xi, &xi).unwrap().abs() < 1e-12);
        let z = space.zeta(&p).unwrap();
        assert!((space.metric_eval(&p, &xi, &z).unwrap() - 1.0).abs() < 1e-12);
        let scr = l.screen_basis(&x).unwrap();
        assert_eq!(scr.len(), 2);
        let lift = |v: &Vec<f64>| {
            let mut w = vec![0.0];
            w.extend_from_slice(v);
            w
        };
        for (i, a) in scr.iter().enumerate() {
            assert!(space.metric_eval(&p, &lift(a), &xi).unwrap().abs() < 1e-12);
            for (j, b) in scr.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((space.metric_eval(&p, &lift(a), &lift(b)).unwrap() - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn planar_screen_is_angular() {
    let l = minkowski_cone(3);
    let x = [0.6, 0.8];
    let e = l.screen_basis(&x).unwrap();
    assert_eq!(e.len(), 1);
    assert!((e[0][0].abs() - 0.8).abs() < 1e-14 && (e[0][1].abs() - 0.6).abs() < 1e-14);
    assert!(e[0][0] * e[0][1] < 0.0);
    let rep = l.umbilicity_test(&[x.to_vec()], 1e-12, 0).unwrap();
    assert_eq!(rep.max_residual, 0.0);
}

#[test]
fn second_fundamental_form_two_routes() {
    let (l, _) = einstein_static_cone();
    let cases = [l, minkowski_cone(4)];
    for l in &cases {
        let x = if l.space.fibre.kind_name() == "sphere" { vec![1.5, 1.0, 0.5] } else { vec![0.4, 0.7, -0.2] };
        let scr = l.screen_basis(&x).unwrap();
        for a in &scr {
            for b in &scr {
                let f = l.second_fundamental_form(&x, a, b).unwrap();
                let c = l.second_fundamental_form_connection(&x, a, b).unwrap();
                assert!((f - c).abs() < 1e-5, "{f} {c}");
            }
        }
    }
}

#[test]
fn einstein_static_cone_mean_curvature() {
    let (l, xs) = einstein_static_cone();
    let rep = l.umbilicity_test(&es_grid(), DEFAULT_UMBILIC_TOL, 1).unwrap();
    assert!(rep.umbilic, "{}", rep.max_residual);
    for s in &rep.samples {
        let d = l.space.fibre.distance(&xs, &s.x).unwrap();
        assert!((s.mean_curvature - 2.0 / d.tan()).abs() < 1e-9);
    }
}

#[test]
fn perturbed_cone_is_not_umbilic() {
    let l = minkowski_cone(4);
    let bump: FieldRef = Arc::new(ExprField::parse("x^2", &["x", "y", "z"], &[]).unwrap());
    let h: FieldRef = Arc::new(SumField { a: l.h.clone(), b: bump, scale: 0.05 });
    let p = GraphHypersurface::new(l.space.clone(), h).unwrap();
    let grid = box_grid(&[0.3, 0.3, 0.3], &[1.5, 1.5, 1.5], 3);
    let rep = p.umbilicity_test(&grid, DEFAULT_UMBILIC_TOL, 0).unwrap();
    assert!(!rep.umbilic && rep.max_residual > 1e-3);
    assert!(p.validate_null_graph(&grid).unwrap().max_residual > 1e-3);
}

#[test]
fn umbilicity_is_deterministic() {
    let (l, _) = einstein_static_cone();
    let a = l.umbilicity_test(&es_grid(), 1e-6, 42).unwrap();
    let b = l.umbilicity_test(&es_grid(), 1e-6, 42).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.pair_residual.to_bits(), y.pair_residual.to_bits());
        assert_eq!(x.frame_spread.to_bits(), y.frame_spread.to_bits());
    }
}

#[test]
fn table_graphs_are_totally_geodesic() {
    for n in [3, 4] {
        for fx in fixtures::table_fixtures(n) {
            let grid = box_grid(&fx.lo, &fx.hi, 3);
            let v = fx.graph.validate_null_graph(&grid).unwrap();
            assert!(v.max_residual < 1e-8, "{} {}", fx.name, v.max_residual);
            let rep = fx.graph.umbilicity_test(&grid, DEFAULT_UMBILIC_TOL, 0).unwrap();
            for s in &rep.samples {
                assert!(s.mean_curvature.abs() < 1e-6 && s.residual < 1e-6, "{} {:?}", fx.name, s);
            }
        }
    }
}

#[test]
fn null_sectional_curvature_two_routes() {
    let mut cases: Vec<(GraphHypersurface, Vec<f64>, f64)> = vec![
        (minkowski_cone(4), vec![0.4, 0.7, -0.2], 0.0),
        (einstein_static_cone().0, vec![1.5, 1.0, 0.5], 1.0),
    ];
    let ds = fixtures::table_de_sitter(4);
    cases.push((ds.graph, vec![0.3, 1.0, 0.4], 0.0));
    for (l, x, want) in &cases {
        let a = l.null_sectional_from_rho(x).unwrap();
        let scr = l.screen_basis(x).unwrap();
        let b = l.null_sectional_from_ambient(x, &scr[0]).unwrap();
        assert!((a - b).abs() < 1e-4, "{a} {b}");
        assert!((b - want).abs() < 1e-5, "{b} {want}");
    }
}

#[test]
fn rw_cone_with_nontrivial_warping() {
    let space = Arc::new(GrwSpace::new(WarpingProfile::cosh(), FibreModel::euclidean(3)));
    let dist: FieldRef = Arc::new(DistanceField { fibre: FibreModel::euclidean(3), center: vec![0.0; 3] });
    let sp = space.clone();
    let outer: crate::field::Outer = Arc::new(move |d: f64| {
        let t = sp.warping.c_inv(0.0, d)?;
        let (f, df, _) = sp.warping.jet(t)?;
        Ok((t, f, f * df))
    });
    let l = GraphHypersurface::new(space, Arc::new(crate::field::Composed::new(dist, outer))).unwrap();
    let grid = box_grid(&[0.2, 0.2, 0.2], &[0.7, 0.7, 0.7], 3);
    assert!(l.validate_null_graph(&grid).unwrap().max_residual < 1e-10);
    assert!(l.radial_identity_check(&grid).unwrap().max_residual < 1e-9);
    assert!(l.umbilicity_test(&grid, 1e-9, 0).unwrap().umbilic);
}

#[test]
fn grids() {
    let g = box_grid(&[0.0, 0.0], &[1.0, 2.0], 2);
    assert_eq!(g, vec![vec![0.25, 0.5], vec![0.25, 1.5], vec![0.75, 0.5], vec![0.75, 1.5]]);
    let r = random_grid(&[0.0], &[1.0], 5, 9);
    assert_eq!(r, random_grid(&[0.0], &[1.0], 5, 9));
    assert!(r.iter().all(|p| p[0] >= 0.0 && p[0] < 1.0));
}
