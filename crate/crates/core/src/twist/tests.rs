use super::*;
use crate::cone::NullCone;
use crate::fibre::{DistanceField, FibreModel};
use crate::fixtures;
use crate::grw::Orientation;
use crate::nullhyp::box_grid;

fn arc(s: GrwSpace) -> Arc<GrwSpace> {
    Arc::new(s)
}

fn minkowski_cone(n: usize) -> GraphHypersurface {
    let space = arc(fixtures::minkowski(n));
    let h = Arc::new(DistanceField { fibre: FibreModel::euclidean(n - 1), center: vec![0.0; n - 1] });
    GraphHypersurface::new(space, h).unwrap()
}

fn einstein_static_cone() -> (GraphHypersurface, Vec<f64>) {
    let space = arc(fixtures::einstein_static(4));
    let xs = vec![1.0, 1.2, 0.3];
    let h = Arc::new(DistanceField { fibre: space.fibre.clone(), center: xs.clone() });
    (GraphHypersurface::new(space, h).unwrap(), xs)
}

fn check_records(d: &TwistedDecomposition, mu: impl Fn(f64) -> f64, tol: f64) {
    assert!(d.normalization_residual().unwrap() < 1e-8);
    for r in &d.records {
        assert!(r.unit_residual < 1e-8 && r.level_residual < 1e-6, "{} {}", r.unit_residual, r.level_residual);
        for (s, m) in r.s.iter().zip(&r.mu) {
            assert!((m - mu(*s)).abs() < tol * mu(*s), "s={s} {m} {}", mu(*s));
        }
    }
}

#[test]
fn reconstruct_minkowski_cone() {
    let l = minkowski_cone(4);
    let x0 = vec![0.48, 0.0, 0.64];
    let delta = 0.8;
    let d = reconstruct_decomposition(&l, &x0, &ReconstructOptions::default()).unwrap();
    assert_eq!(d.records.len(), 5);
    check_records(&d, |s| (s + delta) / delta, 1e-8);
    assert!((d.mu_at(0.13, &d.records[1].z).unwrap() - (0.13 + delta) / delta).abs() < 1e-7);
    let chart = d.chart.clone().unwrap();
    let samples = vec![(0.1, d.anchor_z.clone()), (-0.05, d.records[2].z.clone())];
    assert!(chart.metric_residual(&samples, &d.leaf).unwrap() < 1e-4);
}

#[test]
fn reconstruct_einstein_static_cone() {
    let (l, xs) = einstein_static_cone();
    let x0 = vec![1.5, 1.0, 0.5];
    let delta = l.space.fibre.distance(&xs, &x0).unwrap();
    let d = reconstruct_decomposition(&l, &x0, &ReconstructOptions::default()).unwrap();
    check_records(&d, |s| (s + delta).sin() / delta.sin(), 1e-7);
    let chart = d.chart.clone().unwrap();
    assert!(chart.metric_residual(&[(0.1, d.records[3].z.clone())], &d.leaf).unwrap() < 1e-4);
}

#[test]
fn reconstruct_table_hyperplane() {
    let fx = fixtures::table_minkowski(4);
    let d = reconstruct_decomposition(&fx.graph, &[0.2, 0.1, -0.3], &ReconstructOptions::default()).unwrap();
    check_records(&d, |_| 1.0, 1e-10);
}

#[test]
fn reconstruct_rejects_non_umbilic() {
    let l = minkowski_cone(4);
    let bump: FieldRef = fixtures::twisted_field("s^2", 2, &[]).unwrap();
    let h: FieldRef = Arc::new(crate::field::SumField { a: l.h.clone(), b: bump, scale: 0.05 });
    let p = GraphHypersurface::new(l.space.clone(), h).unwrap();
    assert!(matches!(
        reconstruct_decomposition(&p, &[0.48, 0.0, 0.64], &ReconstructOptions::default()),
        Err(Error::NotUmbilic { .. })
    ));
}

fn sphere_twisted_space(mu: &str, a: f64, b: f64, leaf_radius: f64, w: WarpingProfile) -> Arc<GrwSpace> {
    let leaf = FibreModel::sphere(2, leaf_radius);
    let mu = fixtures::twisted_field(mu, 2, &[]).unwrap();
    arc(GrwSpace::new(w, FibreModel::twisted(a, b, leaf, mu, 1.0).unwrap()))
}

fn check_constructed(l: &GraphHypersurface, grid: &[Vec<f64>], dual: bool, want: impl Fn(&[f64]) -> f64) {
    assert!(l.validate_null_graph(grid).unwrap().max_residual < 1e-8);
    let rep = l.umbilicity_test(grid, 1e-6, 0).unwrap();
    assert!(rep.umbilic, "{}", rep.max_residual);
    for s in &rep.samples {
        let f = twisted_mean_curvature_formula(&l.space, s.t, &s.x, dual).unwrap();
        assert!((f - s.mean_curvature).abs() < 1e-5, "{f} {}", s.mean_curvature);
        assert!((want(&s.x) - s.mean_curvature).abs() < 1e-5);
    }
}

#[test]
fn construct_product_hyperplane() {
    let leaf = FibreModel::euclidean(2);
    let mu = fixtures::twisted_field("1", 2, &[]).unwrap();
    let sp = arc(GrwSpace::new(WarpingProfile::constant(1.0), FibreModel::twisted(-5.0, 5.0, leaf, mu, 1.0).unwrap()));
    let l = construct_hypersurface(sp.clone(), 0.3).unwrap();
    check_constructed(&l, &box_grid(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0], 3), false, |_| 0.0);
    assert!(construct_hypersurface(arc(fixtures::minkowski(4)), 0.0).is_err());
}

#[test]
fn construct_sine_warped() {
    let delta: f64 = 0.6;
    let sp = sphere_twisted_space("sin(s + 0.6)/sin(0.6)", -delta, PI - delta, delta.sin(), WarpingProfile::constant(1.0));
    let grid = box_grid(&[-0.3, 1.0, 0.3], &[0.8, 1.5, 0.8], 3);
    let l = construct_hypersurface(sp.clone(), 0.0).unwrap();
    check_constructed(&l, &grid, false, |x| 2.0 / (x[0] + delta).tan());
    let ld = construct_dual(sp, 0.0).unwrap();
    check_constructed(&ld, &grid, true, |x| -2.0 / (x[0] + delta).tan());
}

#[test]
fn construct_desitter_symmetric() {
    let sp = sphere_twisted_space("cos(s)", -FRAC_PI_2, FRAC_PI_2, 1.0, WarpingProfile::cosh());
    let l = construct_hypersurface(sp, 0.0).unwrap();
    check_constructed(&l, &box_grid(&[-1.2, 0.5, -1.0], &[1.2, 2.0, 1.0], 3), false, |_| 0.0);
}

#[test]
fn round_trip_construct_then_reconstruct() {
    let delta: f64 = 0.7;
    let cases = [
        (sphere_twisted_space("(s + 0.7)/0.7", -delta, f64::INFINITY, delta, WarpingProfile::constant(1.0)), 0.7),
        (sphere_twisted_space("sin(s + 0.7)/sin(0.7)", -delta, PI - delta, delta.sin(), WarpingProfile::constant(1.0)), 0.4),
        (sphere_twisted_space("cos(s + 0.2)/cos(0.2)", -FRAC_PI_2 - 0.2, FRAC_PI_2 - 0.2, 0.2f64.cos(), WarpingProfile::cosh()), 0.3),
    ];
    for (sp, t0) in cases {
        let l = construct_hypersurface(sp.clone(), t0).unwrap();
        let d = reconstruct_decomposition(&l, &[0.0, 1.0, 0.5], &ReconstructOptions::default()).unwrap();
        let tw = match sp.fibre.kind() {
            crate::fibre::FibreKind::Twisted(t) => t.clone(),
            _ => unreachable!(),
        };
        for r in &d.records {
            for (k, s) in r.s.iter().enumerate() {
                let mut q = r.points[k].clone();
                assert!((q[0] - s).abs() < 1e-8);
                q[0] = *s;
                let want = tw.mu.value(&q).unwrap() / tw.mu.value(&[0.0, q[1], q[2]]).unwrap();
                assert!((r.mu[k] - want).abs() <= 1e-4 * want, "{} {want}", r.mu[k]);
            }
        }
    }
}

#[test]
fn round_trip_reconstruct_then_construct() {
    let (es, _) = einstein_static_cone();
    let cases = [(minkowski_cone(4), vec![0.48, 0.0, 0.64]), (es, vec![1.5, 1.0, 0.5])];
    for (l, x0) in cases {
        let d = reconstruct_decomposition(&l, &x0, &ReconstructOptions::default()).unwrap();
        let t0 = l.h.value(&x0).unwrap();
        let sp = arc(GrwSpace::new(l.space.warping.clone(), d.fibre(1.0).unwrap()));
        let built = construct_hypersurface(sp, t0).unwrap();
        for r in &d.records {
            for (k, s) in r.s.iter().enumerate() {
                let mut q = vec![*s];
                q.extend_from_slice(&r.z);
                let a = built.h.value(&q).unwrap();
                let b = l.h.value(&r.points[k]).unwrap();
                assert!((a - b).abs() < 1e-6, "{a} {b}");
            }
        }
    }
}

#[test]
fn minkowski_dual_is_past_cone() {
    let l = minkowski_cone(4);
    let x0 = [0.3, 0.4, 0.0];
    let t0 = 0.5;
    let dual = dual_hypersurface(&l, &x0).unwrap();
    let c = NullCone::new(l.space.clone(), 2.0 * t0, vec![0.0; 3], Orientation::Past).unwrap();
    let grid = box_grid(&[0.1, 0.2, -0.3], &[0.6, 0.7, 0.3], 3);
    for x in &grid {
        assert!((dual.h.value(x).unwrap() - c.graph_field().value(x).unwrap()).abs() < 1e-7);
    }
    assert!((dual.h.value(&x0).unwrap() - t0).abs() < 1e-14);
    assert!(dual.validate_null_graph(&grid).unwrap().max_residual < 1e-8);
    let rep = dual.umbilicity_test(&grid, 1e-6, 0).unwrap();
    assert!(rep.umbilic);
    for s in &rep.samples {
        let f = dual_mean_curvature_formula(&l, &x0, &s.x).unwrap();
        assert!((f - s.mean_curvature).abs() < 1e-5, "{f} {}", s.mean_curvature);
    }
}

#[test]
fn duality_is_an_involution() {
    let (l, _) = einstein_static_cone();
    let x0 = [1.5, 1.0, 0.5];
    let dd = dual_hypersurface(&dual_hypersurface(&l, &x0).unwrap(), &x0).unwrap();
    for x in box_grid(&[1.3, 0.8, 0.3], &[1.7, 1.2, 0.7], 3) {
        assert!((dd.h.value(&x).unwrap() - l.h.value(&x).unwrap()).abs() < 1e-6);
    }
}

fn desitter_setup(t0: f64) -> (GraphHypersurface, Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let sp = arc(fixtures::de_sitter(4));
    let xs = vec![1.0, 1.2, 0.3];
    let c = NullCone::new(sp.clone(), 0.0, xs.clone(), Orientation::Future).unwrap();
    let l = c.as_graph().unwrap();
    let delta = sp.warping.c(0.0, t0).unwrap();
    let g = sp.fibre.metric(&xs).unwrap();
    let u0 = [0.2, 0.3, 1.0];
    let nu = metric::inner(&g, &u0, &u0).sqrt();
    let u: Vec<f64> = u0.iter().map(|c| c * delta / nu).collect();
    let x0 = sp.fibre.exp_map(&xs, &u).unwrap();
    let grid: Vec<Vec<f64>> = box_grid(&[-0.05; 3], &[0.05; 3], 2)
        .into_iter()
        .map(|o| x0.iter().zip(&o).map(|(a, b)| a + b).collect())
        .collect();
    (l, xs, x0, grid)
}

#[test]
fn desitter_trichotomy() {
    let tc = desitter_tc();
    assert!((tc - 0.881374).abs() < 1e-6);
    assert_eq!(classify_desitter_dual(tc).unwrap(), DesitterDual::TotallyGeodesic);
    assert_eq!(classify_desitter_dual(tc + 1e-10).unwrap(), DesitterDual::Boundary);

    let (l, _, x0, grid) = desitter_setup(tc);
    let dual = dual_hypersurface(&l, &x0).unwrap();
    let rep = dual.umbilicity_test(&grid, 1e-6, 0).unwrap();
    assert!(rep.samples.iter().all(|s| s.mean_curvature.abs() < 1e-6 && s.residual < 1e-6));

    let (l, xs, x0, grid) = desitter_setup(0.4);
    let ts = match classify_desitter_dual(0.4).unwrap() {
        DesitterDual::PastCone { ts } => ts,
        other => panic!("{other:?}"),
    };
    let w = &l.space.warping;
    assert!((w.c(0.4, ts).unwrap() - w.c(0.0, 0.4).unwrap()).abs() < 1e-12);
    let dual = dual_hypersurface(&l, &x0).unwrap();
    let past = NullCone::new(l.space.clone(), ts, xs.clone(), Orientation::Past).unwrap().graph_field();
    for x in &grid {
        assert!((dual.h.value(x).unwrap() - past.value(x).unwrap()).abs() < 1e-6);
    }

    let (l, xs, x0, grid) = desitter_setup(1.5);
    let tl = match classify_desitter_dual(1.5).unwrap() {
        DesitterDual::FutureConeAntipode { tl } => tl,
        other => panic!("{other:?}"),
    };
    let sf = l.space.fibre.space_form_data().unwrap();
    let e: Vec<f64> = sf.embed(&xs).iter().map(|v: &f64| -v).collect();
    let anti = sf.chart(&e);
    let cone = NullCone::new(l.space.clone(), tl, anti, Orientation::Future).unwrap();
    let dual = dual_hypersurface(&l, &x0).unwrap();
    for x in &grid {
        let p = dual.point(x).unwrap();
        let (ok, r) = cone.contains(&p, 1e-7).unwrap();
        assert!(ok, "{r}");
    }
    assert!(classify_desitter_dual(-0.1).is_err());
}

#[test]
fn obstruction_product_of_spheres() {
    let f = FibreModel::product(vec![FibreModel::sphere(2, 1.0), FibreModel::sphere(2, 1.0)]);
    let rep = obstruction_scan(&f, &[1.0, 0.5, 1.2, -0.4], 200, 16, 11).unwrap();
    assert_eq!(rep.spreads.len(), 200);
    assert!(rep.min_spread >= 0.5, "{}", rep.min_spread);
    assert!(rep.certifies_no_decomposition(0.25));
    assert!(rep.sampled_spreads.iter().zip(&rep.spreads).all(|(s, e)| *s <= e + 1e-12));
}

#[test]
fn obstruction_round_sphere() {
    let f = FibreModel::sphere(3, 1.0);
    let rep = obstruction_scan(&f, &[1.0, 1.2, 0.3], 50, 8, 3).unwrap();
    assert!(rep.min_spread <= 1e-9);
    assert!(!rep.certifies_no_decomposition(1e-6));
    assert!(obstruction_scan(&FibreModel::sphere(2, 1.0), &[1.0, 0.2], 5, 3, 0).is_err());
}

#[test]
fn obstruction_twisted_base_direction() {
    let mu = fixtures::twisted_field("exp(s) + z1^2 + z2^2", 2, &[]).unwrap();
    let f = FibreModel::twisted(-3.0, 3.0, FibreModel::euclidean(2), mu, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for x in box_grid(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0], 2) {
        let (exact, sampled) = spread_along(&f, &x, &[1.0, 0.0, 0.0], 8, &mut rng).unwrap();
        assert!(exact <= 1e-6 && sampled <= 1e-6, "{exact}");
        let (other, _) = spread_along(&f, &x, &[0.0, 1.0, 0.3], 8, &mut rng).unwrap();
        assert!(other > 1e-3);
    }
}

#[test]
fn sphere_warped_probe() {
    let p = |s: &str| CompiledExpr::parse(s, &["s"], &[]).unwrap();
    assert!(sphere_warped_uniqueness_probe(&p("sin(s + 0.4)"), 0.1, 2.0, 50, 1e-9).unwrap());
    assert!(sphere_warped_uniqueness_probe(&p("s + 1"), 0.0, 2.0, 50, 1e-12).unwrap());
    assert!(sphere_warped_uniqueness_probe(&p("sinh(2*s)/2"), 0.1, 2.0, 50, 1e-9).unwrap());
    assert!(!sphere_warped_uniqueness_probe(&p("cosh(s)"), -1.0, 1.0, 50, 1e-6).unwrap());
    assert!((sphere_warped_residual(&p("cosh(s)"), -1.0, 1.0, 10).unwrap() - 2.0).abs() < 1e-12);
}
