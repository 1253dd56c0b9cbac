use nullkit::cli::output::fmt_f64;
use nullkit::cone::NullCone;
use nullkit::expr::{parse_expression, CompiledExpr};
use nullkit::fibre::FibreModel;
use nullkit::fixtures;
use nullkit::grw::{Orientation, Quadrature, WarpingProfile};
use nullkit::metric::ChartMetric;
use nullkit::nullhyp::{box_grid, DEFAULT_UMBILIC_TOL};
use nullkit::par;
use nullkit::twist::dual_hypersurface;
use proptest::prelude::*;
use std::sync::Arc;

const CORPUS: &str = include_str!("data/expressions.txt");

#[test]
fn corpus_has_two_hundred_entries_and_round_trips() {
    let lines: Vec<&str> = CORPUS.lines().filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(lines.len(), 200);
    for src in lines {
        let e = parse_expression(src).unwrap_or_else(|err| panic!("{src}: {err}"));
        let printed = e.to_string();
        let again = parse_expression(&printed).unwrap();
        assert_eq!(e, again, "{src} -> {printed}");
        assert_eq!(printed, again.to_string());
    }
}

#[test]
fn corpus_contains_fixture_expressions() {
    let lines: Vec<&str> = CORPUS.lines().collect();
    for e in ["cosh(t)", "1 - m^2/r + c^2/r^2", "2*atan(tanh(s/2))", "2*atanh(tan(s/2))", "cos(s)", "cosh(s)", "1 - m^2/r"] {
        assert!(lines.contains(&e), "{e}");
    }
}

fn fd(c: &CompiledExpr, x: f64, h: f64) -> f64 {
    (c.eval(&[x + h]).unwrap() - c.eval(&[x - h]).unwrap()) / (2.0 * h)
}

const SMOOTH: &[&str] = &[
    "cosh(t)",
    "exp(-t^2)*sin(3*t)",
    "1 - 1/t + 0.25/t^2",
    "2*atan(tanh(t/2))",
    "sqrt(2 + t^2)*ln(3 + t)",
    "t^3 - 2*t + asinh(t)",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_central_difference(i in 0usize..6, x in 0.5f64..2.0) {
        let c = CompiledExpr::parse(SMOOTH[i], &["t"], &[]).unwrap();
        let a = c.derivative(0).eval(&[x]).unwrap();
        let n = fd(&c, x, 1e-5);
        prop_assert!((a - n).abs() <= 1e-7 * (1.0 + a.abs()), "{} at {x}: {a} vs {n}", SMOOTH[i]);
    }

    #[test]
    fn third_derivative_matches_difference_of_second(i in 0usize..6, x in 0.5f64..2.0) {
        let e = parse_expression(SMOOTH[i]).unwrap();
        let d2 = CompiledExpr::new(&e.nth_derivative("t", 2), &["t"], &[]).unwrap();
        let d3 = CompiledExpr::new(&e.nth_derivative("t", 3), &["t"], &[]).unwrap();
        let a = d3.eval(&[x]).unwrap();
        let n = fd(&d2, x, 1e-5);
        prop_assert!((a - n).abs() <= 1e-6 * (1.0 + a.abs()), "{} at {x}: {a} vs {n}", SMOOTH[i]);
    }

    #[test]
    fn csv_numbers_round_trip(v in proptest::num::f64::NORMAL) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn warping_inverse_round_trip(which in 0usize..3, frac in 0.02f64..0.98) {
        let w = match which {
            0 => WarpingProfile::cosh(),
            1 => WarpingProfile::exp(),
            _ => WarpingProfile::parse("2 + sin(t)", &[], -3.0, 3.0).unwrap(),
        };
        let (lo, hi) = w.quad_range(Quadrature::C, 0.0).unwrap();
        let lo = lo.max(-5.0);
        let hi = hi.min(5.0);
        let v = lo + frac * (hi - lo);
        let t = w.c_inv(0.0, v).unwrap();
        prop_assert!((w.c(0.0, t).unwrap() - v).abs() <= 1e-10 * (1.0 + v.abs()));
    }

    #[test]
    fn distance_is_symmetric_and_inverts_exp(kind in 0usize..3, a in 0.3f64..1.2, b in -1.0f64..1.0, r in 0.1f64..0.9) {
        let f = match kind {
            0 => FibreModel::euclidean(2),
            1 => FibreModel::sphere(2, 1.0),
            _ => FibreModel::hyperbolic(2, -1.0),
        };
        let x = vec![1.0, 0.2];
        let g = f.metric(&x).unwrap();
        let v0 = [a, b];
        let n = (g[(0, 0)] * a * a + 2.0 * g[(0, 1)] * a * b + g[(1, 1)] * b * b).sqrt();
        let v: Vec<f64> = v0.iter().map(|c| c * r / n).collect();
        let y = f.exp_map(&x, &v).unwrap();
        let d1 = f.distance(&x, &y).unwrap();
        let d2 = f.distance(&y, &x).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-12);
        prop_assert!((d1 - r).abs() < 1e-9, "{d1} {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generators_lie_on_their_cone(a in -1.0f64..1.0, b in -1.0f64..1.0, c in 0.2f64..1.0, past in any::<bool>()) {
        let sp = Arc::new(fixtures::de_sitter(4));
        let xs = vec![1.0, 1.2, 0.3];
        let o = if past { Orientation::Past } else { Orientation::Future };
        let cone = NullCone::new(sp.clone(), 0.1, xs.clone(), o).unwrap();
        let n = sp.fibre.norm(&xs, &[a, b, c]).unwrap();
        let u = [a / n, b / n, c / n];
        let curve = sp.null_geodesic_quadrature(0.1, &xs, &u, o, &[0.1, 0.3, 0.6]).unwrap();
        for (p, v) in curve.points.iter().zip(&curve.velocities) {
            prop_assert!(cone.contains(p, 1e-8).unwrap().0);
            prop_assert!(sp.metric_eval(p, v, v).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn mean_curvature_is_frame_independent(seed in 0u64..1000) {
        let sp = Arc::new(fixtures::einstein_static(5));
        let c = NullCone::new(sp, 0.0, vec![1.0, 1.2, 1.1, 0.3], Orientation::Future).unwrap();
        let l = c.as_graph().unwrap();
        let grid = box_grid(&[1.3, 1.3, 1.2, 0.5], &[1.5, 1.5, 1.4, 0.7], 2);
        let rep = l.umbilicity_test(&grid, DEFAULT_UMBILIC_TOL, seed).unwrap();
        prop_assert!(rep.umbilic);
        for s in &rep.samples {
            prop_assert!(s.frame_spread < 1e-9, "{}", s.frame_spread);
            prop_assert!(s.pair_residual <= s.residual + 1e-12);
        }
    }

    #[test]
    fn duality_is_an_involution(dx in -0.1f64..0.1, dy in -0.1f64..0.1) {
        let sp = Arc::new(fixtures::einstein_static(4));
        let l = NullCone::new(sp, 0.0, vec![1.0, 1.2, 0.3], Orientation::Future).unwrap().as_graph().unwrap();
        let x0 = [1.5 + dx, 1.0 + dy, 0.5];
        let dd = dual_hypersurface(&dual_hypersurface(&l, &x0).unwrap(), &x0).unwrap();
        for x in box_grid(&[1.35, 0.85, 0.35], &[1.65, 1.15, 0.65], 2) {
            prop_assert!((dd.h.value(&x).unwrap() - l.h.value(&x).unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn parallel_and_sequential_maps_agree() {
    let sp = Arc::new(fixtures::de_sitter(4));
    let l = NullCone::new(sp, 0.0, vec![1.0, 1.2, 0.3], Orientation::Future).unwrap().as_graph().unwrap();
    let grid = box_grid(&[1.3, 0.9, 0.4], &[1.6, 1.3, 0.8], 3);
    let a = l.umbilicity_test(&grid, 1e-6, 5).unwrap();
    let seq: Vec<f64> = grid.iter().map(|x| l.mean_curvature(x).unwrap()).collect();
    let par_h: Vec<f64> = par::map(&grid, |x| l.mean_curvature(x).unwrap());
    assert_eq!(seq, par_h);
    let b = l.umbilicity_test(&grid, 1e-6, 5).unwrap();
    for (s, t) in a.samples.iter().zip(&b.samples) {
        assert_eq!(s.residual.to_bits(), t.residual.to_bits());
        assert_eq!(s.pair_residual.to_bits(), t.pair_residual.to_bits());
    }
}
