//! Acceptance suite: one PASS/FAIL line per criterion, sub-claims listed underneath.
//!
//! Sub-claims marked `known` are stated values that disagree with the geometry; they are
//! evaluated as stated and reported as failures, but do not fail the run. Any other
//! failing sub-claim makes the process exit non-zero.

use nullkit::cone::{classify_umbilic_sphere_fibre, containment_by_gradient, rw_cone_rho, NullCone};
use nullkit::fibre::{FibreKind, FibreModel};
use nullkit::fixtures;
use nullkit::grw::{GrwSpace, Orientation, Quadrature, WarpingProfile};
use nullkit::jacobi::{full_jacobi_system, scalar_jacobi_from, NullGeodesicRecord};
use nullkit::metric::{inner, ChartMetric};
use nullkit::nullhyp::{box_grid, random_grid, DEFAULT_UMBILIC_TOL};
use nullkit::numeric::richardson;
use nullkit::staticspace::{
    conformal_consistency, radial_profile, static_dual, static_umbilic_construct, uniqueness_certificate,
    RadialStaticFamily, Verdict,
};
use nullkit::twist::{
    classify_desitter_dual, construct_hypersurface, desitter_tc, dual_hypersurface, obstruction_scan,
    reconstruct_decomposition, spread_along, DesitterDual, ReconstructOptions,
};
use nullkit::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

struct Claim {
    text: String,
    ok: bool,
    known: bool,
}

#[derive(Default)]
struct Criterion {
    claims: Vec<Claim>,
}

impl Criterion {
    fn claim(&mut self, ok: bool, text: impl Into<String>) {
        self.claims.push(Claim { text: text.into(), ok, known: false });
    }

    fn known(&mut self, ok: bool, text: impl Into<String>) {
        self.claims.push(Claim { text: text.into(), ok, known: true });
    }

    fn at_most(&mut self, what: &str, v: f64, bound: f64) {
        self.claim(v <= bound, format!("{what} = {v:.3e} <= {bound:.0e}"));
    }

    fn error(&mut self, what: &str, e: Error) {
        self.claim(false, format!("{what}: error {e}"));
    }
}

fn lin(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn unit(f: &FibreModel, x: &[f64], v: &[f64]) -> Vec<f64> {
    let n = f.norm(x, v).unwrap();
    v.iter().map(|c| c / n).collect()
}

fn offset(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = rng.gen_range(lo..hi);
    if rng.gen::<bool>() {
        m
    } else {
        -m
    }
}

fn c1_cone_characterization(c: &mut Criterion) {
    let cases = [
        ("euclidean", fixtures::minkowski(4), vec![0.1, -0.3, 0.2], 0.0),
        ("cosh/sphere", fixtures::de_sitter(4), vec![1.0, 1.2, 0.3], 0.1),
        ("exp/hyperbolic", fixtures::exp_hyperbolic(4), vec![0.7, 1.0, 0.4], -0.2),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (name, sp, xs, ts) in cases {
        let sp = Arc::new(sp);
        let mut forward: f64 = 0.0;
        let mut on_geodesic: f64 = 0.0;
        let mut member: f64 = 0.0;
        for k in 0..50 {
            let o = if k % 2 == 0 { Orientation::Future } else { Orientation::Past };
            let cone = NullCone::new(sp.clone(), ts, xs.clone(), o).unwrap();
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = unit(&sp.fibre, &xs, &v);
            let s = rng.gen_range(0.05..0.6);
            match sp.null_geodesic_quadrature(ts, &xs, &u, o, &[s]) {
                Ok(curve) => forward = forward.max(cone.contains(&curve.points[0], 1e-8).unwrap().1),
                Err(e) => return c.error(name, e),
            }

            let x: Vec<f64> = xs.iter().map(|a| a + offset(&mut rng, 0.08, 0.25)).collect();
            let t = match cone.graph_field().value(&x) {
                Ok(t) => t,
                Err(e) => return c.error(name, e),
            };
            let mut p = vec![t];
            p.extend_from_slice(&x);
            member = member.max(cone.contains(&p, 1e-8).unwrap().1);
            let d = sp.fibre.distance(&xs, &x).unwrap();
            let u: Vec<f64> = sp.fibre.log_map(&xs, &x).unwrap().iter().map(|v| v / d).collect();
            let s = o.sign() * sp.warping.quad(Quadrature::A, ts, t).unwrap();
            let q = &sp.null_geodesic_quadrature(ts, &xs, &u, o, &[s]).unwrap().points[0];
            on_geodesic = on_geodesic.max(q.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        c.at_most(&format!("{name}: geodesic points, membership residual"), forward, 1e-8);
        c.at_most(&format!("{name}: graph points, membership residual"), member, 1e-8);
        c.at_most(&format!("{name}: graph points, distance to regenerated geodesic"), on_geodesic, 1e-6);
    }
}

fn c2_rw_umbilicity(c: &mut Criterion) {
    let xs = vec![1.0, 1.2, 0.3];
    for k in [-1.0, 0.0, 1.0] {
        for (wname, w) in [("f=1", WarpingProfile::constant(1.0)), ("f=cosh", WarpingProfile::cosh())] {
            let sp = Arc::new(fixtures::robertson_walker(4, k, w));
            let mut res: f64 = 0.0;
            let mut drho: f64 = 0.0;
            let mut count = 0;
            for (i, o) in [Orientation::Future, Orientation::Past].into_iter().enumerate() {
                let l = NullCone::new(sp.clone(), 0.1, xs.clone(), o).unwrap().as_graph().unwrap();
                let grid = random_grid(&[1.3, 0.9, 0.4], &[1.6, 1.3, 0.8], 100, 20 + i as u64);
                let rep = match l.umbilicity_test(&grid, DEFAULT_UMBILIC_TOL, 0) {
                    Ok(r) => r,
                    Err(e) => return c.error(&format!("k={k} {wname}"), e),
                };
                res = res.max(rep.max_residual);
                for s in &rep.samples {
                    let r = rw_cone_rho(k, &sp.warping, 0.1, s.t).unwrap();
                    drho = drho.max((r - s.rho).abs());
                    count += 1;
                }
            }
            c.at_most(&format!("k={k} {wname} ({count} points): umbilicity residual"), res, 1e-6);
            c.at_most(&format!("k={k} {wname}: |rho - closed form|"), drho, 1e-5);
        }
    }
}

fn c3_vertex_divergence(c: &mut Criterion) {
    let mut worst: f64 = 0.0;
    let mut general: f64 = 0.0;
    for k in [-1.0, 0.0, 1.0] {
        for (w, ts) in [(WarpingProfile::cosh(), 0.0), (WarpingProfile::constant(1.0), 0.7), (WarpingProfile::cosh(), 0.3)] {
            let (lim, _) = richardson::extrapolate(
                |e| rw_cone_rho(k, &w, ts, ts + e).unwrap() * w.c(ts, ts + e).unwrap(),
                0.1,
                0.5,
                6,
            );
            let f = w.f(ts).unwrap();
            if f == 1.0 {
                worst = worst.max((lim - 1.0).abs());
            } else {
                general = general.max((lim - 1.0 / (f * f)).abs());
            }
        }
    }
    c.at_most("f(t*) = 1: |lim rho*C - 1|", worst, 1e-3);
    c.at_most("general t*: |lim rho*C - 1/f(t*)^2|", general, 1e-3);
}

fn c4_round_trips(c: &mut Criterion) {
    let sphere_space = |mu: &str, a: f64, b: f64, r: f64, w: WarpingProfile| {
        let leaf = FibreModel::sphere(2, r);
        let mu = fixtures::twisted_field(mu, 2, &[]).unwrap();
        Arc::new(GrwSpace::new(w, FibreModel::twisted(a, b, leaf, mu, 1.0).unwrap()))
    };
    let delta: f64 = 0.7;
    let cases = [
        ("linear", sphere_space("(s + 0.7)/0.7", -delta, f64::INFINITY, delta, WarpingProfile::constant(1.0)), 0.7),
        ("sine", sphere_space("sin(s + 0.7)/sin(0.7)", -delta, PI - delta, delta.sin(), WarpingProfile::constant(1.0)), 0.4),
        ("cosine", sphere_space("cos(s + 0.2)/cos(0.2)", -FRAC_PI_2 - 0.2, FRAC_PI_2 - 0.2, 0.2f64.cos(), WarpingProfile::cosh()), 0.3),
    ];
    let mut rel: f64 = 0.0;
    for (name, sp, t0) in cases {
        let l = construct_hypersurface(sp.clone(), t0).unwrap();
        let d = match reconstruct_decomposition(&l, &[0.0, 1.0, 0.5], &ReconstructOptions::default()) {
            Ok(d) => d,
            Err(e) => return c.error(name, e),
        };
        let tw = match sp.fibre.kind() {
            FibreKind::Twisted(t) => t.clone(),
            _ => unreachable!(),
        };
        for r in &d.records {
            for (k, s) in r.s.iter().enumerate() {
                let q = &r.points[k];
                let want = tw.mu.value(&[*s, q[1], q[2]]).unwrap() / tw.mu.value(&[0.0, q[1], q[2]]).unwrap();
                rel = rel.max((r.mu[k] - want).abs() / want);
            }
        }
    }
    c.at_most("construct -> reconstruct, relative mu error", rel, 1e-4);

    let es = Arc::new(fixtures::einstein_static(4));
    let mk = Arc::new(fixtures::minkowski(4));
    let cones = [
        ("minkowski", NullCone::new(mk, 0.0, vec![0.0; 3], Orientation::Future).unwrap(), vec![0.48, 0.0, 0.64]),
        ("einstein-static", NullCone::new(es, 0.0, vec![1.0, 1.2, 0.3], Orientation::Future).unwrap(), vec![1.5, 1.0, 0.5]),
    ];
    for (name, cone, x0) in cones {
        let l = cone.as_graph().unwrap();
        let d = reconstruct_decomposition(&l, &x0, &ReconstructOptions::default()).unwrap();
        let t0 = l.h.value(&x0).unwrap();
        let sp = Arc::new(GrwSpace::new(l.space.warping.clone(), d.fibre(1.0).unwrap()));
        let built = construct_hypersurface(sp, t0).unwrap();
        let mut err: f64 = 0.0;
        for r in &d.records {
            for (k, s) in r.s.iter().enumerate() {
                let mut q = vec![*s];
                q.extend_from_slice(&r.z);
                err = err.max((built.h.value(&q).unwrap() - l.h.value(&r.points[k]).unwrap()).abs());
            }
        }
        c.at_most(&format!("{name} cone: reconstruct -> construct graph error"), err, 1e-6);
    }
}

fn c5_duality(c: &mut Criterion) {
    let es = Arc::new(fixtures::einstein_static(4));
    let l = NullCone::new(es, 0.0, vec![1.0, 1.2, 0.3], Orientation::Future).unwrap().as_graph().unwrap();
    let x0 = [1.5, 1.0, 0.5];
    let dd = dual_hypersurface(&dual_hypersurface(&l, &x0).unwrap(), &x0).unwrap();
    let mut err: f64 = 0.0;
    for x in box_grid(&[1.3, 0.8, 0.3], &[1.7, 1.2, 0.7], 4) {
        err = err.max((dd.h.value(&x).unwrap() - l.h.value(&x).unwrap()).abs());
    }
    c.at_most("dual of dual, graph error", err, 1e-6);

    let mk = Arc::new(fixtures::minkowski(4));
    let cone = NullCone::new(mk.clone(), 0.0, vec![0.0; 3], Orientation::Future).unwrap().as_graph().unwrap();
    let x0 = [0.3, 0.4, 0.0];
    let t0 = cone.h.value(&x0).unwrap();
    let dual = dual_hypersurface(&cone, &x0).unwrap();
    let past = NullCone::new(mk, 2.0 * t0, vec![0.0; 3], Orientation::Past).unwrap().graph_field();
    let mut err: f64 = 0.0;
    for x in box_grid(&[0.1, 0.2, -0.3], &[0.6, 0.7, 0.3], 4) {
        err = err.max((dual.h.value(&x).unwrap() - past.value(&x).unwrap()).abs());
    }
    c.at_most("minkowski dual vs past cone at (2 t0, 0)", err, 1e-7);

    let tc = desitter_tc();
    c.claim((tc - 0.881374).abs() < 1e-6, format!("t_c = {tc:.9}"));
    let sp = Arc::new(fixtures::de_sitter(4));
    let xs = vec![1.0, 1.2, 0.3];
    let l = NullCone::new(sp.clone(), 0.0, xs.clone(), Orientation::Future).unwrap().as_graph().unwrap();
    let setup = |t0: f64| {
        let delta = sp.warping.c(0.0, t0).unwrap();
        let g = sp.fibre.metric(&xs).unwrap();
        let u0 = [0.2, 0.3, 1.0];
        let nu = inner(&g, &u0, &u0).sqrt();
        let u: Vec<f64> = u0.iter().map(|c| c * delta / nu).collect();
        let x0 = sp.fibre.exp_map(&xs, &u).unwrap();
        let grid: Vec<Vec<f64>> = box_grid(&[-0.05; 3], &[0.05; 3], 3)
            .into_iter()
            .map(|o| x0.iter().zip(&o).map(|(a, b)| a + b).collect())
            .collect();
        (x0, grid)
    };

    let (x0, grid) = setup(0.4);
    match classify_desitter_dual(0.4) {
        Ok(DesitterDual::PastCone { ts }) => {
            let dual = dual_hypersurface(&l, &x0).unwrap();
            let past = NullCone::new(sp.clone(), ts, xs.clone(), Orientation::Past).unwrap().graph_field();
            let err = grid.iter().map(|x| (dual.h.value(x).unwrap() - past.value(x).unwrap()).abs()).fold(0.0, f64::max);
            c.claim(err <= 1e-6, format!("t0 = 0.4: past cone at t_s = {ts:.6}, graph error {err:.2e}"));
        }
        other => c.claim(false, format!("t0 = 0.4 classified {other:?}")),
    }

    let (x0, grid) = setup(tc);
    match classify_desitter_dual(tc) {
        Ok(DesitterDual::TotallyGeodesic) => {
            let rep = dual_hypersurface(&l, &x0).unwrap().umbilicity_test(&grid, 1e-6, 0).unwrap();
            let h = rep.samples.iter().map(|s| s.mean_curvature.abs()).fold(0.0, f64::max);
            c.at_most("t0 = t_c: totally geodesic, max |H|", h, 1e-6);
        }
        other => c.claim(false, format!("t0 = t_c classified {other:?}")),
    }

    let (x0, grid) = setup(1.5);
    match classify_desitter_dual(1.5) {
        Ok(DesitterDual::FutureConeAntipode { tl }) => {
            let sf = sp.fibre.space_form_data().unwrap();
            let e: Vec<f64> = sf.embed(&xs).iter().map(|v: &f64| -v).collect();
            let cone = NullCone::new(sp.clone(), tl, sf.chart(&e), Orientation::Future).unwrap();
            let dual = dual_hypersurface(&l, &x0).unwrap();
            let r = grid.iter().map(|x| cone.contains(&dual.point(x).unwrap(), 1e-7).unwrap().1).fold(0.0, f64::max);
            c.claim(r <= 1e-7, format!("t0 = 1.5: future cone at the antipode, t_l = {tl:.6}, residual {r:.2e}"));
        }
        other => c.claim(false, format!("t0 = 1.5 classified {other:?}")),
    }
}

fn c6_table_fixtures(c: &mut Criterion) {
    for fx in fixtures::table_fixtures(4) {
        let grid = box_grid(&fx.lo, &fx.hi, 3);
        let v = fx.graph.validate_null_graph(&grid).unwrap().max_residual;
        c.at_most(&format!("{}: null residual", fx.name), v, 1e-8);
        let rep = fx.graph.umbilicity_test(&grid, DEFAULT_UMBILIC_TOL, 0).unwrap();
        let h = rep.samples.iter().map(|s| s.mean_curvature.abs()).fold(0.0, f64::max);
        c.at_most(&format!("{}: max |H|", fx.name), h, 1e-6);
        let sample = box_grid(&fx.lo, &fx.hi, 2);
        let mid: Vec<f64> = fx.lo.iter().zip(&fx.hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut candidates: Vec<Vec<f64>> =
            box_grid(&fx.lo, &fx.hi, 2).into_iter().map(|x| x.iter().zip(&mid).map(|(v, m)| 0.8 * v + 0.2 * m).collect()).collect();
        candidates.push(mid);
        let mut total = 0;
        let mut rejected = 0;
        for xs in &candidates {
            for ts in [-0.5, 0.5] {
                total += 1;
                match containment_by_gradient(&fx.graph, xs, ts, &sample) {
                    Ok(v) if v.contained => {}
                    _ => rejected += 1,
                }
            }
        }
        c.claim(rejected == total, format!("{}: {rejected}/{total} candidate vertices rejected", fx.name));
    }
}

fn c7_conjugate_points(c: &mut Criterion) {
    let circle = |m: usize| {
        let mut xs = vec![FRAC_PI_2; m];
        xs[m - 1] = -1.6;
        let mut u = vec![0.0; m];
        u[m - 1] = 1.0;
        (xs, u)
    };
    let start = |sp: &GrwSpace, xs: &[f64], u: &[f64]| {
        let rec = NullGeodesicRecord::generator(Arc::new(sp.clone()), 0.0, xs, u, Orientation::Future, &[0.0]).unwrap();
        (rec.points[0].clone(), rec.velocities[0].clone())
    };
    for n in [4, 5] {
        let sp = fixtures::einstein_static(n);
        let (xs, u) = circle(n - 1);
        let (p, v) = start(&sp, &xs, &u);
        let scalar = scalar_jacobi_from(&sp, &p, &v, 3.5).unwrap();
        let full = full_jacobi_system(&sp, &p, &v, &lin(0.0, 3.5, 8), 3.5, 70).unwrap();
        let s = full.zeros.first().map(|z| z.s).unwrap_or(f64::NAN);
        let rank = full.zeros.first().map(|z| z.kernel_rank).unwrap_or(0);
        c.claim(
            full.zeros.len() == 1 && (s - PI).abs() <= 1e-6 && scalar.zeros.len() == 1,
            format!("R x S^{}: first zero at s = {s:.9}", n - 1),
        );
        c.claim(rank == n - 2, format!("R x S^{}: kernel rank {rank} = n - 2", n - 1));
        if n == 4 {
            c.known(rank == 3, format!("R x S^3: kernel rank {rank}, stated 3 (screen dimension is 2)"));
        } else {
            c.claim(rank == 3, format!("R x S^4: kernel rank {rank} = 3"));
        }
        c.at_most(&format!("R x S^{}: proportionality residual", n - 1), full.max_proportionality, 1e-6);
    }
    let (cxs, cu) = circle(3);
    for (name, sp, xs, u) in [
        ("minkowski", fixtures::minkowski(4), vec![0.1, 0.2, 0.3], vec![0.0, 0.6, 0.8]),
        ("de-sitter", fixtures::de_sitter(4), cxs, cu),
    ] {
        let (p, v) = start(&sp, &xs, &u);
        let scalar = scalar_jacobi_from(&sp, &p, &v, 10.0).unwrap();
        let full = full_jacobi_system(&sp, &p, &v, &lin(0.0, 10.0, 11), 10.0, 200).unwrap();
        c.claim(
            scalar.zeros.is_empty() && full.zeros.is_empty(),
            format!("{name}: no conjugate point up to s = 10 ({} scalar, {} full)", scalar.zeros.len(), full.zeros.len()),
        );
        c.at_most(&format!("{name}: proportionality residual"), full.max_proportionality, 1e-6);
    }
    let sp = fixtures::sphere_product_static();
    let (p, v) = start(&sp, &[1.0, 0.5, 1.2, -0.4], &[1.0, 0.0, 1.0, 0.0]);
    let full = full_jacobi_system(&sp, &p, &v, &lin(0.0, 1.0, 5), 1.0, 20).unwrap();
    let least = full.proportionality.iter().copied().fold(f64::INFINITY, f64::min);
    c.claim(least >= 1e-3, format!("perturbed (S^2 x S^2) generator: min proportionality residual {least:.3e} >= 1e-3"));
}

fn c8_obstruction(c: &mut Criterion) {
    let f = FibreModel::product(vec![FibreModel::sphere(2, 1.0), FibreModel::sphere(2, 1.0)]);
    let rep = obstruction_scan(&f, &[1.0, 0.5, 1.2, -0.4], 200, 16, 11).unwrap();
    c.claim(
        rep.spreads.len() == 200 && rep.min_spread >= 0.5,
        format!("S^2 x S^2: min spread {:.6} >= 0.5 over {} directions", rep.min_spread, rep.spreads.len()),
    );
    let rep = obstruction_scan(&FibreModel::sphere(3, 1.0), &[1.0, 1.2, 0.3], 200, 16, 3).unwrap();
    c.at_most("round S^3: min spread", rep.min_spread, 1e-9);
    let mu = fixtures::twisted_field("exp(s) + z1^2 + z2^2", 2, &[]).unwrap();
    let f = FibreModel::twisted(-3.0, 3.0, FibreModel::euclidean(2), mu, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for x in box_grid(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0], 3) {
        let (exact, sampled) = spread_along(&f, &x, &[1.0, 0.0, 0.0], 8, &mut rng).unwrap();
        worst = worst.max(exact).max(sampled);
    }
    c.at_most("twisted e^s + |z|^2: spread along d/ds", worst, 1e-6);
}

fn c9_sphere_classification(c: &mut Criterion) {
    let xs = vec![1.0, 1.2, 0.3];
    let x0 = vec![1.5, 1.0, 0.5];
    let grid = box_grid(&[1.4, 0.9, 0.4], &[1.6, 1.1, 0.6], 2);
    for (name, sp, ts) in [("einstein-static", fixtures::einstein_static(4), 0.2), ("closed-friedmann", fixtures::closed_friedmann(4), 1.0)] {
        let sp = Arc::new(sp);
        let l = NullCone::new(sp.clone(), ts, xs.clone(), Orientation::Future).unwrap().as_graph().unwrap();
        match classify_umbilic_sphere_fibre(&l, &x0, &grid, DEFAULT_UMBILIC_TOL) {
            Ok(v) => {
                let dt = (v[0] - ts).abs();
                let dx = sp.fibre.distance(&xs, &v[1..]).unwrap();
                c.at_most(&format!("{name}: vertex error (t*, fibre distance)"), dt.max(dx), 1e-5);
            }
            Err(e) => c.error(name, e),
        }
    }
    let ds = Arc::new(fixtures::de_sitter(4));
    let l = NullCone::new(ds, 0.0, xs, Orientation::Future).unwrap().as_graph().unwrap();
    let r = classify_umbilic_sphere_fibre(&l, &x0, &[x0.clone()], DEFAULT_UMBILIC_TOL);
    c.claim(matches!(r, Err(Error::Hypothesis(_))), "de Sitter (integral of 1/f = pi): refused");
}

fn c10_static(c: &mut Criterion) {
    let prof = Arc::new(radial_profile(&RadialStaticFamily::schwarzschild(1.0), 3.0, -0.5, 0.5).unwrap());
    let (model, d) = prof.static_model().unwrap();
    let model = Arc::new(model);
    let l = static_umbilic_construct(model.clone(), &d, 0.4).unwrap();
    let dual = static_dual(model, &d, 0.4).unwrap();
    let grid = box_grid(&[-0.3, 1.0, 0.2], &[0.3, 1.6, 0.8], 3);
    let b = conformal_consistency(&l.graph, &grid).unwrap().max(conformal_consistency(&dual.graph, &grid).unwrap());
    c.at_most("conformal change: B by both routes", b, 1e-5);

    let step = 1e-4;
    let dds = |g: &dyn Fn(f64) -> f64, s: f64| (g(s + step) - g(s - step)) / (2.0 * step);
    let ln_phi = |s: f64| prof.phi(s).unwrap().ln();
    let ln_h_over_phi = |s: f64| {
        let p = prof.phi(s).unwrap();
        (prof.family.h_at(p).unwrap() / p).ln()
    };
    let mut h_err: f64 = 0.0;
    let mut dual_stated: f64 = 0.0;
    let mut dual_measured: f64 = 0.0;
    for x in &grid {
        let s = x[0];
        h_err = h_err.max((l.measured_mean_curvature(x).unwrap() - 2.0 * dds(&ln_phi, s)).abs());
        let measured = dual.measured_mean_curvature(x).unwrap();
        dual_stated = dual_stated.max((measured - 2.0 * dds(&ln_h_over_phi, s)).abs());
        dual_measured = dual_measured.max((measured + 2.0 * dds(&ln_phi, s)).abs());
    }
    c.at_most("Schwarzschild: H* vs 2 d/ds ln phi", h_err, 1e-5);
    c.known(
        dual_stated <= 1e-5,
        format!("Schwarzschild: dual H* vs 2 d/ds ln(h/phi) = {dual_stated:.3e} <= 1e-5 (stated; off by 2h')"),
    );
    c.at_most("Schwarzschild: dual H* vs -2 d/ds ln phi", dual_measured, 1e-5);
    c.at_most("identity (mu''/mu)' + h^2 h'''/2", prof.identity_residual(200).unwrap(), 1e-6);

    let verdict = |v: &Verdict| match v {
        Verdict::ExactlyTwo => "exactly two".to_string(),
        Verdict::Refused(why) => format!("refused ({why})"),
    };
    let s = uniqueness_certificate(&RadialStaticFamily::schwarzschild(1.0), 2.0, 10.0, 200, 0.05, 1e-6).unwrap();
    c.claim(s.verdict == Verdict::ExactlyTwo, format!("Schwarzschild certificate: {}", verdict(&s.verdict)));
    let rn = RadialStaticFamily::reissner_nordstrom(1.0, 0.5).unwrap();
    let r = uniqueness_certificate(&rn, 0.6, 10.0, 400, 0.05, 1e-6).unwrap();
    c.claim(r.verdict == Verdict::ExactlyTwo, format!("Reissner-Nordstrom certificate: {}", verdict(&r.verdict)));
    let f = uniqueness_certificate(&RadialStaticFamily::minkowski(4), 1.0, 5.0, 50, 0.05, 1e-6).unwrap();
    c.claim(matches!(f.verdict, Verdict::Refused(_)), format!("h = 1 certificate: {}", verdict(&f.verdict)));
}

fn c11_position_jacobi(c: &mut Criterion) {
    let xs = [0.5, 1.2, 0.3];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in [FibreModel::euclidean(3), FibreModel::sphere(3, 1.0), FibreModel::hyperbolic(3, -1.0)] {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let x: Vec<f64> = xs.iter().map(|a| a + offset(&mut rng, 0.1, 0.45)).collect();
            let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
            match f.check_lemma_position_jacobi(&xs, &x, &w) {
                Ok((lhs, rhs)) => worst = worst.max((lhs - rhs).abs()),
                Err(e) => return c.error(f.kind_name(), e),
            }
        }
        c.at_most(&format!("{}: 20 random (x, w)", f.kind_name()), worst, 1e-5);
    }
}

fn c12_cli(c: &mut Criterion) {
    let bin = env!("CARGO_BIN_EXE_nullkit");
    let jobs = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../jobs");
    let run = |args: &[&str]| {
        Command::new(bin).args(args).env_remove("NULLKIT_SEED").env_remove("NULLKIT_THREADS").output().unwrap()
    };
    let a = run(&["fixtures", "--seed", "3"]);
    let b = run(&["fixtures", "--seed", "3"]);
    c.claim(
        a.status.code() == Some(0) && !a.stdout.is_empty() && a.stdout == b.stdout,
        format!("fixtures byte-identical across two runs ({} bytes)", a.stdout.len()),
    );
    let job = |f: &str, cmd: &str| {
        let p = jobs.join(f);
        run(&[cmd, "--config", p.to_str().unwrap()]).status.code()
    };
    let codes = [
        job("desitter_cone.toml", "cone"),
        job("bad_expression.toml", "fixtures"),
        job("perturbed_cone.toml", "umbilic"),
    ];
    c.claim(codes == [Some(0), Some(1), Some(2)], format!("exit codes {codes:?}, expected [0, 1, 2]"));
}

fn main() {
    let criteria: [(&str, fn(&mut Criterion)); 12] = [
        ("cone characterization", c1_cone_characterization),
        ("RW cone umbilicity", c2_rw_umbilicity),
        ("vertex divergence", c3_vertex_divergence),
        ("construct/reconstruct round trips", c4_round_trips),
        ("duality", c5_duality),
        ("totally geodesic fixtures", c6_table_fixtures),
        ("conjugate points", c7_conjugate_points),
        ("obstruction", c8_obstruction),
        ("sphere-fibre classification", c9_sphere_classification),
        ("static spaces", c10_static),
        ("position/Jacobi identity", c11_position_jacobi),
        ("CLI", c12_cli),
    ];
    let mut unexpected = 0;
    let mut known = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let mut c = Criterion::default();
        let t = Instant::now();
        let panicked = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| f(&mut c))).is_err();
        if panicked {
            c.claim(false, "panicked");
        }
        let ok = c.claims.iter().all(|k| k.ok);
        println!("{} criterion {}: {name} ({:.2} s)", if ok { "PASS" } else { "FAIL" }, i + 1, t.elapsed().as_secs_f64());
        for k in &c.claims {
            let tag = match (k.ok, k.known) {
                (true, _) => "ok",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            };
            println!("    {tag}: {}", k.text);
            if !k.ok {
                if k.known {
                    known += 1;
                } else {
                    unexpected += 1;
                }
            }
        }
    }
    println!("acceptance: {unexpected} unexpected failures, {known} known failures");
    if unexpected > 0 {
        std::process::exit(1);
    }
}
