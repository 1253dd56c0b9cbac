//! One function per command; each returns a record table, a summary and its assertions.

use super::config::{ConeSpec, GraphSpec, GridSpec, Params, Spacetime, TaskSpec, VerdictSpec};
use super::output::{Assertion, Cell, Table, TaskOutput};
use crate::cone::{rw_cone_rho, NullCone};
use crate::error::{Error, Result};
use crate::fibre::DistanceField;
use crate::fixtures;
use crate::grw::{GrwSpace, Orientation};
use crate::jacobi::{full_jacobi_system, scalar_jacobi_from, NullGeodesicRecord};
use crate::metric::ChartMetric;
use crate::nullhyp::{box_grid, GraphHypersurface};
use crate::par;
use crate::staticspace::{
    conformal_consistency, conformal_h_transform, radial_profile, static_dual, static_umbilic_construct,
    uniqueness_certificate, StaticGraph, Verdict,
};
use crate::twist::{
    classify_desitter_dual, construct_dual, construct_hypersurface, dual_hypersurface, dual_mean_curvature_formula,
    obstruction_scan, reconstruct_decomposition, twisted_mean_curvature_formula, DesitterDual, ReconstructOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

/// Unit and level residual bounds on reconstructed flow lines.
pub const FLOW_UNIT_TOL: f64 = 1e-8;
pub const FLOW_LEVEL_TOL: f64 = 1e-6;
/// Bound on `|(μ″/μ)′ + h² h‴/2|` along a radial profile.
pub const IDENTITY_TOL: f64 = 1e-6;

fn lin(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

fn need<'a>(st: Option<&'a Spacetime>, command: &str) -> Result<&'a Spacetime> {
    st.ok_or_else(|| Error::Config(format!("`{command}` needs a [spacetime] block")))
}

pub fn run_task(task: &TaskSpec, st: Option<&Spacetime>, seed: u64) -> Result<TaskOutput> {
    let cmd = task.command();
    match task {
        TaskSpec::Validate { graph, grid, tol, .. } => {
            let (space, params) = need(st, cmd)?.grw(cmd)?;
            validate(space, params, graph, grid, *tol, seed)
        }
        TaskSpec::Cone { cone: c, grid, generators, params: gp, tol, rho_tol, umbilic_tol, .. } => {
            let (space, _) = need(st, cmd)?.grw(cmd)?;
            cone(space, c, grid, *generators, gp, [*tol, *rho_tol, *umbilic_tol], seed)
        }
        TaskSpec::Umbilic { graph, grid, tol, null_tol, .. } => {
            let (space, params) = need(st, cmd)?.grw(cmd)?;
            umbilic(space, params, graph, grid, [*tol, *null_tol], seed)
        }
        TaskSpec::Reconstruct { graph, x0, s_lo, s_hi, s_samples, leaf_step, leaf_radius, tol, .. } => {
            let (space, params) = need(st, cmd)?.grw(cmd)?;
            let opts = ReconstructOptions {
                s_lo: *s_lo,
                s_hi: *s_hi,
                s_samples: *s_samples,
                leaf_step: *leaf_step,
                leaf_radius: *leaf_radius,
                umbilic_tol: *tol,
            };
            reconstruct(space, params, graph, x0, &opts)
        }
        TaskSpec::Construct { t0, grid, dual, tol, mean_tol, .. } => {
            let (space, _) = need(st, cmd)?.grw(cmd)?;
            construct(space, *t0, grid, *dual, *tol, *mean_tol, seed)
        }
        TaskSpec::Dual { graph, x0, grid, tol, umbilic_tol, mean_tol, .. } => {
            let (space, params) = need(st, cmd)?.grw(cmd)?;
            dual(space, params, graph, x0, grid, [*tol, *umbilic_tol, *mean_tol], seed)
        }
        TaskSpec::ClassifyDs { t0, expect } => classify_ds(t0, expect.as_deref()),
        TaskSpec::Conjugate {
            ts,
            xs,
            u,
            orientation,
            s_max,
            samples,
            scan,
            expect_zero,
            expect_rank,
            expect_none,
            zero_tol,
            max_proportionality,
            min_proportionality,
        } => {
            let (space, _) = need(st, cmd)?.grw(cmd)?;
            let gen = ConeSpec { ts: *ts, xs: xs.clone(), orientation: *orientation };
            let exp = JacobiExpectations {
                zero: *expect_zero,
                rank: *expect_rank,
                none: *expect_none,
                zero_tol: *zero_tol,
                max_prop: *max_proportionality,
                min_prop: *min_proportionality,
            };
            conjugate(space, &gen, u, *s_max, *samples, *scan, &exp)
        }
        TaskSpec::Static { r0, s_range, samples, t0, certificate, graph, grid, null_tol, tol, .. } => {
            match need(st, cmd)? {
                Spacetime::Radial(family) => {
                    if graph.is_some() || grid.is_some() {
                        return Err(Error::Config("radial-static tasks take r0/s_range, not graph/grid".into()));
                    }
                    let r0 = r0.ok_or_else(|| Error::Config("`static` on a radial-static spacetime needs r0".into()))?;
                    radial_static(family, r0, *s_range, *samples, *t0, certificate.as_ref(), *null_tol, *tol)
                }
                Spacetime::Static { model, params } => {
                    let (Some(g), Some(grid)) = (graph, grid) else {
                        return Err(Error::Config("`static` on a static spacetime needs graph and grid".into()));
                    };
                    general_static(model.clone(), params, g, grid, *null_tol, *tol, seed)
                }
                Spacetime::Grw { .. } => Err(Error::Config("`static` needs a static or radial-static spacetime".into())),
            }
        }
        TaskSpec::Obstruction { point, directions, planes, threshold, expect_obstructed, .. } => {
            let fibre = need(st, cmd)?.fibre()?;
            obstruction(&fibre, point, *directions, *planes, *threshold, *expect_obstructed, seed)
        }
        TaskSpec::Fixtures { n } => fixtures_table(*n),
    }
}

fn validate(space: Arc<GrwSpace>, params: &Params, graph: &GraphSpec, grid: &GridSpec, tol: f64, seed: u64) -> Result<TaskOutput> {
    let l = graph.build(space, params)?;
    let pts = grid.build(l.space.fibre.dim(), seed)?;
    let rep = l.validate_null_graph(&pts)?;
    let ts = par::try_map(&pts, |x| l.h.value(x))?;
    let mut out = TaskOutput::new("validate", Table::new(&["x", "t", "residual"]));
    for ((x, t), r) in pts.iter().zip(&ts).zip(&rep.residuals) {
        out.table.push(vec![x.as_slice().into(), (*t).into(), (*r).into()]);
    }
    out.check(Assertion::at_most("null graph residual", rep.max_residual, tol));
    Ok(out)
}

fn random_unit(fibre: &crate::fibre::FibreModel, x: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    loop {
        let v: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(rng)).collect();
        let n = fibre.norm(x, &v)?;
        if n > 1e-6 {
            return Ok(v.iter().map(|c| c / n).collect());
        }
    }
}

fn cone(
    space: Arc<GrwSpace>,
    spec: &ConeSpec,
    grid: &GridSpec,
    generators: usize,
    gparams: &[f64],
    [tol, rho_tol, umbilic_tol]: [f64; 3],
    seed: u64,
) -> Result<TaskOutput> {
    let c = NullCone::new(space.clone(), spec.ts, spec.xs.clone(), spec.orientation.into())?;
    let l = c.as_graph()?;
    let pts = grid.build(space.fibre.dim(), seed)?;
    let null = l.validate_null_graph(&pts)?;
    let rep = l.umbilicity_test(&pts, umbilic_tol, seed)?;
    let k = space.fibre.constant_curvature();
    let membership = par::try_map(&rep.samples, |s| {
        let mut p = vec![s.t];
        p.extend_from_slice(&s.x);
        c.contains(&p, tol).map(|r| r.1)
    })?;
    let closed: Vec<f64> = rep
        .samples
        .iter()
        .map(|s| k.map_or(Ok(f64::NAN), |k| rw_cone_rho(k, &space.warping, spec.ts, s.t)))
        .collect::<Result<_>>()?;
    let mut out = TaskOutput::new(
        "cone",
        Table::new(&["x", "t", "membership_residual", "null_residual", "rho", "rho_closed", "umbilic_residual"]),
    );
    for (i, s) in rep.samples.iter().enumerate() {
        out.table.push(vec![
            s.x.as_slice().into(),
            s.t.into(),
            membership[i].into(),
            null.residuals[i].into(),
            s.rho.into(),
            closed[i].into(),
            s.residual.into(),
        ]);
    }
    out.check(Assertion::at_most("graph membership residual", max_of(membership.iter().copied()), tol));
    out.check(Assertion::at_most("null graph residual", null.max_residual, tol));
    if k.is_some() {
        out.check(Assertion::at_most("umbilicity residual", rep.max_residual, umbilic_tol));
        let dev = max_of(rep.samples.iter().zip(&closed).map(|(s, r)| (s.rho - r).abs()));
        out.check(Assertion::at_most("rho vs closed form", dev, rho_tol));
    }
    if generators > 0 {
        let params = if gparams.is_empty() { lin(0.05, 0.5, 10) } else { gparams.to_vec() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dirs: Vec<Vec<f64>> = (0..generators).map(|_| random_unit(&space.fibre, &spec.xs, &mut rng)).collect::<Result<_>>()?;
        let res = par::try_map(&dirs, |u| {
            let curve = space.null_geodesic_quadrature(spec.ts, &spec.xs, u, spec.orientation.into(), &params)?;
            let mut worst: f64 = 0.0;
            for p in &curve.points {
                worst = worst.max(c.contains(p, tol)?.1);
            }
            Ok::<_, Error>(worst)
        })?;
        out.note("generator_points", dirs.len() * params.len());
        out.check(Assertion::at_most("generator membership residual", max_of(res), tol));
    }
    Ok(out)
}

fn umbilic(
    space: Arc<GrwSpace>,
    params: &Params,
    graph: &GraphSpec,
    grid: &GridSpec,
    [tol, null_tol]: [f64; 2],
    seed: u64,
) -> Result<TaskOutput> {
    let l = graph.build(space, params)?;
    let pts = grid.build(l.space.fibre.dim(), seed)?;
    let null = l.validate_null_graph(&pts)?;
    let rep = l.umbilicity_test(&pts, tol, seed)?;
    let mut out = TaskOutput::new(
        "umbilic",
        Table::new(&["x", "t", "null_residual", "rho", "mean_curvature", "residual", "pair_residual", "frame_spread"]),
    );
    for (s, r) in rep.samples.iter().zip(&null.residuals) {
        out.table.push(vec![
            s.x.as_slice().into(),
            s.t.into(),
            (*r).into(),
            s.rho.into(),
            s.mean_curvature.into(),
            s.residual.into(),
            s.pair_residual.into(),
            s.frame_spread.into(),
        ]);
    }
    out.note("umbilic", rep.umbilic);
    out.check(Assertion::at_most("null graph residual", null.max_residual, null_tol));
    out.check(Assertion::at_most("umbilicity residual", rep.max_residual, tol));
    Ok(out)
}

fn reconstruct(space: Arc<GrwSpace>, params: &Params, graph: &GraphSpec, x0: &[f64], opts: &ReconstructOptions) -> Result<TaskOutput> {
    let l = graph.build(space, params)?;
    let d = reconstruct_decomposition(&l, x0, opts)?;
    let mut out = TaskOutput::new("reconstruct", Table::new(&["line", "z", "s", "mu", "dmu", "point"]));
    for (i, r) in d.records.iter().enumerate() {
        for k in 0..r.s.len() {
            out.table.push(vec![
                i.into(),
                r.z.as_slice().into(),
                r.s[k].into(),
                r.mu[k].into(),
                r.dmu[k].into(),
                r.points[k].as_slice().into(),
            ]);
        }
    }
    out.note("t0", l.h.value(x0)?);
    out.note("anchor_z", d.anchor_z.clone());
    out.check(Assertion::at_most("normalisation residual", d.normalization_residual()?, FLOW_UNIT_TOL));
    out.check(Assertion::at_most("unit residual", max_of(d.records.iter().map(|r| r.unit_residual)), FLOW_UNIT_TOL));
    out.check(Assertion::at_most("level residual", max_of(d.records.iter().map(|r| r.level_residual)), FLOW_LEVEL_TOL));
    Ok(out)
}

fn mean_curvature_rows(l: &GraphHypersurface, pts: &[Vec<f64>], formula: impl Fn(&[f64], f64) -> Result<f64> + Sync) -> Result<Vec<[f64; 4]>> {
    let null = l.validate_null_graph(pts)?;
    let rows = par::try_map(pts, |x| {
        let t = l.h.value(x)?;
        Ok::<_, Error>((t, l.mean_curvature(x)?, formula(x, t)?))
    })?;
    Ok(rows.into_iter().zip(null.residuals).map(|((t, h, f), r)| [t, r, h, f]).collect())
}

fn construct(space: Arc<GrwSpace>, t0: f64, grid: &GridSpec, dual: bool, tol: f64, mean_tol: f64, seed: u64) -> Result<TaskOutput> {
    let l = if dual { construct_dual(space.clone(), t0)? } else { construct_hypersurface(space.clone(), t0)? };
    let pts = grid.build(space.fibre.dim(), seed)?;
    let rows = mean_curvature_rows(&l, &pts, |x, t| twisted_mean_curvature_formula(&space, t, x, dual))?;
    let mut out = TaskOutput::new(
        "construct",
        Table::new(&["x", "t", "null_residual", "mean_curvature", "mean_curvature_formula"]),
    );
    for (x, r) in pts.iter().zip(&rows) {
        out.table.push(vec![x.as_slice().into(), r[0].into(), r[1].into(), r[2].into(), r[3].into()]);
    }
    out.check(Assertion::at_most("null graph residual", max_of(rows.iter().map(|r| r[1])), tol));
    out.check(Assertion::at_most("mean curvature vs formula", max_of(rows.iter().map(|r| (r[2] - r[3]).abs())), mean_tol));
    Ok(out)
}

fn dual(
    space: Arc<GrwSpace>,
    params: &Params,
    graph: &GraphSpec,
    x0: &[f64],
    grid: &GridSpec,
    [tol, umbilic_tol, mean_tol]: [f64; 3],
    seed: u64,
) -> Result<TaskOutput> {
    let l = graph.build(space, params)?;
    let d = dual_hypersurface(&l, x0)?;
    let pts = grid.build(l.space.fibre.dim(), seed)?;
    let rows = mean_curvature_rows(&d, &pts, |x, _| dual_mean_curvature_formula(&l, x0, x))?;
    let rep = d.umbilicity_test(&pts, umbilic_tol, seed)?;
    let mut out = TaskOutput::new(
        "dual",
        Table::new(&["x", "t", "null_residual", "mean_curvature", "mean_curvature_formula", "umbilic_residual"]),
    );
    for ((x, r), s) in pts.iter().zip(&rows).zip(&rep.samples) {
        out.table.push(vec![x.as_slice().into(), r[0].into(), r[1].into(), r[2].into(), r[3].into(), s.residual.into()]);
    }
    out.note("t0", l.h.value(x0)?);
    out.check(Assertion::at_most("null graph residual", max_of(rows.iter().map(|r| r[1])), tol));
    out.check(Assertion::at_most("umbilicity residual", rep.max_residual, umbilic_tol));
    out.check(Assertion::at_most("mean curvature vs formula", max_of(rows.iter().map(|r| (r[2] - r[3]).abs())), mean_tol));
    Ok(out)
}

pub fn desitter_class_name(c: &DesitterDual) -> &'static str {
    match c {
        DesitterDual::PastCone { .. } => "past-cone",
        DesitterDual::FutureConeAntipode { .. } => "future-cone-antipode",
        DesitterDual::TotallyGeodesic => "totally-geodesic",
        DesitterDual::Boundary => "boundary",
    }
}

fn classify_ds(t0: &[f64], expect: Option<&[String]>) -> Result<TaskOutput> {
    if let Some(e) = expect {
        if e.len() != t0.len() {
            return Err(Error::Config("`expect` must have one entry per t0".into()));
        }
    }
    let tc = crate::twist::desitter_tc();
    let mut out = TaskOutput::new("classify-ds", Table::new(&["t0", "class", "vertex_time"]));
    out.note("t_c", tc);
    for (i, &t) in t0.iter().enumerate() {
        let c = classify_desitter_dual(t)?;
        let vt = match c {
            DesitterDual::PastCone { ts } => ts,
            DesitterDual::FutureConeAntipode { tl } => tl,
            _ => f64::NAN,
        };
        let name = desitter_class_name(&c);
        out.table.push(vec![t.into(), name.into(), vt.into()]);
        if let Some(e) = expect {
            out.check(Assertion::holds(format!("class at t0 = {t}"), e[i] == name, format!("{name}, expected {}", e[i])));
        }
    }
    Ok(out)
}

pub struct JacobiExpectations {
    pub zero: Option<f64>,
    pub rank: Option<usize>,
    pub none: bool,
    pub zero_tol: f64,
    pub max_prop: Option<f64>,
    pub min_prop: Option<f64>,
}

fn conjugate(
    space: Arc<GrwSpace>,
    gen: &ConeSpec,
    u: &[f64],
    s_max: f64,
    samples: usize,
    scan: usize,
    exp: &JacobiExpectations,
) -> Result<TaskOutput> {
    if !(s_max > 0.0) || samples < 2 || scan < 2 {
        return Err(Error::Config("conjugate needs s_max > 0, samples ≥ 2 and scan ≥ 2".into()));
    }
    let orient: Orientation = gen.orientation.into();
    let rec = NullGeodesicRecord::generator(space.clone(), gen.ts, &gen.xs, u, orient, &[0.0])?;
    let (p, v) = (rec.points[0].clone(), rec.velocities[0].clone());
    let scalar = scalar_jacobi_from(&space, &p, &v, s_max)?;
    let params = lin(0.0, s_max, samples);
    let full = full_jacobi_system(&space, &p, &v, &params, s_max, scan)?;
    let mut out = TaskOutput::new("conjugate", Table::new(&["route", "s", "multiplicity", "value"]));
    for z in &scalar.zeros {
        out.table.push(vec!["scalar".into(), z.s.into(), z.multiplicity.into(), f64::NAN.into()]);
    }
    for z in &full.zeros {
        let smin = z.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        out.table.push(vec!["full".into(), z.s.into(), z.kernel_rank.into(), smin.into()]);
    }
    for (s, r) in full.params.iter().zip(&full.proportionality) {
        out.table.push(vec!["proportionality".into(), (*s).into(), 0usize.into(), (*r).into()]);
    }
    out.note("ricci_route", format!("{:?}", scalar.route));
    out.note("s_end", scalar.s_end);
    out.note("frame_residual", full.frame_residual);
    out.note("max_proportionality", full.max_proportionality);
    if let Some(want) = exp.zero {
        let sc = scalar.first().map_or(f64::INFINITY, |z| (z.s - want).abs());
        let fu = full.zeros.first().map_or(f64::INFINITY, |z| (z.s - want).abs());
        out.check(Assertion::at_most("first scalar zero", sc, exp.zero_tol));
        out.check(Assertion::at_most("first full-system zero", fu, exp.zero_tol));
    }
    if let Some(rank) = exp.rank {
        let got = full.zeros.first().map(|z| z.kernel_rank);
        out.check(Assertion::holds("kernel rank", got == Some(rank), format!("{got:?}, expected {rank}")));
    }
    if exp.none {
        let n = scalar.zeros.len() + full.zeros.len();
        out.check(Assertion::holds("no conjugate points", n == 0, format!("{n} zeros up to s = {s_max}")));
    }
    if let Some(b) = exp.max_prop {
        out.check(Assertion::at_most("proportionality residual", full.max_proportionality, b));
    }
    if let Some(b) = exp.min_prop {
        let lo = full.proportionality.iter().skip(1).copied().fold(f64::INFINITY, f64::min);
        out.check(Assertion::at_least("proportionality residual (min)", lo, b));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn radial_static(
    family: &crate::staticspace::RadialStaticFamily,
    r0: f64,
    range: [f64; 2],
    samples: usize,
    t0: f64,
    cert: Option<&super::config::CertificateSpec>,
    null_tol: f64,
    tol: f64,
) -> Result<TaskOutput> {
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    let prof = Arc::new(radial_profile(family, r0, range[0], range[1])?);
    let (model, d) = prof.static_model()?;
    let model = Arc::new(model);
    let l = static_umbilic_construct(model.clone(), &d, t0)?;
    let dl = static_dual(model, &d, t0)?;
    let (lo, hi) = prof.interval();
    let ss: Vec<f64> = (0..samples).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / samples as f64).collect();
    let pts: Vec<Vec<f64>> = ss
        .iter()
        .map(|s| {
            let mut x = vec![*s];
            x.extend_from_slice(&d.anchor_z);
            x
        })
        .collect();
    let rows = par::try_map(&pts, |x| {
        let s = x[0];
        let (a, b) = prof.identity_pair(s)?;
        Ok::<_, Error>([
            s,
            prof.phi(s)?,
            prof.mu(s)?,
            prof.potential(s)?,
            l.measured_mean_curvature(x)?,
            l.mean_curvature_formula(x)?,
            dl.measured_mean_curvature(x)?,
            dl.mean_curvature_formula(x)?,
            dl.phi_over_mu_formula(x)?,
            (a - b).abs(),
        ])
    })?;
    let mut out = TaskOutput::new(
        "static",
        Table::new(&[
            "s",
            "r",
            "mu",
            "phi",
            "H_star",
            "H_star_formula",
            "H_dual_star",
            "H_dual_formula",
            "H_dual_phi_over_mu",
            "identity_residual",
        ]),
    );
    for r in &rows {
        out.table.push(r.iter().map(|v| Cell::Num(*v)).collect());
    }
    out.note("lower_stop", format!("{:?}", prof.lower_stop));
    out.note("upper_stop", format!("{:?}", prof.upper_stop));
    let (null, _) = l.check(&pts)?;
    let (dnull, _) = dl.check(&pts)?;
    out.check(Assertion::at_most("null residual", null.max(dnull), null_tol));
    out.check(Assertion::at_most("H* vs formula", max_of(rows.iter().map(|r| (r[4] - r[5]).abs())), tol));
    out.check(Assertion::at_most("dual H* vs formula", max_of(rows.iter().map(|r| (r[6] - r[7]).abs())), tol));
    out.check(Assertion::at_most("(mu''/mu)' + h^2 h'''/2", max_of(rows.iter().map(|r| r[9])), IDENTITY_TOL));
    let cons = conformal_consistency(&l.graph, &pts)?.max(conformal_consistency(&dl.graph, &pts)?);
    out.check(Assertion::at_most("conformal B agreement", cons, tol));
    if let Some(c) = cert {
        let cert = uniqueness_certificate(family, c.r_range[0], c.r_range[1], c.samples, c.eps_int, c.tol)?;
        let verdict = match &cert.verdict {
            Verdict::ExactlyTwo => "exactly-two".to_string(),
            Verdict::Refused(why) => format!("refused: {why}"),
        };
        out.note("certificate", verdict.clone());
        out.note("certificate_zeros", cert.zeros.clone());
        out.note("certificate_flat_run", cert.longest_flat_run);
        out.note("certificate_identity_residual", cert.identity_residual);
        if let Some(want) = c.expect {
            let ok = matches!(
                (want, &cert.verdict),
                (VerdictSpec::ExactlyTwo, Verdict::ExactlyTwo) | (VerdictSpec::Refused, Verdict::Refused(_))
            );
            out.check(Assertion::holds("uniqueness certificate", ok, verdict));
        }
    }
    Ok(out)
}

fn general_static(
    model: Arc<crate::staticspace::StaticModel>,
    params: &Params,
    graph: &str,
    grid: &GridSpec,
    null_tol: f64,
    tol: f64,
    seed: u64,
) -> Result<TaskOutput> {
    let h = super::config::field_on(&model.fibre, graph, params)?;
    let g = StaticGraph::new(model.clone(), h)?;
    let pts = grid.build(model.fibre.dim(), seed)?;
    let n = model.n();
    let rows = par::try_map(&pts, |x| {
        let hs = g.mean_curvature_star(x)?;
        Ok::<_, Error>([g.h.value(x)?, g.null_residual(x)?, hs, conformal_h_transform(hs, g.xi_ln_phi(x)?, n)])
    })?;
    let mut out = TaskOutput::new("static", Table::new(&["x", "t", "null_residual", "H_star", "H"]));
    for (x, r) in pts.iter().zip(&rows) {
        out.table.push(vec![x.as_slice().into(), r[0].into(), r[1].into(), r[2].into(), r[3].into()]);
    }
    out.check(Assertion::at_most("null residual", max_of(rows.iter().map(|r| r[1])), null_tol));
    out.check(Assertion::at_most("conformal B agreement", conformal_consistency(&g, &pts)?, tol));
    Ok(out)
}

fn obstruction(
    fibre: &crate::fibre::FibreModel,
    point: &[f64],
    directions: usize,
    planes: usize,
    threshold: f64,
    expect: Option<bool>,
    seed: u64,
) -> Result<TaskOutput> {
    let rep = obstruction_scan(fibre, point, directions, planes, seed)?;
    let mut out = TaskOutput::new("obstruction", Table::new(&["direction", "v", "spread", "sampled_spread"]));
    for (i, v) in rep.directions.iter().enumerate() {
        out.table.push(vec![i.into(), v.as_slice().into(), rep.spreads[i].into(), rep.sampled_spreads[i].into()]);
    }
    let obstructed = rep.certifies_no_decomposition(threshold);
    out.note("min_spread", rep.min_spread);
    out.note("obstructed", obstructed);
    if let Some(want) = expect {
        out.check(Assertion::holds(
            "obstruction verdict",
            obstructed == want,
            format!("min spread {:.6e} against threshold {threshold:e}", rep.min_spread),
        ));
    }
    Ok(out)
}

/// Mean curvature bound for the totally geodesic table graphs.
pub const TABLE_MEAN_TOL: f64 = 1e-6;
pub const TABLE_NULL_TOL: f64 = 1e-8;
/// Bound on `|H − (n−2)ρ_RW|` for the cone fixtures.
pub const CONE_MEAN_TOL: f64 = 1e-5;

fn cone_fixture(space: GrwSpace, ts: f64, xs: Vec<f64>) -> Result<(GraphHypersurface, f64)> {
    let space = Arc::new(space);
    let k = space.fibre.constant_curvature().unwrap_or(0.0);
    let h = if space.fibre.kind_name() == "euclidean" {
        Arc::new(DistanceField { fibre: space.fibre.clone(), center: xs }) as crate::field::FieldRef
    } else {
        NullCone::new(space.clone(), ts, xs, Orientation::Future)?.graph_field()
    };
    Ok((GraphHypersurface::new(space, h)?, k))
}

fn fixtures_table(n: usize) -> Result<TaskOutput> {
    if n < 4 {
        return Err(Error::Config("fixtures need n ≥ 4".into()));
    }
    let m = n - 1;
    let mut out = TaskOutput::new(
        "fixtures",
        Table::new(&["fixture", "x", "t", "null_residual", "mean_curvature", "mean_curvature_expected"]),
    );
    for fx in fixtures::table_fixtures(n) {
        let pts = box_grid(&fx.lo, &fx.hi, 3);
        let rows = mean_curvature_rows(&fx.graph, &pts, |_, _| Ok(0.0))?;
        for (x, r) in pts.iter().zip(&rows) {
            out.table.push(vec![format!("table-{}", fx.name).into(), x.as_slice().into(), r[0].into(), r[1].into(), r[2].into(), r[3].into()]);
        }
        out.check(Assertion::at_most(format!("table-{} null residual", fx.name), max_of(rows.iter().map(|r| r[1])), TABLE_NULL_TOL));
        out.check(Assertion::at_most(format!("table-{} max |H|", fx.name), max_of(rows.iter().map(|r| r[2].abs())), TABLE_MEAN_TOL));
    }
    let mut xs = vec![1.0, 1.2];
    xs.resize(m, 0.3);
    let lo: Vec<f64> = xs.iter().map(|v| v + 0.1).collect();
    let hi: Vec<f64> = xs.iter().map(|v| v + 0.25).collect();
    let cases = [
        ("cone-minkowski", fixtures::minkowski(n)),
        ("cone-de-sitter", fixtures::de_sitter(n)),
        ("cone-einstein-static", fixtures::einstein_static(n)),
        ("cone-exp-hyperbolic", fixtures::exp_hyperbolic(n)),
    ];
    for (name, space) in cases {
        let (l, k) = cone_fixture(space, 0.0, xs.clone())?;
        let pts = box_grid(&lo, &hi, 2);
        let w = l.space.warping.clone();
        let n2 = (n - 2) as f64;
        let rows = mean_curvature_rows(&l, &pts, |_, t| Ok(n2 * rw_cone_rho(k, &w, 0.0, t)?))?;
        for (x, r) in pts.iter().zip(&rows) {
            out.table.push(vec![name.into(), x.as_slice().into(), r[0].into(), r[1].into(), r[2].into(), r[3].into()]);
        }
        out.check(Assertion::at_most(format!("{name} null residual"), max_of(rows.iter().map(|r| r[1])), TABLE_NULL_TOL));
        out.check(Assertion::at_most(
            format!("{name} H vs (n-2) rho"),
            max_of(rows.iter().map(|r| (r[2] - r[3]).abs())),
            CONE_MEAN_TOL,
        ));
    }
    out.note("t_c", crate::twist::desitter_tc());
    Ok(out)
}

pub fn default_task(command: &str) -> Option<TaskSpec> {
    match command {
        "fixtures" => Some(TaskSpec::Fixtures { n: 4 }),
        "classify-ds" => Some(TaskSpec::ClassifyDs { t0: vec![0.4, crate::twist::desitter_tc(), 1.5], expect: None }),
        _ => None,
    }
}

