//! Conjugate points along null generators: the scalar Jacobi equation
//! `J″ + Ric(γ′,γ′)/(n−2) J = 0`, the full screen Jacobi system used as its oracle, and the
//! comparison of the Ricci route with the `ρ` route of the null hypersurface.
//!
//! Generators are affinely parametrised with `g(γ′, ζ) = ∓1` at `s = 0`. If the hypersurface
//! normal is `ξ = γ′/c` then `ρ` scales by `c`, so curvature terms are compared after
//! multiplying the `ρ` route by `c²`.

use crate::error::{Error, Result};
use crate::fibre::gram_schmidt;
use crate::grw::{GrwSpace, Orientation};
use crate::metric::{self, ChartMetric};
use crate::numeric::ode::{self, OdeOptions, Termination};
use crate::nullhyp::GraphHypersurface;
use nalgebra::{DMatrix, SymmetricEigen};
use std::sync::Arc;

/// Singular values below this count towards the kernel of the Jacobi matrix.
pub const KERNEL_TOL: f64 = 1e-7;
/// Zeros closer than this to the vertex are ignored.
const VERTEX_SKIP: f64 = 1e-6;

/// A null generator sampled through the warping quadratures.
#[derive(Clone, Debug)]
pub struct NullGeodesicRecord {
    pub space: Arc<GrwSpace>,
    pub orientation: Orientation,
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// `|g(γ′,γ′)| / (γ′^t)²` at every sample.
    pub nullity: Vec<f64>,
}

impl NullGeodesicRecord {
    /// Generator from `(t_*, x_*)` with fibre direction `u` (normalised here).
    pub fn generator(
        space: Arc<GrwSpace>,
        ts: f64,
        xs: &[f64],
        u: &[f64],
        orientation: Orientation,
        params: &[f64],
    ) -> Result<Self> {
        if params.first().copied() != Some(0.0) || params.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("generator parameters must start at 0 and increase".into()));
        }
        let un = space.fibre.norm(xs, u)?;
        if un == 0.0 {
            return Err(Error::Degenerate("zero fibre direction".into()));
        }
        let u: Vec<f64> = u.iter().map(|c| c / un).collect();
        let curve = space.null_geodesic_quadrature(ts, xs, &u, orientation, params)?;
        let nullity = curve
            .points
            .iter()
            .zip(&curve.velocities)
            .map(|(p, v)| Ok(space.metric_eval(p, v, v)?.abs() / (v[0] * v[0])))
            .collect::<Result<Vec<f64>>>()?;
        Ok(NullGeodesicRecord {
            space,
            orientation,
            params: curve.params,
            points: curve.points,
            velocities: curve.velocities,
            nullity,
        })
    }

    pub fn max_nullity(&self) -> f64 {
        self.nullity.iter().copied().fold(0.0, f64::max)
    }

    /// `g(γ′, ζ)` at the first sample.
    pub fn normalization(&self) -> Result<f64> {
        let p = &self.points[0];
        let z = self.space.zeta(p)?;
        self.space.metric_eval(p, &self.velocities[0], &z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RicciRoute {
    ClosedForm,
    Tensor,
}

#[derive(Clone, Debug)]
pub struct RicciSamples {
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    pub route: RicciRoute,
}

/// `Ric(v,v)` for a null `v` when the fibre has constant curvature `k`:
/// `(n−2)(k + f′² − f f″)/f⁴ · (f vᵗ)²`.
pub fn ricci_closed_form(space: &GrwSpace, t: f64, vt: f64) -> Result<Option<f64>> {
    let Some(k) = space.fibre.constant_curvature() else { return Ok(None) };
    let (f, f1, f2) = space.warping.jet(t)?;
    let m = (space.n() - 2) as f64;
    Ok(Some(m * (k + f1 * f1 - f * f2) / (f * f) * vt * vt))
}

/// `Ric(v,v)` from the chart curvature tensor.
pub fn ricci_tensor(space: &GrwSpace, p: &[f64], v: &[f64]) -> Result<f64> {
    let g = space.metric(p)?;
    let ginv = metric::invert(&g)?;
    let ric = space.riemann(p)?.ricci(&ginv);
    let n = v.len();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            s += ric[(a, b)] * v[a] * v[b];
        }
    }
    Ok(s)
}

fn ricci_at(space: &GrwSpace, p: &[f64], v: &[f64], route: RicciRoute) -> Result<f64> {
    match route {
        RicciRoute::ClosedForm => ricci_closed_form(space, p[0], v[0])?
            .ok_or_else(|| Error::Hypothesis("fibre has no constant curvature".into())),
        RicciRoute::Tensor => ricci_tensor(space, p, v),
    }
}

fn preferred_route(space: &GrwSpace) -> RicciRoute {
    if space.fibre.constant_curvature().is_some() {
        RicciRoute::ClosedForm
    } else {
        RicciRoute::Tensor
    }
}

/// `Ric(γ′,γ′)` along the record, using the closed form when available.
pub fn ricci_along(rec: &NullGeodesicRecord) -> Result<RicciSamples> {
    ricci_along_route(rec, preferred_route(&rec.space))
}

pub fn ricci_along_route(rec: &NullGeodesicRecord, route: RicciRoute) -> Result<RicciSamples> {
    let values = rec
        .points
        .iter()
        .zip(&rec.velocities)
        .map(|(p, v)| ricci_at(&rec.space, p, v, route))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RicciSamples { params: rec.params.clone(), values, route })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateZero {
    pub s: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct ConjugateReport {
    pub zeros: Vec<ConjugateZero>,
    pub route: RicciRoute,
    pub s_max: f64,
    /// Parameter actually reached; smaller than `s_max` if the curve left the chart.
    pub s_end: f64,
    pub rhs_evals: usize,
    pub steps: usize,
    /// `(J, J′)` at `s_end`.
    pub final_state: (f64, f64),
}

impl ConjugateReport {
    pub fn first(&self) -> Option<ConjugateZero> {
        self.zeros.first().copied()
    }
}

/// Scalar Jacobi equation along the generator starting at `rec`'s first sample, up to `s_max`.
pub fn scalar_jacobi(rec: &NullGeodesicRecord, s_max: f64) -> Result<ConjugateReport> {
    scalar_jacobi_from(&rec.space, &rec.points[0], &rec.velocities[0], s_max)
}

/// Scalar Jacobi equation along the null geodesic with initial data `(p0, v0)`.
///
/// With a constant-curvature fibre only `t(s)` enters, through `t″ = −(f′/f) t′²`, so the
/// integration does not depend on the fibre chart.
pub fn scalar_jacobi_from(space: &GrwSpace, p0: &[f64], v0: &[f64], s_max: f64) -> Result<ConjugateReport> {
    let n = space.n();
    if n < 3 {
        return Err(Error::Config("scalar Jacobi equation needs n ≥ 3".into()));
    }
    if !(s_max > 0.0) {
        return Err(Error::Config(format!("s_max must be positive, got {s_max}")));
    }
    let q = space.metric_eval(p0, v0, v0)?;
    if q.abs() > 1e-8 * v0[0] * v0[0] {
        return Err(Error::Domain(format!("initial velocity is not null: g(V,V) = {q:e}")));
    }
    let m = (n - 2) as f64;
    let route = preferred_route(space);
    let opts = OdeOptions::default();
    let (sol, jidx) = match route {
        RicciRoute::ClosedForm => {
            let y0 = [p0[0], v0[0], 0.0, 1.0];
            let sol = ode::integrate(
                |_, y, dy| {
                    let out = space.warping.jet(y[0]).and_then(|(f, f1, _)| {
                        let ric = ricci_closed_form(space, y[0], y[1])?.unwrap_or(f64::NAN);
                        Ok((f, f1, ric))
                    });
                    match out {
                        Ok((f, f1, ric)) => {
                            dy[0] = y[1];
                            dy[1] = -f1 / f * y[1] * y[1];
                            dy[2] = y[3];
                            dy[3] = -ric / m * y[2];
                        }
                        Err(_) => dy.iter_mut().for_each(|d| *d = f64::NAN),
                    }
                },
                0.0,
                &y0,
                s_max,
                &opts,
                |_, y| !space.warping.contains(y[0]),
            );
            (sol, 2)
        }
        RicciRoute::Tensor => {
            let mut y0 = p0.to_vec();
            y0.extend_from_slice(v0);
            y0.extend_from_slice(&[0.0, 1.0]);
            let sol = ode::integrate(
                |_, y, dy| {
                    let (q, vel) = (&y[..n], &y[n..2 * n]);
                    let out = space
                        .christoffel(q)
                        .and_then(|gam| Ok((gam.contract(vel, vel), ricci_tensor(space, q, vel)?)));
                    match out {
                        Ok((acc, ric)) => {
                            dy[..n].copy_from_slice(vel);
                            for i in 0..n {
                                dy[n + i] = -acc[i];
                            }
                            dy[2 * n] = y[2 * n + 1];
                            dy[2 * n + 1] = -ric / m * y[2 * n];
                        }
                        Err(_) => dy.iter_mut().for_each(|d| *d = f64::NAN),
                    }
                },
                0.0,
                &y0,
                s_max,
                &opts,
                |_, y| space.check(&y[..n]).is_err(),
            );
            (sol, 2 * n)
        }
    };
    match sol.termination {
        Termination::Reached | Termination::Stopped { .. } => {}
        _ => return Err(Error::ChartExit { param: sol.t_end() }),
    }
    let zeros = sol
        .sign_changes(|_, y| y[jidx], 1e-13)
        .into_iter()
        .filter(|s| *s > VERTEX_SKIP)
        .map(|s| ConjugateZero { s, multiplicity: n - 2 })
        .collect();
    let y = sol.y_end();
    Ok(ConjugateReport {
        zeros,
        route,
        s_max,
        s_end: sol.t_end(),
        rhs_evals: sol.rhs_evals,
        steps: sol.ts.len() - 1,
        final_state: (y[jidx], y[jidx + 1]),
    })
}

#[derive(Clone, Debug)]
pub struct FullZero {
    pub s: f64,
    pub kernel_rank: usize,
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct FullJacobiReport {
    pub params: Vec<f64>,
    /// Jacobi operator on the parallel screen frame at each sample.
    pub operators: Vec<DMatrix<f64>>,
    /// Spectral norm of `K − (tr K/(n−2)) I` at each sample.
    pub proportionality: Vec<f64>,
    pub max_proportionality: f64,
    pub zeros: Vec<FullZero>,
    /// Worst deviation of the transported frame from orthonormality.
    pub frame_residual: f64,
    pub rhs_evals: usize,
}

/// Parallel screen frame at `(p, v)`: g-orthonormal fibre vectors orthogonal to `v`'s fibre part.
pub fn initial_screen_frame(space: &GrwSpace, p: &[f64], v: &[f64]) -> Result<Vec<Vec<f64>>> {
    let x = &p[1..];
    let gf = space.fibre.metric(x)?;
    let w = &v[1..];
    let wn = metric::inner(&gf, w, w).sqrt();
    if wn == 0.0 {
        return Err(Error::Degenerate("velocity has no fibre part".into()));
    }
    let what: Vec<f64> = w.iter().map(|c| c / wn).collect();
    let m = x.len();
    let coords: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e
        })
        .collect();
    let frame = gram_schmidt(&gf, &coords, &[what])?;
    if frame.len() != m - 1 {
        return Err(Error::Degenerate("screen frame has wrong rank".into()));
    }
    let f = space.warping.f(p[0])?;
    Ok(frame
        .into_iter()
        .map(|e| {
            let mut out = vec![0.0];
            out.extend(e.iter().map(|c| c / f));
            out
        })
        .collect())
}

fn jacobi_operator(r: &metric::Riemann, frame: &[&[f64]], v: &[f64]) -> DMatrix<f64> {
    let m = frame.len();
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let val = r.eval(frame[i], v, frame[j], v);
            k[(i, j)] = val;
            k[(j, i)] = val;
        }
    }
    k
}

fn proportionality_residual(k: &DMatrix<f64>) -> f64 {
    let m = k.nrows();
    let tr = k.trace() / m as f64;
    let d = k - DMatrix::identity(m, m) * tr;
    SymmetricEigen::new(d).eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max)
}

struct Layout {
    n: usize,
    m: usize,
}

impl Layout {
    fn frame(&self, i: usize) -> usize {
        2 * self.n + i * self.n
    }
    fn a(&self) -> usize {
        2 * self.n + self.m * self.n
    }
    fn ap(&self) -> usize {
        self.a() + self.m * self.m
    }
    fn len(&self) -> usize {
        self.ap() + self.m * self.m
    }
    fn matrix(&self, y: &[f64], off: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.m, self.m, &y[off..off + self.m * self.m])
    }
}

/// The `(n−2)`-dimensional screen Jacobi system `A″ = −K A`, `A(0) = 0`, `A′(0) = I`, in a
/// parallel frame along the geodesic `(p0, v0)`, sampled at `params` and scanned for zeros of
/// `A` on `(0, s_max]` with `scan` probes.
pub fn full_jacobi_system(
    space: &GrwSpace,
    p0: &[f64],
    v0: &[f64],
    params: &[f64],
    s_max: f64,
    scan: usize,
) -> Result<FullJacobiReport> {
    let n = space.n();
    if n < 3 {
        return Err(Error::Config("Jacobi system needs n ≥ 3".into()));
    }
    let m = n - 2;
    let lay = Layout { n, m };
    let frame0 = initial_screen_frame(space, p0, v0)?;
    let mut y0 = vec![0.0; lay.len()];
    y0[..n].copy_from_slice(p0);
    y0[n..2 * n].copy_from_slice(v0);
    for (i, e) in frame0.iter().enumerate() {
        y0[lay.frame(i)..lay.frame(i) + n].copy_from_slice(e);
    }
    for i in 0..m {
        y0[lay.ap() + i * m + i] = 1.0;
    }
    let s_end = params.iter().copied().fold(s_max, f64::max);
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-12, ..OdeOptions::default() };
    let sol = ode::integrate(
        |_, y, dy| {
            let (q, vel) = (&y[..n], &y[n..2 * n]);
            let out = space.christoffel(q).and_then(|gam| Ok((gam, space.riemann(q)?)));
            let Ok((gam, r)) = out else {
                dy.iter_mut().for_each(|d| *d = f64::NAN);
                return;
            };
            dy[..n].copy_from_slice(vel);
            let acc = gam.contract(vel, vel);
            for i in 0..n {
                dy[n + i] = -acc[i];
            }
            let frame: Vec<&[f64]> = (0..m).map(|i| &y[lay.frame(i)..lay.frame(i) + n]).collect();
            for (i, e) in frame.iter().enumerate() {
                let de = gam.contract(vel, e);
                for c in 0..n {
                    dy[lay.frame(i) + c] = -de[c];
                }
            }
            let k = jacobi_operator(&r, &frame, vel);
            let a = lay.matrix(y, lay.a());
            let ka = -(k * a);
            dy[lay.a()..lay.ap()].copy_from_slice(&y[lay.ap()..lay.ap() + m * m]);
            for i in 0..m {
                for j in 0..m {
                    dy[lay.ap() + i * m + j] = ka[(i, j)];
                }
            }
        },
        0.0,
        &y0,
        s_end,
        &opts,
        |_, y| space.check(&y[..n]).is_err(),
    );
    if sol.termination != Termination::Reached {
        return Err(Error::ChartExit { param: sol.t_end() });
    }
    let state = |s: f64| sol.sample(s).ok_or(Error::ChartExit { param: s });
    let mut operators = Vec::with_capacity(params.len());
    let mut proportionality = Vec::with_capacity(params.len());
    let mut frame_residual: f64 = 0.0;
    for &s in params {
        let y = state(s)?;
        let (q, vel) = (&y[..n], &y[n..2 * n]);
        let frame: Vec<&[f64]> = (0..m).map(|i| &y[lay.frame(i)..lay.frame(i) + n]).collect();
        let g = space.metric(q)?;
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { 1.0 } else { 0.0 };
                frame_residual = frame_residual.max((metric::inner(&g, frame[i], frame[j]) - want).abs());
            }
            frame_residual = frame_residual.max(metric::inner(&g, frame[i], vel).abs());
        }
        let k = jacobi_operator(&space.riemann(q)?, &frame, vel);
        proportionality.push(proportionality_residual(&k));
        operators.push(k);
    }
    let max_proportionality = proportionality.iter().copied().fold(0.0, f64::max);
    let sigma = |s: f64| -> Result<Vec<f64>> {
        let y = state(s)?;
        let mut sv: Vec<f64> = lay.matrix(&y, lay.a()).singular_values().iter().copied().collect();
        sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(sv)
    };
    let zeros = scan_zeros(&sigma, s_max, scan.max(16))?;
    Ok(FullJacobiReport {
        params: params.to_vec(),
        operators,
        proportionality,
        max_proportionality,
        zeros,
        frame_residual,
        rhs_evals: sol.rhs_evals,
    })
}

fn scan_zeros(sigma: &dyn Fn(f64) -> Result<Vec<f64>>, s_max: f64, scan: usize) -> Result<Vec<FullZero>> {
    let h = s_max / scan as f64;
    let probes: Vec<f64> = (1..=scan).map(|i| i as f64 * h).collect();
    let mins: Vec<f64> = probes.iter().map(|&s| Ok(sigma(s)?[0])).collect::<Result<_>>()?;
    let mut out: Vec<FullZero> = Vec::new();
    for i in 0..probes.len() {
        let left = if i == 0 { f64::INFINITY } else { mins[i - 1] };
        let right = if i + 1 == probes.len() { f64::INFINITY } else { mins[i + 1] };
        if !(mins[i] <= left && mins[i] <= right) {
            continue;
        }
        let lo = (probes[i] - h).max(VERTEX_SKIP);
        let hi = (probes[i] + h).min(s_max);
        let s = golden_min(|s| sigma(s).map(|v| v[0]).unwrap_or(f64::INFINITY), lo, hi, 1e-12);
        let sv = sigma(s)?;
        if sv[0] >= KERNEL_TOL {
            continue;
        }
        if out.last().is_some_and(|z| (z.s - s).abs() < 1e-8) {
            continue;
        }
        let kernel_rank = sv.iter().filter(|v| **v < KERNEL_TOL).count();
        out.push(FullZero { s, kernel_rank, singular_values: sv });
    }
    Ok(out)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Clone, Debug)]
pub struct ConsistencySample {
    pub s: f64,
    /// `c² (ξ(ρ) − ρ²)` with `γ′ = c ξ`.
    pub rho_route: f64,
    /// `Ric(γ′,γ′)/(n−2)`.
    pub ricci_route: f64,
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub samples: Vec<ConsistencySample>,
    pub max_residual: f64,
}

/// Compares the two curvature routes along a generator `rec` lying on the graph `l`.
/// Samples at `s = 0` (the vertex) are skipped.
pub fn umbilic_consistency(l: &GraphHypersurface, rec: &NullGeodesicRecord, on_tol: f64) -> Result<ConsistencyReport> {
    let m = (l.n() - 2) as f64;
    let route = preferred_route(&l.space);
    let mut samples = Vec::new();
    let mut worst: f64 = 0.0;
    for ((s, p), v) in rec.params.iter().zip(&rec.points).zip(&rec.velocities) {
        if *s <= VERTEX_SKIP {
            continue;
        }
        let x = &p[1..];
        let off = (l.h.value(x)? - p[0]).abs();
        if off > on_tol {
            return Err(Error::Hypothesis(format!("generator leaves the hypersurface at s = {s} (offset {off:e})")));
        }
        let xi = l.xi_field(x)?;
        let c = v[0] / xi[0];
        let rho_route = c * c * l.null_sectional_from_rho(x)?;
        let ricci_route = ricci_at(&l.space, p, v, route)? / m;
        worst = worst.max((rho_route - ricci_route).abs());
        samples.push(ConsistencySample { s: *s, rho_route, ricci_route });
    }
    Ok(ConsistencyReport { samples, max_residual: worst })
}
