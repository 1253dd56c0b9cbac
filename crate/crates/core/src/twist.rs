//! Twisted decompositions `J ×_μ S` of the fibre induced by umbilic null graphs, and back.

use crate::error::{Error, Result};
use crate::expr::CompiledExpr;
use crate::fibre::{FibreModel, LeafMap};
use crate::field::{Composed, CoordinateField, FieldRef, Outer, ScalarField};
use crate::grw::{GrwSpace, WarpingProfile};
use crate::metric::{self, ChartMetric};
use crate::nullhyp::{GraphHypersurface, DEFAULT_UMBILIC_TOL};
use crate::numeric::ode::{self, OdeOptions, Termination};
use crate::numeric::root;
use crate::par;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

/// Samples of one integral curve of `E = ∇^F h / |∇^F h|_F` started on the anchor leaf.
#[derive(Clone, Debug)]
pub struct FlowLineRecord {
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub dmu: Vec<f64>,
    /// `max |C(h(x(s)); t_0) − s|`.
    pub level_residual: f64,
    /// `max ||E|_F − 1|`.
    pub unit_residual: f64,
}

impl FlowLineRecord {
    /// Cubic Hermite interpolation of `μ` in `s`.
    pub fn mu_at(&self, s: f64) -> Option<f64> {
        let n = self.s.len();
        if n < 2 || s < self.s[0] || s > self.s[n - 1] {
            return None;
        }
        let i = match self.s.iter().position(|v| *v >= s) {
            Some(0) => 1,
            Some(i) => i,
            None => n - 1,
        };
        let (s0, s1) = (self.s[i - 1], self.s[i]);
        let h = s1 - s0;
        let u = (s - s0) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        Some(h00 * self.mu[i - 1] + h10 * h * self.dmu[i - 1] + h01 * self.mu[i] + h11 * h * self.dmu[i])
    }
}

/// Flow chart `(s, z) ↦ φ_s(ψ(z))` built from a null graph: `ψ` parametrises the level set
/// `{h = t_0}` by all fibre coordinates but the pivot, `φ` is the flow of `E`.
pub struct FlowChart {
    pub graph: GraphHypersurface,
    pub t0: f64,
    pub x0: Vec<f64>,
    pub pivot: usize,
    pub z0: Vec<f64>,
    pub e0: Vec<f64>,
}

fn drop_index(x: &[f64], i: usize) -> Vec<f64> {
    x.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| *v).collect()
}

impl FlowChart {
    pub fn new(graph: GraphHypersurface, x0: &[f64]) -> Result<Self> {
        let loc = graph.local(x0)?;
        let gn = loc.grad_norm();
        if gn <= 1e-12 {
            return Err(Error::Degenerate("∇h vanishes at the anchor".into()));
        }
        let pivot = loc
            .jet
            .grad
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc })
            .0;
        let e0 = loc.grad.iter().map(|c| c / gn).collect();
        Ok(FlowChart { t0: loc.t, z0: drop_index(x0, pivot), x0: x0.to_vec(), pivot, e0, graph })
    }

    fn m(&self) -> usize {
        self.x0.len()
    }

    fn fibre(&self) -> &FibreModel {
        &self.graph.space.fibre
    }

    fn warping(&self) -> &WarpingProfile {
        &self.graph.space.warping
    }

    /// Point of the anchor leaf `{h = t_0}` with leaf coordinates `z`.
    pub fn leaf_point(&self, z: &[f64]) -> Result<Vec<f64>> {
        let m = self.m();
        let mut x = Vec::with_capacity(m);
        let mut k = 0;
        for i in 0..m {
            if i == self.pivot {
                x.push(self.x0[i]);
            } else {
                x.push(z[k]);
                k += 1;
            }
        }
        let p = self.pivot;
        for _ in 0..60 {
            let j = self.graph.h.jet(&x)?;
            let r = j.value - self.t0;
            let d = j.grad[p];
            if d.abs() < 1e-14 {
                return Err(Error::Degenerate("level set is tangent to the pivot axis".into()));
            }
            let step = r / d;
            x[p] -= step;
            if step.abs() <= 1e-15 * (1.0 + x[p].abs()) || r == 0.0 {
                let v = self.graph.h.value(&x)?;
                if (v - self.t0).abs() <= 1e-12 * (1.0 + self.t0.abs()) {
                    return Ok(x);
                }
            }
        }
        let v = self.graph.h.value(&x)?;
        if (v - self.t0).abs() <= 1e-11 * (1.0 + self.t0.abs()) {
            Ok(x)
        } else {
            Err(Error::Shooting { residual: (v - self.t0).abs() })
        }
    }

    /// The anchor leaf as a fibre with the pulled-back metric on a box of half-width `radius`.
    pub fn leaf_fibre(self: &Arc<Self>, radius: f64) -> FibreModel {
        let me = self.clone();
        let map: LeafMap = Arc::new(move |z: &[f64]| me.leaf_point(z));
        let (flo, fhi) = self.fibre().bounds();
        let lo: Vec<f64> = drop_index(flo, self.pivot).iter().zip(&self.z0).map(|(l, z)| l.max(z - radius)).collect();
        let hi: Vec<f64> = drop_index(fhi, self.pivot).iter().zip(&self.z0).map(|(h, z)| h.min(z + radius)).collect();
        FibreModel::pullback(self.fibre().clone(), map, lo, hi, radius)
    }

    fn integrate(&self, x: &[f64], s_end: f64, dense: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
        let m = self.m();
        let n2 = self.graph.n() as f64 - 2.0;
        let failed = std::cell::RefCell::new(None::<Error>);
        let rhs = |_s: f64, y: &[f64], dy: &mut [f64]| {
            let out = (|| -> Result<()> {
                let loc = self.graph.local(&y[..m])?;
                let gn = loc.grad_norm();
                let h = self.graph.mean_curvature(&y[..m])?;
                for i in 0..m {
                    dy[i] = loc.grad[i] / gn;
                }
                dy[m] = h * loc.f * loc.f / n2;
                Ok(())
            })();
            if let Err(e) = out {
                dy.iter_mut().for_each(|v| *v = 0.0);
                failed.borrow_mut().get_or_insert(e);
            }
        };
        let fib = self.fibre();
        let w = self.warping();
        let stop = |_s: f64, y: &[f64]| {
            !fib.in_domain(&y[..m]) || !self.graph.h.value(&y[..m]).map(|t| w.contains(t)).unwrap_or(false)
        };
        let mut y0 = x.to_vec();
        y0.push(0.0);
        let sol = ode::integrate(rhs, 0.0, &y0, s_end, &OdeOptions::default(), stop);
        if let Some(e) = failed.into_inner() {
            return Err(e);
        }
        match sol.termination {
            Termination::Reached => {}
            Termination::Stopped { t } => return Err(Error::ChartExit { param: t }),
            _ => return Err(Error::ChartExit { param: sol.t_end() }),
        }
        dense
            .iter()
            .map(|s| sol.sample(*s).map(|y| (*s, y)).ok_or(Error::ChartExit { param: *s }))
            .collect()
    }

    /// `μ` and `μ_s` at a flow state, from the accumulated `∫ H f²/(n−2)`.
    fn mu_from_state(&self, y: &[f64]) -> Result<(f64, f64)> {
        let m = self.m();
        let x = &y[..m];
        let t = self.graph.h.value(x)?;
        let (f, df, _) = self.warping().jet(t)?;
        let f0 = self.warping().f(self.t0)?;
        let mu = f0 / f * y[m].exp();
        let h = self.graph.mean_curvature(x)?;
        let n2 = self.graph.n() as f64 - 2.0;
        Ok((mu, mu * (h * f * f / n2 - df)))
    }

    /// Flow line from the leaf point `z`, sampled at the given `s` (any signs, any order).
    pub fn flow(&self, z: &[f64], s_values: &[f64]) -> Result<FlowLineRecord> {
        let x = self.leaf_point(z)?;
        let mut s: Vec<f64> = s_values.to_vec();
        if !s.contains(&0.0) {
            s.push(0.0);
        }
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let neg: Vec<f64> = s.iter().copied().filter(|v| *v < 0.0).collect();
        let pos: Vec<f64> = s.iter().copied().filter(|v| *v >= 0.0).collect();
        let mut states = Vec::with_capacity(s.len());
        if let Some(lo) = neg.first() {
            states.extend(self.integrate(&x, *lo, &neg)?);
        }
        let hi = pos.last().copied().unwrap_or(0.0);
        states.extend(self.integrate(&x, hi, &pos)?);
        let m = self.m();
        let mut rec = FlowLineRecord {
            z: z.to_vec(),
            s: vec![],
            points: vec![],
            mu: vec![],
            dmu: vec![],
            level_residual: 0.0,
            unit_residual: 0.0,
        };
        for (sv, y) in states {
            let (mu, dmu) = self.mu_from_state(&y)?;
            let xp = y[..m].to_vec();
            let loc = self.graph.local(&xp)?;
            let gn = loc.grad_norm();
            let e: Vec<f64> = loc.grad.iter().map(|c| c / gn).collect();
            rec.unit_residual = rec.unit_residual.max((metric::inner(&loc.gf, &e, &e).sqrt() - 1.0).abs());
            let c = self.warping().c(self.t0, loc.t)?;
            rec.level_residual = rec.level_residual.max((c - sv).abs());
            rec.s.push(sv);
            rec.points.push(xp);
            rec.mu.push(mu);
            rec.dmu.push(dmu);
        }
        Ok(rec)
    }

    /// `φ_s(ψ(z))`.
    pub fn map(&self, s: f64, z: &[f64]) -> Result<Vec<f64>> {
        let rec = self.flow(z, &[s])?;
        let k = rec.s.iter().position(|v| *v == s).expect("sampled");
        Ok(rec.points[k].clone())
    }

    pub fn mu(&self, s: f64, z: &[f64]) -> Result<f64> {
        let rec = self.flow(z, &[s])?;
        let k = rec.s.iter().position(|v| *v == s).expect("sampled");
        Ok(rec.mu[k])
    }

    /// Fibre point reached from the anchor along the flow line through it, which is a unit-speed
    /// fibre geodesic; used to locate a cone vertex at a singular end of the base interval.
    pub fn limit_point(&self, s: f64, _inward: f64) -> Result<Vec<f64>> {
        let v: Vec<f64> = self.e0.iter().map(|c| c * s).collect();
        self.fibre().exp_map(&self.x0, &v)
    }

    /// `max |Φ*g_F − (ds² + μ² g_S)|` at the given `(s, z)`, with `Φ` differentiated numerically.
    pub fn metric_residual(self: &Arc<Self>, samples: &[(f64, Vec<f64>)], leaf: &FibreModel) -> Result<f64> {
        let m = self.m();
        let res = par::try_map(samples, |(s, z)| {
            let mut q = vec![*s];
            q.extend_from_slice(z);
            let cols = {
                let failed = std::cell::Cell::new(false);
                let j = crate::numeric::fd::jacobian(
                    |p| match self.map(p[0], &p[1..]) {
                        Ok(v) => v,
                        Err(_) => {
                            failed.set(true);
                            vec![f64::NAN; m]
                        }
                    },
                    &q,
                );
                if failed.get() {
                    return Err(Error::ChartExit { param: *s });
                }
                j
            };
            let jm = DMatrix::from_fn(m, m, |i, k| cols[i][k]);
            let x = self.map(*s, z)?;
            let pulled = jm.transpose() * self.fibre().metric(&x)? * jm;
            let mu = self.mu(*s, z)?;
            let gs = leaf.metric(z)?;
            let mut want = DMatrix::zeros(m, m);
            want[(0, 0)] = 1.0;
            want.view_mut((1, 1), (m - 1, m - 1)).copy_from(&(gs * (mu * mu)));
            Ok((pulled - want).amax())
        })?;
        Ok(res.into_iter().fold(0.0, f64::max))
    }
}

/// `μ` of a reconstructed decomposition: recorded flow lines first, fresh integration otherwise.
struct ReconstructedMu {
    chart: Arc<FlowChart>,
    records: Vec<FlowLineRecord>,
}

impl ScalarField for ReconstructedMu {
    fn dim(&self) -> usize {
        self.chart.m()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let z = &x[1..];
        for r in &self.records {
            if r.z.iter().zip(z).all(|(a, b)| a == b) {
                if let Some(v) = r.mu_at(x[0]) {
                    return Ok(v);
                }
            }
        }
        self.chart.mu(x[0], z)
    }
}

/// `(a, b) ×_μ S`, with `s = 0` on the anchor leaf.
#[derive(Clone)]
pub struct TwistedDecomposition {
    pub a: f64,
    pub b: f64,
    pub leaf: FibreModel,
    pub mu: FieldRef,
    pub anchor_z: Vec<f64>,
    pub records: Vec<FlowLineRecord>,
    pub chart: Option<Arc<FlowChart>>,
}

impl std::fmt::Debug for TwistedDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TwistedDecomposition(({}, {}), {:?}, {} records)", self.a, self.b, self.leaf, self.records.len())
    }
}

impl TwistedDecomposition {
    pub fn analytic(a: f64, b: f64, leaf: FibreModel, mu: FieldRef, anchor_z: Vec<f64>) -> Result<Self> {
        if !(a < 0.0 && 0.0 < b) {
            return Err(Error::Config(format!("base interval ({a}, {b}) must contain 0")));
        }
        Ok(TwistedDecomposition { a, b, leaf, mu, anchor_z, records: vec![], chart: None })
    }

    /// `J × S` with `ds² + μ² g_S` as a fibre.
    pub fn fibre(&self, normal_radius: f64) -> Result<FibreModel> {
        FibreModel::twisted(self.a, self.b, self.leaf.clone(), self.mu.clone(), normal_radius)
    }

    pub fn mu_at(&self, s: f64, z: &[f64]) -> Result<f64> {
        let mut q = vec![s];
        q.extend_from_slice(z);
        self.mu.value(&q)
    }

    /// `max |μ(0, z) − 1|` over recorded flow lines (or the anchor when none).
    pub fn normalization_residual(&self) -> Result<f64> {
        if self.records.is_empty() {
            return Ok((self.mu_at(0.0, &self.anchor_z)? - 1.0).abs());
        }
        let mut r: f64 = 0.0;
        for rec in &self.records {
            let k = rec.s.iter().position(|v| *v == 0.0).expect("s = 0 is always sampled");
            r = r.max((rec.mu[k] - 1.0).abs());
        }
        Ok(r)
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructOptions {
    pub s_lo: f64,
    pub s_hi: f64,
    pub s_samples: usize,
    /// Leaf samples are the anchor and `±leaf_step` along each leaf axis.
    pub leaf_step: f64,
    pub leaf_radius: f64,
    pub umbilic_tol: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            s_lo: -0.2,
            s_hi: 0.2,
            s_samples: 17,
            leaf_step: 0.05,
            leaf_radius: 0.2,
            umbilic_tol: DEFAULT_UMBILIC_TOL,
        }
    }
}

/// Decomposition of the fibre around `x_0` induced by the umbilic null graph `L`:
/// leaves are level sets of `h`, `s` is the flow parameter of `E` and
/// `μ(s,z) = f(t_0)/f(t) · exp ∫_0^s H f²/(n−2)`.
pub fn reconstruct_decomposition(
    l: &GraphHypersurface,
    x0: &[f64],
    opts: &ReconstructOptions,
) -> Result<TwistedDecomposition> {
    if !(opts.s_lo < 0.0 && opts.s_hi > 0.0 && opts.s_samples >= 2) {
        return Err(Error::Config("s range must straddle 0".into()));
    }
    let chart = Arc::new(FlowChart::new(l.clone(), x0)?);
    let mut zs = vec![chart.z0.clone()];
    for i in 0..chart.z0.len() {
        for sign in [-1.0, 1.0] {
            let mut z = chart.z0.clone();
            z[i] += sign * opts.leaf_step;
            zs.push(z);
        }
    }
    let starts: Vec<Vec<f64>> = par::try_map(&zs, |z| chart.leaf_point(z))?;
    let report = l.umbilicity_test(&starts, opts.umbilic_tol, 0)?;
    if !report.umbilic {
        return Err(Error::NotUmbilic { residual: report.max_residual });
    }
    let s_values: Vec<f64> = (0..opts.s_samples)
        .map(|k| opts.s_lo + (opts.s_hi - opts.s_lo) * k as f64 / (opts.s_samples - 1) as f64)
        .collect();
    let records = par::try_map(&zs, |z| chart.flow(z, &s_values))?;
    let leaf = chart.leaf_fibre(opts.leaf_radius);
    let mu: FieldRef = Arc::new(ReconstructedMu { chart: chart.clone(), records: records.clone() });
    Ok(TwistedDecomposition {
        a: opts.s_lo,
        b: opts.s_hi,
        leaf,
        mu,
        anchor_z: chart.z0.clone(),
        records,
        chart: Some(chart),
    })
}

/// Warped decomposition `μ(s) = cos(s+θ)/cos θ` of an umbilic graph with round unit-sphere
/// fibre, with `θ` fitted from `μ_s(0) = −tan θ` at the anchor.
pub fn fit_sphere_decomposition(l: &GraphHypersurface, x0: &[f64]) -> Result<TwistedDecomposition> {
    let opts = ReconstructOptions { s_lo: -0.02, s_hi: 0.02, s_samples: 3, leaf_step: 0.0, ..Default::default() };
    let chart = Arc::new(FlowChart::new(l.clone(), x0)?);
    let rec = chart.flow(&chart.z0, &[opts.s_lo, 0.0, opts.s_hi])?;
    let k = rec.s.iter().position(|v| *v == 0.0).expect("sampled");
    let theta = -rec.dmu[k].atan();
    let m = l.space.fibre.dim();
    let leaf = chart.leaf_fibre(opts.leaf_radius);
    let mu = crate::fixtures::twisted_field("cos(s + th)/cos(th)", m - 1, &[("th", theta)])?;
    Ok(TwistedDecomposition {
        a: -FRAC_PI_2 - theta,
        b: FRAC_PI_2 - theta,
        leaf,
        mu,
        anchor_z: chart.z0.clone(),
        records: vec![rec],
        chart: Some(chart),
    })
}

fn twisted_of(space: &GrwSpace) -> Result<&crate::fibre::TwistedData> {
    match space.fibre.kind() {
        crate::fibre::FibreKind::Twisted(t) => Ok(t),
        _ => Err(Error::Hypothesis("fibre is not a twisted product".into())),
    }
}

fn level_profile(space: Arc<GrwSpace>, t0: f64, sign: f64) -> Outer {
    Arc::new(move |s: f64| {
        let w = &space.warping;
        let t = w.c_inv(t0, sign * s)?;
        let (f, df, _) = w.jet(t)?;
        Ok((t, sign * f, f * df))
    })
}

/// `L = {s = C(t; t_0)}` as the graph `h(s, z) = C^{-1}(s; t_0)` over a twisted fibre.
pub fn construct_hypersurface(space: Arc<GrwSpace>, t0: f64) -> Result<GraphHypersurface> {
    twisted_of(&space)?;
    space.warping.check(t0)?;
    let dim = space.fibre.dim();
    let h = Arc::new(CoordinateField { dim, index: 0, profile: level_profile(space.clone(), t0, 1.0) });
    GraphHypersurface::new(space, h)
}

/// `{s = −C(t; t_0)}`, the dual of `construct_hypersurface` through `s = 0`.
pub fn construct_dual(space: Arc<GrwSpace>, t0: f64) -> Result<GraphHypersurface> {
    twisted_of(&space)?;
    space.warping.check(t0)?;
    let dim = space.fibre.dim();
    let h = Arc::new(CoordinateField { dim, index: 0, profile: level_profile(space.clone(), t0, -1.0) });
    GraphHypersurface::new(space, h)
}

/// `(n−2)/f² (f′ ± μ_s/μ)` at `(t, s, z)` of a twisted-fibre GRW space; `dual` selects `−`.
pub fn twisted_mean_curvature_formula(space: &GrwSpace, t: f64, x: &[f64], dual: bool) -> Result<f64> {
    let tw = twisted_of(space)?;
    let jet = tw.mu.jet(x)?;
    let ratio = jet.grad[0] / jet.value;
    let (f, df, _) = space.warping.jet(t)?;
    let sign = if dual { -1.0 } else { 1.0 };
    Ok((space.n() as f64 - 2.0) / (f * f) * (df + sign * ratio))
}

/// `t ↦ C^{-1}(−C(t; t_0); t_0)` with its first two derivatives.
fn reflection(space: Arc<GrwSpace>, t0: f64) -> Outer {
    Arc::new(move |t: f64| {
        let w = &space.warping;
        let c = w.c(t0, t)?;
        let u = w.c_inv(t0, -c)?;
        let (ft, dft, _) = w.jet(t)?;
        let (fu, dfu, _) = w.jet(u)?;
        let d1 = -fu / ft;
        let d2 = dfu * fu / (ft * ft) + fu * dft / (ft * ft);
        Ok((u, d1, d2))
    })
}

/// Dual of `L` through the anchor `(h(x_0), x_0)`: in the decomposition induced by `L`,
/// `s(x) = C(h(x); t_0)` and the dual is `{s = −C(t; t_0)}`.
pub fn dual_hypersurface(l: &GraphHypersurface, x0: &[f64]) -> Result<GraphHypersurface> {
    let t0 = l.h.value(x0)?;
    let h: FieldRef = Arc::new(Composed::new(l.h.clone(), reflection(l.space.clone(), t0)));
    GraphHypersurface::new(l.space.clone(), h)
}

/// `H̃` at `x` from the decomposition induced by `L` through `x_0`:
/// `(n−2)/f(t̃)² (f′(t̃) − μ_s/μ)` with `μ_s/μ = H f(t)²/(n−2) − f′(t)` read off `L` at `t = h(x)`.
pub fn dual_mean_curvature_formula(l: &GraphHypersurface, x0: &[f64], x: &[f64]) -> Result<f64> {
    let n2 = l.n() as f64 - 2.0;
    let t0 = l.h.value(x0)?;
    let loc = l.local(x)?;
    let hm = l.mean_curvature(x)?;
    let ratio = hm * loc.f * loc.f / n2 - loc.df;
    let w = &l.space.warping;
    let tt = w.c_inv(t0, -w.c(t0, loc.t)?)?;
    let (f, df, _) = w.jet(tt)?;
    Ok(n2 / (f * f) * (df - ratio))
}

/// `t_c` with `∫_0^{t_c} 1/cosh = π/4`.
pub fn desitter_tc() -> f64 {
    root::brent(|t| 2.0 * (t / 2.0).tanh().atan() - FRAC_PI_4, 0.0, 3.0, 1e-16, 200).expect("bracketed")
}

#[derive(Clone, Debug, PartialEq)]
pub enum DesitterDual {
    /// Past cone with vertex `(t_s, x_*)`.
    PastCone { ts: f64 },
    /// Future cone with vertex `(t_l, x^*)` at the antipode of `x_*`.
    FutureConeAntipode { tl: f64 },
    TotallyGeodesic,
    /// `|t_0 − t_c|` too small to separate the cases numerically.
    Boundary,
}

pub const DESITTER_EXACT_TOL: f64 = 1e-12;
pub const DESITTER_CLASS_TOL: f64 = 1e-8;

/// Dual through a point `(t_0, x_0)` of `C^+_{(0, x_*)}` in `ℝ ×_{cosh} S^{n−1}`.
pub fn classify_desitter_dual(t0: f64) -> Result<DesitterDual> {
    if t0 <= 0.0 {
        return Err(Error::Config("the anchor must lie on the future cone (t_0 > 0)".into()));
    }
    let w = WarpingProfile::cosh();
    let tc = desitter_tc();
    let gap = t0 - tc;
    if gap.abs() <= DESITTER_EXACT_TOL {
        return Ok(DesitterDual::TotallyGeodesic);
    }
    if gap.abs() <= DESITTER_CLASS_TOL {
        return Ok(DesitterDual::Boundary);
    }
    let delta = w.c(0.0, t0)?;
    if gap < 0.0 {
        Ok(DesitterDual::PastCone { ts: w.c_inv(t0, delta)? })
    } else {
        Ok(DesitterDual::FutureConeAntipode { tl: w.c_inv(t0, -(PI - delta))? })
    }
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub point: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// Exact spread: eigenvalue range of `w ↦ K(v, w)` on `v^⊥`.
    pub spreads: Vec<f64>,
    /// Range over the sampled planes only.
    pub sampled_spreads: Vec<f64>,
    pub min_spread: f64,
}

impl ObstructionReport {
    /// The scan only certifies absence: a small spread does not prove a decomposition exists.
    pub fn certifies_no_decomposition(&self, threshold: f64) -> bool {
        self.min_spread > threshold
    }
}

/// Exact and sampled spreads of sectional curvatures of planes containing `v` (any length).
pub fn spread_along(fibre: &FibreModel, x: &[f64], v: &[f64], planes: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let g = fibre.metric(x)?;
    let r = fibre.riemann(x)?;
    let vn = metric::inner(&g, v, v).sqrt();
    if vn <= 0.0 {
        return Err(Error::Degenerate("zero direction".into()));
    }
    let vu: Vec<f64> = v.iter().map(|c| c / vn).collect();
    let m = x.len();
    let coords: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut perp = crate::fibre::gram_schmidt(&g, &coords, &[vu.clone()])?;
    perp.truncate(m - 1);
    let k = perp.len();
    let q = DMatrix::from_fn(k, k, |a, b| r.eval(&perp[a], &vu, &perp[b], &vu));
    let q = (&q + q.transpose()) * 0.5;
    let eig = SymmetricEigen::new(q.clone()).eigenvalues;
    let exact = eig.max() - eig.min();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..planes {
        let c: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let cn = c.iter().map(|a| a * a).sum::<f64>().sqrt();
        let w = nalgebra::DVector::from_iterator(k, c.iter().map(|a| a / cn));
        let val = (w.transpose() * &q * &w)[(0, 0)];
        lo = lo.min(val);
        hi = hi.max(val);
    }
    let sampled = if planes > 0 { hi - lo } else { 0.0 };
    Ok((exact, sampled))
}

/// Curvature obstruction scan at `x` over `directions` seeded unit directions.
pub fn obstruction_scan(fibre: &FibreModel, x: &[f64], directions: usize, planes: usize, seed: u64) -> Result<ObstructionReport> {
    let m = x.len();
    if m < 3 {
        return Err(Error::Hypothesis("the scan is vacuous below dimension 3".into()));
    }
    let frame = fibre.orthonormal_frame(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<(Vec<f64>, u64)> = (0..directions)
        .map(|i| {
            let c: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut v = vec![0.0; m];
            for (e, ci) in frame.iter().zip(&c) {
                for (vk, ek) in v.iter_mut().zip(e) {
                    *vk += ci * ek;
                }
            }
            (v, seed.wrapping_add(1 + i as u64))
        })
        .collect();
    let res = par::try_map(&dirs, |(v, s)| {
        let mut r = ChaCha8Rng::seed_from_u64(*s);
        spread_along(fibre, x, v, planes, &mut r)
    })?;
    let min_spread = res.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let g = fibre.metric(x)?;
    Ok(ObstructionReport {
        point: x.to_vec(),
        directions: dirs
            .into_iter()
            .map(|(v, _)| {
                let n = metric::inner(&g, &v, &v).sqrt();
                v.iter().map(|c| c / n).collect()
            })
            .collect(),
        spreads: res.iter().map(|r| r.0).collect(),
        sampled_spreads: res.iter().map(|r| r.1).collect(),
        min_spread,
    })
}

/// Whether `μ″μ − μ′² + 1` vanishes (within `tol`) at `samples` points of `[lo, hi]`,
/// i.e. whether `J ×_μ S(1)` has constant curvature there.
pub fn sphere_warped_uniqueness_probe(mu: &CompiledExpr, lo: f64, hi: f64, samples: usize, tol: f64) -> Result<bool> {
    Ok(sphere_warped_residual(mu, lo, hi, samples)? <= tol)
}

pub fn sphere_warped_residual(mu: &CompiledExpr, lo: f64, hi: f64, samples: usize) -> Result<f64> {
    if mu.vars().len() != 1 {
        return Err(Error::Config("μ must be a function of one variable".into()));
    }
    let d1 = mu.derivative(0);
    let d2 = d1.derivative(0);
    let ev = |e: &CompiledExpr, s: f64| e.eval(&[s]).map_err(|err| Error::Domain(err.to_string()));
    sphere_warped_residual_with(|s| Ok((ev(mu, s)?, ev(&d1, s)?, ev(&d2, s)?)), lo, hi, samples)
}

/// `max |μ″μ − μ′² + 1|` at `samples` midpoints of `[lo, hi]`, from a jet `s ↦ (μ, μ′, μ″)`.
pub fn sphere_warped_residual_with<F>(jet: F, lo: f64, hi: f64, samples: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64, f64)>,
{
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let s = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
        let (m0, m1, m2) = jet(s)?;
        worst = worst.max((m2 * m0 - m1 * m1 + 1.0).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
