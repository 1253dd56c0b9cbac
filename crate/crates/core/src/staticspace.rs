//! Standard static spaces `g* = g_F − φ² dt²`, written in the chart `(t, x)`.
//!
//! Null hypersurfaces are handled through the conformal metric `g = g*/φ² = g_F/φ² − dt²`,
//! a GRW space with `f ≡ 1`. The radial family `(1/h) dr² + r² g₀ − h dt²` becomes, after
//! `r = ϕ(s)` with `ϕ′ = h(ϕ)`, the warped fibre `ds² + μ² g₀` with `μ = ϕ/√(h∘ϕ)` and
//! potential `√(h∘ϕ)`.

use crate::error::{Error, Result};
use crate::expr::CompiledExpr;
use crate::fibre::{gram_schmidt, FibreModel};
use crate::field::{FieldRef, FnField, Jet, ScalarField};
use crate::grw::{GrwSpace, WarpingProfile};
use crate::metric::{self, ChartMetric};
use crate::numeric::{fd, ode};
use crate::nullhyp::GraphHypersurface;
use crate::twist::TwistedDecomposition;
use nalgebra::{DMatrix, DVector};
use num_dual::{Dual3_64, DualNum};
use std::sync::Arc;

/// Profile integration stops once `h` drops to this value.
pub const HORIZON_TOL: f64 = 1e-8;

#[derive(Clone)]
pub struct StaticModel {
    /// `(F, g_F)`.
    pub fibre: FibreModel,
    /// `(F, g_F/φ²)`.
    pub conformal: FibreModel,
    pub potential: FieldRef,
}

impl std::fmt::Debug for StaticModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "StaticModel({:?})", self.fibre)
    }
}

fn reciprocal(field: FieldRef) -> FieldRef {
    let dim = field.dim();
    Arc::new(FnField::new(dim, move |x: &[f64]| Ok(1.0 / field.value(x)?)))
}

impl StaticModel {
    pub fn new(fibre: FibreModel, potential: FieldRef) -> Result<Self> {
        let conformal = FibreModel::conformal(fibre.clone(), reciprocal(potential.clone()))?;
        Ok(StaticModel { fibre, conformal, potential })
    }

    /// Model whose conformal fibre `g_F/φ²` is given.
    pub fn from_conformal(conformal: FibreModel, potential: FieldRef) -> Result<Self> {
        let fibre = FibreModel::conformal(conformal.clone(), potential.clone())?;
        Ok(StaticModel { fibre, conformal, potential })
    }

    pub fn n(&self) -> usize {
        1 + self.fibre.dim()
    }

    pub fn phi(&self, x: &[f64]) -> Result<f64> {
        let v = self.potential.value(x)?;
        if !(v > 0.0) {
            return Err(Error::Domain(format!("potential {v} is not positive")));
        }
        Ok(v)
    }

    /// Smallest potential over the grid; errors on a non-positive sample.
    pub fn check_potential(&self, grid: &[Vec<f64>]) -> Result<f64> {
        grid.iter().map(|x| self.phi(x)).try_fold(f64::INFINITY, |m, v| Ok(m.min(v?)))
    }

    /// `g_F/φ² − dt²` as a GRW space in the same chart.
    pub fn conformal_space(&self) -> GrwSpace {
        GrwSpace::new(WarpingProfile::constant(1.0), self.conformal.clone())
    }
}

impl ChartMetric for StaticModel {
    fn dim(&self) -> usize {
        self.n()
    }

    fn metric(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.n();
        let x = &p[1..];
        let phi = self.phi(x)?;
        let mut g = DMatrix::zeros(n, n);
        g[(0, 0)] = -phi * phi;
        g.view_mut((1, 1), (n - 1, n - 1)).copy_from(&self.fibre.metric(x)?);
        Ok(g)
    }
}

/// A graph `t = h(x)` in a static space, with `ξ = (−1, −φ² ∇^F h)`, the same field that
/// `nullhyp` uses for the conformal GRW space.
#[derive(Clone)]
pub struct StaticGraph {
    pub model: Arc<StaticModel>,
    pub h: FieldRef,
}

impl StaticGraph {
    pub fn new(model: Arc<StaticModel>, h: FieldRef) -> Result<Self> {
        if h.dim() != model.fibre.dim() {
            return Err(Error::Config(format!(
                "graph function has {} variables, fibre has dimension {}",
                h.dim(),
                model.fibre.dim()
            )));
        }
        Ok(StaticGraph { model, h })
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut p = vec![self.h.value(x)?];
        p.extend_from_slice(x);
        Ok(p)
    }

    fn fibre_gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        let g = self.model.fibre.metric(x)?;
        let dh = self.h.jet(x)?.grad;
        metric::gradient_of(&g, &dh)
    }

    pub fn xi(&self, x: &[f64]) -> Result<Vec<f64>> {
        let phi = self.model.phi(x)?;
        let grad = self.fibre_gradient(x)?;
        let mut v = vec![-1.0];
        v.extend(grad.iter().map(|c| -phi * phi * c));
        Ok(v)
    }

    /// `|φ² |∇^F h|² − 1|`, zero exactly when the graph is null.
    pub fn null_residual(&self, x: &[f64]) -> Result<f64> {
        let phi = self.model.phi(x)?;
        let g = self.model.fibre.metric(x)?;
        let dh = self.h.jet(x)?.grad;
        let grad = metric::gradient_of(&g, &dh)?;
        Ok((phi * phi * dh.dot(&grad) - 1.0).abs())
    }

    /// g*-orthonormal screen vectors `(0, v)` with `dh(v) = 0`, as fibre vectors `v`.
    pub fn screen(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let g = self.model.fibre.metric(x)?;
        let grad = self.fibre_gradient(x)?;
        let gn = metric::inner(&g, grad.as_slice(), grad.as_slice()).sqrt();
        if gn == 0.0 {
            return Err(Error::Degenerate("graph function has a critical point".into()));
        }
        let unit: Vec<f64> = grad.iter().map(|c| c / gn).collect();
        let m = x.len();
        let coords: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                e
            })
            .collect();
        gram_schmidt(&g, &coords, &[unit])
    }

    /// `ξ(ln φ)`.
    pub fn xi_ln_phi(&self, x: &[f64]) -> Result<f64> {
        let jet = self.model.potential.jet(x)?;
        let xi = self.xi(x)?;
        Ok(xi[1..].iter().zip(jet.grad.iter()).map(|(a, b)| a * b).sum::<f64>() / jet.value)
    }

    /// `B*(X, Y) = −g*(∇*_X ξ, Y)` on lifted fibre vectors, from the finite-difference
    /// connection of `g*`.
    pub fn b_star(&self, x: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
        let n = self.n();
        let p = self.point(x)?;
        let xi = self.xi(x)?;
        let step = fd::STEP1;
        let mut dxi = vec![0.0; n];
        for (i, ai) in a.iter().enumerate() {
            if *ai == 0.0 {
                continue;
            }
            let hstep = fd::step_for(x[i], step);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += hstep;
            xm[i] -= hstep;
            let (fp, fm) = (self.xi(&xp)?, self.xi(&xm)?);
            for k in 0..n {
                dxi[k] += ai * (fp[k] - fm[k]) / (2.0 * hstep);
            }
        }
        let gam = metric::christoffel_fd(self.model.as_ref(), &p)?;
        let mut lift_a = vec![0.0];
        lift_a.extend_from_slice(a);
        let conn = gam.contract(&lift_a, &xi);
        let nabla: Vec<f64> = (0..n).map(|k| dxi[k] + conn[k]).collect();
        let mut lift_b = vec![0.0];
        lift_b.extend_from_slice(b);
        let g = self.model.metric(&p)?;
        Ok(-metric::inner(&g, &nabla, &lift_b))
    }

    /// Screen frame and the matrix of `B*` in it.
    pub fn b_star_matrix(&self, x: &[f64]) -> Result<(Vec<Vec<f64>>, DMatrix<f64>)> {
        let scr = self.screen(x)?;
        let m = scr.len();
        let mut b = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                b[(i, j)] = self.b_star(x, &scr[i], &scr[j])?;
            }
        }
        Ok((scr, b))
    }

    /// Trace of `B*` over the screen.
    pub fn mean_curvature_star(&self, x: &[f64]) -> Result<f64> {
        Ok(self.b_star_matrix(x)?.1.trace())
    }

    /// The same set as a null graph of the conformal GRW space.
    pub fn conformal_graph(&self) -> Result<GraphHypersurface> {
        GraphHypersurface::new(Arc::new(self.model.conformal_space()), self.h.clone())
    }
}

/// `B = (B* + ξ(ln φ) g*)/φ²` for matrices on a common set of screen vectors.
pub fn conformal_b_transform(b_star: &DMatrix<f64>, gram_star: &DMatrix<f64>, xi_ln_phi: f64, phi: f64) -> Result<DMatrix<f64>> {
    if !(phi > 0.0) {
        return Err(Error::Domain(format!("potential {phi} is not positive")));
    }
    Ok((b_star + gram_star * xi_ln_phi) / (phi * phi))
}

/// `H = H* + (n−2) ξ(ln φ)`.
pub fn conformal_h_transform(h_star: f64, xi_ln_phi: f64, n: usize) -> f64 {
    h_star + (n - 2) as f64 * xi_ln_phi
}

/// Maximum over the grid of `|B − transform(B*)|`, with `B` from the conformal GRW space.
pub fn conformal_consistency(graph: &StaticGraph, grid: &[Vec<f64>]) -> Result<f64> {
    let conf = graph.conformal_graph()?;
    let mut worst: f64 = 0.0;
    for x in grid {
        let (scr, bstar) = graph.b_star_matrix(x)?;
        let m = scr.len();
        let g = graph.model.fibre.metric(x)?;
        let gram = DMatrix::from_fn(m, m, |i, j| metric::inner(&g, &scr[i], &scr[j]));
        let phi = graph.model.phi(x)?;
        let want = conformal_b_transform(&bstar, &gram, graph.xi_ln_phi(x)?, phi)?;
        for i in 0..m {
            for j in 0..m {
                let direct = conf.second_fundamental_form(x, &scr[i], &scr[j])?;
                worst = worst.max((direct - want[(i, j)]).abs());
            }
        }
    }
    Ok(worst)
}

/// A hypersurface `{t = ±s + t0}` built from a twisted decomposition of `g_F/φ²`.
#[derive(Clone)]
pub struct StaticUmbilic {
    pub graph: StaticGraph,
    pub t0: f64,
    pub dual: bool,
}

impl StaticUmbilic {
    fn new(model: Arc<StaticModel>, d: &TwistedDecomposition, t0: f64, dual: bool) -> Result<Self> {
        let m = model.fibre.dim();
        if m != d.leaf.dim() + 1 {
            return Err(Error::Config(format!(
                "decomposition has dimension {}, fibre has dimension {m}",
                d.leaf.dim() + 1
            )));
        }
        let (a, b) = (d.a, d.b);
        let sign = if dual { -1.0 } else { 1.0 };
        let h: FieldRef = Arc::new(SlabCoordinate { dim: m, a, b, sign, t0 });
        Ok(StaticUmbilic { graph: StaticGraph::new(model, h)?, t0, dual })
    }

    fn log_derivatives(&self, x: &[f64]) -> Result<(f64, f64)> {
        let model = &self.graph.model;
        let phi = model.potential.jet(x)?;
        let mu = twisted_mu(&model.conformal)?.jet(x)?;
        Ok((mu.grad[0] / mu.value, phi.grad[0] / phi.value))
    }

    /// `H* = (n−2) d/ds ln(μφ)`, and `−(n−2) d/ds ln(μφ)` for the dual.
    pub fn mean_curvature_formula(&self, x: &[f64]) -> Result<f64> {
        let (lm, lp) = self.log_derivatives(x)?;
        let sign = if self.dual { -1.0 } else { 1.0 };
        Ok(sign * (self.graph.n() - 2) as f64 * (lm + lp))
    }

    /// `(n−2) d/ds ln(φ/μ)`, the alternative closed form for the dual.
    pub fn phi_over_mu_formula(&self, x: &[f64]) -> Result<f64> {
        let (lm, lp) = self.log_derivatives(x)?;
        Ok((self.graph.n() - 2) as f64 * (lp - lm))
    }

    pub fn measured_mean_curvature(&self, x: &[f64]) -> Result<f64> {
        self.graph.mean_curvature_star(x)
    }

    /// Dual through the same anchor: the sign of the base parameter is reversed again.
    pub fn dual_of(&self, d: &TwistedDecomposition) -> Result<StaticUmbilic> {
        StaticUmbilic::new(self.graph.model.clone(), d, self.t0, !self.dual)
    }

    /// `max |ξ residual|`, `max |H*_measured − H*_formula|` over the grid.
    pub fn check(&self, grid: &[Vec<f64>]) -> Result<(f64, f64)> {
        let mut null: f64 = 0.0;
        let mut mean: f64 = 0.0;
        for x in grid {
            null = null.max(self.graph.null_residual(x)?);
            mean = mean.max((self.measured_mean_curvature(x)? - self.mean_curvature_formula(x)?).abs());
        }
        Ok((null, mean))
    }
}

/// `sign·s + t0` on the slab `a < s < b`.
struct SlabCoordinate {
    dim: usize,
    a: f64,
    b: f64,
    sign: f64,
    t0: f64,
}

impl ScalarField for SlabCoordinate {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        if x[0] <= self.a || x[0] >= self.b {
            return Err(Error::OutsideChart(format!("s = {} outside ({}, {})", x[0], self.a, self.b)));
        }
        Ok(self.sign * x[0] + self.t0)
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let mut j = Jet::constant(self.value(x)?, self.dim);
        j.grad[0] = self.sign;
        Ok(j)
    }
}

fn twisted_mu(f: &FibreModel) -> Result<FieldRef> {
    match f.kind() {
        crate::fibre::FibreKind::Twisted(t) => Ok(t.mu.clone()),
        _ => Err(Error::Config("conformal fibre is not a twisted product".into())),
    }
}

/// `{(s, z, s + t0)}`; the model's conformal fibre must be the twisted fibre of `d`.
pub fn static_umbilic_construct(model: Arc<StaticModel>, d: &TwistedDecomposition, t0: f64) -> Result<StaticUmbilic> {
    twisted_mu(&model.conformal)?;
    StaticUmbilic::new(model, d, t0, false)
}

/// `{(s, z, −s + t0)}`.
pub fn static_dual(model: Arc<StaticModel>, d: &TwistedDecomposition, t0: f64) -> Result<StaticUmbilic> {
    twisted_mu(&model.conformal)?;
    StaticUmbilic::new(model, d, t0, true)
}

/// `h(r)` of the radial family `(1/h) dr² + r² g₀ − h dt²` over `S^{n−2}`.
#[derive(Clone, Debug)]
pub struct RadialStaticFamily {
    pub h: CompiledExpr,
    h1: CompiledExpr,
    h2: CompiledExpr,
    h3: CompiledExpr,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Spacetime dimension.
    pub n: usize,
}

impl RadialStaticFamily {
    pub fn new(h: CompiledExpr, r_lo: f64, r_hi: f64, n: usize) -> Result<Self> {
        if h.vars().len() != 1 {
            return Err(Error::Config("h must be a function of r only".into()));
        }
        if !(r_lo < r_hi) || n < 3 {
            return Err(Error::Config(format!("invalid radial family: ({r_lo}, {r_hi}), n = {n}")));
        }
        let h1 = h.derivative(0);
        let h2 = h1.derivative(0);
        let h3 = h2.derivative(0);
        Ok(RadialStaticFamily { h, h1, h2, h3, r_lo, r_hi, n })
    }

    pub fn parse(text: &str, params: &[(&str, f64)], r_lo: f64, r_hi: f64, n: usize) -> Result<Self> {
        Self::new(CompiledExpr::parse(text, &["r"], params)?, r_lo, r_hi, n)
    }

    /// `h ≡ 1`: Minkowski space in static form.
    pub fn minkowski(n: usize) -> Self {
        Self::parse("1", &[], 0.0, f64::INFINITY, n).expect("constant profile")
    }

    /// `h = 1 − m²/r` on the exterior `r > m²`.
    pub fn schwarzschild(m: f64) -> Self {
        Self::parse("1 - m^2/r", &[("m", m)], m * m, f64::INFINITY, 4).expect("schwarzschild profile")
    }

    /// `h = 1 − m²/r + c²/r²` outside the outer horizon.
    pub fn reissner_nordstrom(m: f64, c: f64) -> Result<Self> {
        let disc = m.powi(4) - 4.0 * c * c;
        if disc < 0.0 {
            return Err(Error::Config("no horizon: m⁴ < 4c²".into()));
        }
        let r_plus = 0.5 * (m * m + disc.sqrt());
        Self::parse("1 - m^2/r + c^2/r^2", &[("m", m), ("c", c)], r_plus, f64::INFINITY, 4)
    }

    fn ev(&self, e: &CompiledExpr, r: f64) -> Result<f64> {
        e.eval(&[r]).map_err(|err| Error::Domain(err.to_string()))
    }

    pub fn h_at(&self, r: f64) -> Result<f64> {
        self.ev(&self.h, r)
    }

    /// `(h, h′, h″, h‴)` at `r`.
    pub fn jet(&self, r: f64) -> Result<[f64; 4]> {
        Ok([self.ev(&self.h, r)?, self.ev(&self.h1, r)?, self.ev(&self.h2, r)?, self.ev(&self.h3, r)?])
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.r_lo && r < self.r_hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileStop {
    Reached,
    Horizon { s: f64 },
    IntervalEnd { s: f64 },
}

/// `ϕ′ = h(ϕ)`, `ϕ(0) = r0`, integrated forward and backward with dense output.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub family: RadialStaticFamily,
    pub r0: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub lower_stop: ProfileStop,
    pub upper_stop: ProfileStop,
    forward: ode::Solution,
    backward: ode::Solution,
}

pub fn radial_profile(family: &RadialStaticFamily, r0: f64, s_lo: f64, s_hi: f64) -> Result<RadialProfile> {
    if !family.contains(r0) {
        return Err(Error::Config(format!("r0 = {r0} outside ({}, {})", family.r_lo, family.r_hi)));
    }
    if !(s_lo < 0.0 && 0.0 < s_hi) {
        return Err(Error::Config(format!("profile range ({s_lo}, {s_hi}) must contain 0")));
    }
    if !(family.h_at(r0)? > HORIZON_TOL) {
        return Err(Error::Domain(format!("h(r0) = {} is not positive", family.h_at(r0)?)));
    }
    let run = |end: f64| -> Result<(ode::Solution, ProfileStop)> {
        let sol = ode::integrate(
            |_, y, dy| dy[0] = family.h_at(y[0]).unwrap_or(f64::NAN),
            0.0,
            &[r0],
            end,
            &ode::OdeOptions::default(),
            |_, y| !family.contains(y[0]) || family.h_at(y[0]).map_or(true, |h| h <= HORIZON_TOL),
        );
        let stop = match sol.termination {
            ode::Termination::Reached => ProfileStop::Reached,
            ode::Termination::Stopped { t } => {
                let r = sol.y_end()[0];
                if family.contains(r) && family.h_at(r).map_or(false, |h| h > 2.0 * HORIZON_TOL) {
                    ProfileStop::IntervalEnd { s: t }
                } else if family.h_at(r).map_or(true, |h| h <= 2.0 * HORIZON_TOL) {
                    ProfileStop::Horizon { s: t }
                } else {
                    ProfileStop::IntervalEnd { s: t }
                }
            }
            _ => ProfileStop::Horizon { s: sol.t_end() },
        };
        Ok((sol, stop))
    };
    let (forward, upper_stop) = run(s_hi)?;
    let (backward, lower_stop) = run(s_lo)?;
    let s_hi_eff = forward.t_end();
    let s_lo_eff = backward.t_end();
    Ok(RadialProfile {
        family: family.clone(),
        r0,
        s_lo: s_lo_eff,
        s_hi: s_hi_eff,
        lower_stop,
        upper_stop,
        forward,
        backward,
    })
}

impl RadialProfile {
    pub fn phi(&self, s: f64) -> Result<f64> {
        let sol = if s >= 0.0 { &self.forward } else { &self.backward };
        sol.sample(s)
            .map(|y| y[0])
            .ok_or_else(|| Error::OutsideChart(format!("s = {s} outside profile range ({}, {})", self.s_lo, self.s_hi)))
    }

    /// Static potential `√(h∘ϕ)`.
    pub fn potential(&self, s: f64) -> Result<f64> {
        Ok(self.family.h_at(self.phi(s)?)?.sqrt())
    }

    /// `(φ, φ_s, φ_ss)` of the potential `√(h∘ϕ)`.
    pub fn potential_jet(&self, s: f64) -> Result<[f64; 3]> {
        let [h, h1, h2, _] = self.family.jet(self.phi(s)?)?;
        let sq = h.sqrt();
        Ok([sq, 0.5 * h1 * sq, 0.5 * h2 * h * sq + 0.25 * h1 * h1 * sq])
    }

    /// `(μ, μ′, μ″)` with `μ = ϕ/√(h∘ϕ)`.
    pub fn mu_jet(&self, s: f64) -> Result<[f64; 3]> {
        let p = self.phi(s)?;
        let [h, h1, h2, _] = self.family.jet(p)?;
        let sq = h.sqrt();
        Ok([p / sq, sq - 0.5 * p * h1 / sq, -0.5 * p * h2 * sq + 0.25 * p * h1 * h1 / sq])
    }

    pub fn mu(&self, s: f64) -> Result<f64> {
        Ok(self.mu_jet(s)?[0])
    }

    /// `μ(s)` through third order, composing the Taylor jet of `ϕ` with `ϕ/√h(ϕ)` in
    /// third-order dual numbers.
    pub fn mu_third_order(&self, s: f64) -> Result<[f64; 4]> {
        let p = self.phi(s)?;
        let [h, h1, h2, _] = self.family.jet(p)?;
        let phi = Dual3_64::new(p, h, h1 * h, h2 * h * h + h1 * h1 * h);
        let hv = self.family.h.eval_dual(&[phi]).map_err(|e| Error::Domain(e.to_string()))?;
        let mu = phi / hv.sqrt();
        Ok([mu.re, mu.v1, mu.v2, mu.v3])
    }

    /// `((μ″/μ)′, −h² h‴/2)` at `s`.
    pub fn identity_pair(&self, s: f64) -> Result<(f64, f64)> {
        let [m0, m1, m2, m3] = self.mu_third_order(s)?;
        let lhs = (m3 * m0 - m2 * m1) / (m0 * m0);
        let [h, _, _, h3] = self.family.jet(self.phi(s)?)?;
        Ok((lhs, -0.5 * h * h * h3))
    }

    /// Max over `samples` interior points of `|(μ″/μ)′ + h² h‴/2|`.
    pub fn identity_residual(&self, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let s = self.s_lo + (self.s_hi - self.s_lo) * (i as f64 + 0.5) / samples as f64;
            let (a, b) = self.identity_pair(s)?;
            worst = worst.max((a - b).abs());
        }
        Ok(worst)
    }

    /// Pulls `(1/h)((1/h) dr² + r² g₀)` back through `r = ϕ(s)`: the `ds²` coefficient
    /// `ϕ′²/h²` (with `ϕ′` by central differences of the dense output) against 1, and
    /// `ϕ²/h` against `μ²`.
    pub fn pullback_residual(&self, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        let margin = 1e-3 * (self.s_hi - self.s_lo);
        for i in 0..samples {
            let s = self.s_lo + margin + (self.s_hi - self.s_lo - 2.0 * margin) * (i as f64 + 0.5) / samples as f64;
            let step = 1e-4;
            let d = (self.phi(s + step)? - self.phi(s - step)?) / (2.0 * step);
            let p = self.phi(s)?;
            let h = self.family.h_at(p)?;
            let mu = self.mu(s)?;
            worst = worst.max((d * d / (h * h) - 1.0).abs()).max((p * p / h - mu * mu).abs());
        }
        Ok(worst)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.s_lo, self.s_hi)
    }

    /// `ds² + μ² g₀` over the unit sphere; with `normalized`, the leaf is the sphere of radius
    /// `μ(0)` and the warping is `μ/μ(0)`.
    pub fn decomposition(self: &Arc<Self>, normalized: bool) -> Result<TwistedDecomposition> {
        let m = self.family.n - 2;
        let mu0 = self.mu(0.0)?;
        let scale = if normalized { mu0 } else { 1.0 };
        let (a, b) = self.interval();
        let leaf = FibreModel::sphere(m, scale);
        let mu: FieldRef = Arc::new(ProfileField { profile: self.clone(), dim: m + 1, which: Which::Mu, scale });
        let anchor = vec![std::f64::consts::FRAC_PI_2 * scale; m];
        TwistedDecomposition::analytic(a, b, leaf, mu, anchor)
    }

    /// Static model with conformal fibre `ds² + μ² g₀` (unit leaf) and potential `√(h∘ϕ)`.
    pub fn static_model(self: &Arc<Self>) -> Result<(StaticModel, TwistedDecomposition)> {
        let d = self.decomposition(false)?;
        let fibre = d.fibre(f64::INFINITY)?;
        let phi: FieldRef = Arc::new(ProfileField { profile: self.clone(), dim: fibre.dim(), which: Which::Potential, scale: 1.0 });
        Ok((StaticModel::from_conformal(fibre, phi)?, d))
    }
}

#[derive(Clone, Copy)]
enum Which {
    Mu,
    Potential,
}

/// `μ(s)/scale` or `√h(ϕ(s))` as a field of `(s, z)`, with its analytic jet.
struct ProfileField {
    profile: Arc<RadialProfile>,
    dim: usize,
    which: Which,
    scale: f64,
}

impl ProfileField {
    fn values(&self, s: f64) -> Result<[f64; 3]> {
        let v = match self.which {
            Which::Mu => self.profile.mu_jet(s)?,
            Which::Potential => self.profile.potential_jet(s)?,
        };
        Ok(v.map(|c| c / self.scale))
    }
}

impl ScalarField for ProfileField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.values(x[0])?[0])
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let [v, d1, d2] = self.values(x[0])?;
        let mut jet = Jet::constant(v, self.dim);
        jet.grad[0] = d1;
        jet.hess[(0, 0)] = d2;
        Ok(jet)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    ExactlyTwo,
    Refused(String),
}

#[derive(Clone, Debug)]
pub struct UniquenessCertificate {
    /// `(r, h‴(r))`.
    pub samples: Vec<(f64, f64)>,
    /// Isolated sign changes of `h‴` inside the range.
    pub zeros: Vec<f64>,
    /// Longest stretch of consecutive samples with `|h‴| < tol`.
    pub longest_flat_run: f64,
    /// `max |(μ″/μ)′ + h² h‴/2|` along a profile through the middle of the range.
    pub identity_residual: f64,
    pub verdict: Verdict,
}

/// Samples `h‴` on `[r_lo, r_hi]`; the verdict is "exactly two" unless `|h‴| < tol` on a
/// stretch longer than `eps_int`.
pub fn uniqueness_certificate(
    family: &RadialStaticFamily,
    r_lo: f64,
    r_hi: f64,
    samples: usize,
    eps_int: f64,
    tol: f64,
) -> Result<UniquenessCertificate> {
    if !(family.contains(r_lo) && family.contains(r_hi) && r_lo < r_hi) || samples < 2 {
        return Err(Error::Config(format!("certificate range ({r_lo}, {r_hi}) is not inside the family interval")));
    }
    let rs: Vec<f64> = (0..samples).map(|i| r_lo + (r_hi - r_lo) * i as f64 / (samples - 1) as f64).collect();
    let pts: Vec<(f64, f64)> = rs.iter().map(|&r| Ok((r, family.jet(r)?[3]))).collect::<Result<_>>()?;
    let mut zeros = Vec::new();
    for w in pts.windows(2) {
        if w[0].1 * w[1].1 < 0.0 {
            let z = crate::numeric::root::brent(|r| family.jet(r).map(|j| j[3]).unwrap_or(f64::NAN), w[0].0, w[1].0, 1e-13, 200);
            zeros.extend(z);
        }
    }
    let mut longest: f64 = 0.0;
    let mut start: Option<f64> = None;
    for &(r, h3) in &pts {
        if h3.abs() < tol {
            let s0 = *start.get_or_insert(r);
            longest = longest.max(r - s0);
        } else {
            start = None;
        }
    }
    let mut sub = family.clone();
    sub.r_lo = r_lo;
    sub.r_hi = r_hi;
    let r_mid = 0.5 * (r_lo + r_hi);
    let span = 0.25 * (r_hi - r_lo) / family.h_at(r_mid)?.max(1e-3);
    let prof = radial_profile(&sub, r_mid, -span, span)?;
    let identity_residual = prof.identity_residual(21)?;
    let verdict = if longest > eps_int || pts.iter().all(|p| p.1.abs() < tol) {
        Verdict::Refused(format!("h‴ vanishes on a stretch of length {longest:.3e}; the leaf may have constant curvature"))
    } else {
        Verdict::ExactlyTwo
    };
    Ok(UniquenessCertificate { samples: pts, zeros, longest_flat_run: longest, identity_residual, verdict })
}

/// Whether `J ×_μ S` is locally of constant curvature along the profile, i.e. whether
/// `μ″μ − μ′² + 1` vanishes at all samples.
pub fn sphere_leaf_constant_curvature_guard(profile: &RadialProfile, samples: usize, tol: f64) -> Result<bool> {
    let (lo, hi) = profile.interval();
    let jet = |s: f64| profile.mu_jet(s).map(|j| (j[0], j[1], j[2]));
    Ok(crate::twist::sphere_warped_residual_with(jet, lo, hi, samples)? <= tol)
}
