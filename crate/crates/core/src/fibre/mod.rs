//! Riemannian fibres exposed through a single canonical chart each.

mod geodesic;
pub mod spaceform;
mod twisted;

pub use geodesic::{GeodesicRecord, JacobiSamples};
pub use spaceform::SpaceForm;
pub use twisted::TwistedData;

use crate::error::{Error, Result};
use crate::expr::CompiledExpr;
use crate::field::{FieldRef, Jet, ScalarField};
use crate::metric::{self, christoffel_fd, riemann_from_metric, ChartMetric, Christoffel, Riemann};
use nalgebra::{DMatrix, DVector};
use num_dual::DualNum;
use std::f64::consts::PI;
use std::sync::Arc;

pub const DEFAULT_EPS_CUT: f64 = 1e-3;

pub type LeafMap = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
pub struct PullbackData {
    pub target: Box<FibreModel>,
    pub map: LeafMap,
}

#[derive(Clone)]
pub enum FibreKind {
    Euclidean,
    SpaceForm(SpaceForm),
    Product(Vec<FibreModel>),
    Twisted(TwistedData),
    /// Upper-triangular metric components (row-major) as expressions of the chart coordinates.
    Expression(Vec<CompiledExpr>),
    Pullback(PullbackData),
    Conformal(ConformalData),
}

/// `w(x)² g_base`.
#[derive(Clone)]
pub struct ConformalData {
    pub base: Box<FibreModel>,
    pub scale: FieldRef,
}

#[derive(Clone)]
pub struct FibreModel {
    dim: usize,
    kind: FibreKind,
    lo: Vec<f64>,
    hi: Vec<f64>,
    normal_radius: f64,
}

impl std::fmt::Debug for FibreModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FibreModel({}, dim {})", self.kind_name(), self.dim)
    }
}

impl FibreModel {
    pub fn euclidean(m: usize) -> Self {
        FibreModel {
            dim: m,
            kind: FibreKind::Euclidean,
            lo: vec![f64::NEG_INFINITY; m],
            hi: vec![f64::INFINITY; m],
            normal_radius: f64::INFINITY,
        }
    }

    /// Round sphere of the given radius and dimension.
    pub fn sphere(m: usize, radius: f64) -> Self {
        Self::space_form(m, 1.0 / (radius * radius), DEFAULT_EPS_CUT)
    }

    /// Hyperbolic space of constant curvature `k < 0`.
    pub fn hyperbolic(m: usize, k: f64) -> Self {
        assert!(k < 0.0, "hyperbolic curvature must be negative");
        Self::space_form(m, k, DEFAULT_EPS_CUT)
    }

    /// Polar chart `(r, θ_1, …, θ_{m−1})` about a fixed pole, excluding a collar `eps` around
    /// the pole, the cut point and the coordinate singularities.
    pub fn space_form(m: usize, k: f64, eps: f64) -> Self {
        let sf = SpaceForm { m, k };
        let rr = sf.radius();
        let mut lo = Vec::with_capacity(m);
        let mut hi = Vec::with_capacity(m);
        if m == 1 {
            if k > 0.0 {
                lo.push(-PI * rr + eps * rr);
                hi.push(PI * rr - eps * rr);
            } else {
                lo.push(f64::NEG_INFINITY);
                hi.push(f64::INFINITY);
            }
        } else {
            lo.push(eps * rr.min(1.0));
            hi.push(if k > 0.0 { PI * rr - eps * rr } else { f64::INFINITY });
            for i in 1..m {
                if i + 1 == m {
                    lo.push(-PI + eps);
                    hi.push(PI - eps);
                } else {
                    lo.push(eps);
                    hi.push(PI - eps);
                }
            }
        }
        let normal_radius = if k > 0.0 { PI * rr * (1.0 - eps) } else { f64::INFINITY };
        FibreModel { dim: m, kind: FibreKind::SpaceForm(sf), lo, hi, normal_radius }
    }

    pub fn product(factors: Vec<FibreModel>) -> Self {
        let dim = factors.iter().map(|f| f.dim).sum();
        let lo = factors.iter().flat_map(|f| f.lo.clone()).collect();
        let hi = factors.iter().flat_map(|f| f.hi.clone()).collect();
        let normal_radius = factors.iter().map(|f| f.normal_radius).fold(f64::INFINITY, f64::min);
        FibreModel { dim, kind: FibreKind::Product(factors), lo, hi, normal_radius }
    }

    /// Twisted product `(a,b) ×_μ S` with metric `ds² + μ(s,z)² g_S`; `mu` is a field of `(s, z)`.
    pub fn twisted(a: f64, b: f64, leaf: FibreModel, mu: FieldRef, normal_radius: f64) -> Result<Self> {
        if mu.dim() != leaf.dim + 1 {
            return Err(Error::Config(format!(
                "warping field has {} variables, expected {}",
                mu.dim(),
                leaf.dim + 1
            )));
        }
        let dim = leaf.dim + 1;
        let mut lo = vec![a];
        lo.extend(leaf.lo.iter().copied());
        let mut hi = vec![b];
        hi.extend(leaf.hi.iter().copied());
        Ok(FibreModel {
            dim,
            kind: FibreKind::Twisted(TwistedData { a, b, leaf: Box::new(leaf), mu }),
            lo,
            hi,
            normal_radius,
        })
    }

    /// Metric given by expressions `g_ij` (upper triangle, row-major) on a coordinate box.
    pub fn expression(components: Vec<CompiledExpr>, lo: Vec<f64>, hi: Vec<f64>, normal_radius: f64) -> Result<Self> {
        let m = lo.len();
        if components.len() != m * (m + 1) / 2 || hi.len() != m {
            return Err(Error::Config("metric component count does not match dimension".into()));
        }
        Ok(FibreModel { dim: m, kind: FibreKind::Expression(components), lo, hi, normal_radius })
    }

    /// Metric pulled back from `target` through `map` on a parameter box.
    pub fn pullback(target: FibreModel, map: LeafMap, lo: Vec<f64>, hi: Vec<f64>, normal_radius: f64) -> Self {
        FibreModel {
            dim: lo.len(),
            kind: FibreKind::Pullback(PullbackData { target: Box::new(target), map }),
            lo,
            hi,
            normal_radius,
        }
    }

    /// Conformal rescaling `w(x)² g_base` in the chart of `base`.
    pub fn conformal(base: FibreModel, scale: FieldRef) -> Result<Self> {
        if scale.dim() != base.dim {
            return Err(Error::Config(format!(
                "conformal factor has {} variables, expected {}",
                scale.dim(),
                base.dim
            )));
        }
        let (lo, hi, dim, normal_radius) = (base.lo.clone(), base.hi.clone(), base.dim, base.normal_radius);
        Ok(FibreModel { dim, kind: FibreKind::Conformal(ConformalData { base: Box::new(base), scale }), lo, hi, normal_radius })
    }

    pub fn kind(&self) -> &FibreKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FibreKind::Euclidean => "euclidean",
            FibreKind::SpaceForm(sf) if sf.k > 0.0 => "sphere",
            FibreKind::SpaceForm(_) => "hyperbolic",
            FibreKind::Product(_) => "product",
            FibreKind::Twisted(_) => "twisted",
            FibreKind::Expression(_) => "expression",
            FibreKind::Pullback(_) => "pullback",
            FibreKind::Conformal(_) => "conformal",
        }
    }

    pub fn space_form_data(&self) -> Option<SpaceForm> {
        match self.kind {
            FibreKind::SpaceForm(sf) => Some(sf),
            _ => None,
        }
    }

    /// Constant sectional curvature, if the fibre is a space form (euclidean → 0).
    pub fn constant_curvature(&self) -> Option<f64> {
        match self.kind {
            FibreKind::Euclidean => Some(0.0),
            FibreKind::SpaceForm(sf) => Some(sf.k),
            _ => None,
        }
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn normal_radius(&self) -> f64 {
        self.normal_radius
    }

    pub fn with_normal_radius(mut self, r: f64) -> Self {
        self.normal_radius = r;
        self
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| v.is_finite() && *v >= *l && *v <= *h)
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::OutsideChart(format!("{} fibre at {:?}", self.kind_name(), x)))
        }
    }

    /// Whether exp/log/distance are available in closed form.
    pub fn closed_form(&self) -> bool {
        match &self.kind {
            FibreKind::Euclidean | FibreKind::SpaceForm(_) => true,
            FibreKind::Product(fs) => fs.iter().all(|f| f.closed_form()),
            _ => false,
        }
    }

    fn blocks(factors: &[FibreModel]) -> Vec<(usize, usize)> {
        let mut off = 0;
        factors
            .iter()
            .map(|f| {
                let r = (off, f.dim);
                off += f.dim;
                r
            })
            .collect()
    }

    /// g_F(u, v) at x.
    pub fn metric_eval(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(metric::inner(&self.metric(x)?, u, v))
    }

    pub fn norm(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self.metric_eval(x, v, v)?.max(0.0).sqrt())
    }

    /// Metric gradient ∇^F h.
    pub fn gradient(&self, h: &dyn ScalarField, x: &[f64]) -> Result<DVector<f64>> {
        let jet = h.jet(x)?;
        metric::gradient_of(&self.metric(x)?, &jet.grad)
    }

    /// Covariant Hessian Hess^F h as a chart matrix.
    pub fn hessian(&self, h: &dyn ScalarField, x: &[f64]) -> Result<DMatrix<f64>> {
        let jet = h.jet(x)?;
        Ok(metric::covariant_hessian(&jet, &self.christoffel(x)?))
    }

    pub fn hessian_from_jet(&self, jet: &Jet, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(metric::covariant_hessian(jet, &self.christoffel(x)?))
    }

    pub fn sectional_curvature(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        metric::sectional_curvature(self, x, u, v)
    }

    /// Distance to a fixed point, generic over dual numbers; `None` when no closed form exists.
    pub fn distance_generic<D: DualNum<Primitive = f64>>(&self, x: &[D], y: &[f64]) -> Option<D> {
        match &self.kind {
            FibreKind::Euclidean => {
                let mut s = D::from(0.0);
                for i in 0..self.dim {
                    let d = x[i].clone() - y[i];
                    s += d.clone() * d;
                }
                Some(s.sqrt())
            }
            FibreKind::SpaceForm(sf) => Some(sf.distance_generic(x, y)),
            FibreKind::Product(fs) => {
                let mut s = D::from(0.0);
                for (f, (o, n)) in fs.iter().zip(Self::blocks(fs)) {
                    let d = f.distance_generic(&x[o..o + n], &y[o..o + n])?;
                    s += d.clone() * d;
                }
                Some(s.sqrt())
            }
            _ => None,
        }
    }

    /// Ambient-free orthonormal basis of T_xF (g-Gram–Schmidt of the coordinate basis).
    pub fn orthonormal_frame(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let g = self.metric(x)?;
        let start: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| {
                let mut e = vec![0.0; self.dim];
                e[i] = 1.0;
                e
            })
            .collect();
        gram_schmidt(&g, &start, &[])
    }
}

/// g-orthonormalise `vecs` against the already orthonormal `against`; drops dependent vectors.
pub fn gram_schmidt(g: &DMatrix<f64>, vecs: &[Vec<f64>], against: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = against.to_vec();
    let mut out = Vec::new();
    for v in vecs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = metric::inner(g, &w, b) / metric::inner(g, b, b);
                for i in 0..w.len() {
                    w[i] -= c * b[i];
                }
            }
        }
        let nn = metric::inner(g, &w, &w);
        let scale = metric::inner(g, v, v).abs().max(1e-300);
        if nn > 1e-20 * scale {
            let inv = 1.0 / nn.sqrt();
            let w: Vec<f64> = w.iter().map(|c| c * inv).collect();
            basis.push(w.clone());
            out.push(w);
        }
    }
    Ok(out)
}

impl ChartMetric for FibreModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(x)?;
        self.metric_unchecked(x)
    }

    fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        self.check(x)?;
        self.christoffel_unchecked(x)
    }

    fn riemann(&self, x: &[f64]) -> Result<Riemann> {
        self.check(x)?;
        self.riemann_unchecked(x)
    }
}

impl FibreModel {
    fn christoffel_unchecked(&self, x: &[f64]) -> Result<Christoffel> {
        match &self.kind {
            FibreKind::Euclidean => Ok(Christoffel::zeros(self.dim)),
            FibreKind::SpaceForm(sf) => Ok(sf.christoffel(x)),
            FibreKind::Product(fs) => {
                let mut out = Christoffel::zeros(self.dim);
                for (f, (o, n)) in fs.iter().zip(Self::blocks(fs)) {
                    let c = f.christoffel_unchecked(&x[o..o + n])?;
                    for a in 0..n {
                        for b in 0..n {
                            for d in b..n {
                                out.set(o + a, o + b, o + d, c.get(a, b, d));
                            }
                        }
                    }
                }
                Ok(out)
            }
            FibreKind::Twisted(t) => t.christoffel(x),
            FibreKind::Expression(_) | FibreKind::Pullback(_) => christoffel_fd(&Unchecked(self), x),
            FibreKind::Conformal(c) => {
                let m = self.dim;
                let base = c.base.christoffel_unchecked(x)?;
                let gb = c.base.metric_unchecked(x)?;
                let ginv = metric::invert(&gb)?;
                let jet = c.scale.jet(x)?;
                if !(jet.value > 0.0) {
                    return Err(Error::Domain(format!("conformal factor {} is not positive", jet.value)));
                }
                let du: Vec<f64> = jet.grad.iter().map(|d| d / jet.value).collect();
                let up: Vec<f64> = (0..m).map(|k| (0..m).map(|l| ginv[(k, l)] * du[l]).sum()).collect();
                let mut out = Christoffel::zeros(m);
                for k in 0..m {
                    for i in 0..m {
                        for j in i..m {
                            let mut v = base.get(k, i, j) - gb[(i, j)] * up[k];
                            if k == i {
                                v += du[j];
                            }
                            if k == j {
                                v += du[i];
                            }
                            out.set(k, i, j, v);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    fn riemann_unchecked(&self, x: &[f64]) -> Result<Riemann> {
        match &self.kind {
            FibreKind::Euclidean => Ok(Riemann::zeros(self.dim)),
            FibreKind::SpaceForm(sf) => Ok(sf.riemann(x)),
            FibreKind::Product(fs) => {
                let mut out = Riemann::zeros(self.dim);
                for (f, (o, n)) in fs.iter().zip(Self::blocks(fs)) {
                    let r = f.riemann_unchecked(&x[o..o + n])?;
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                for d in 0..n {
                                    out.set(o + a, o + b, o + c, o + d, r.get(a, b, c, d));
                                }
                            }
                        }
                    }
                }
                Ok(out)
            }
            FibreKind::Twisted(_) | FibreKind::Conformal(_) => metric::riemann_from_connection(&Unchecked(self), x),
            FibreKind::Expression(_) | FibreKind::Pullback(_) => riemann_from_metric(&Unchecked(self), x),
        }
    }

    fn metric_unchecked(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        match &self.kind {
            FibreKind::Euclidean => Ok(DMatrix::identity(self.dim, self.dim)),
            FibreKind::SpaceForm(sf) => Ok(sf.metric(x)),
            FibreKind::Product(fs) => {
                let mut g = DMatrix::zeros(self.dim, self.dim);
                for (f, (o, n)) in fs.iter().zip(Self::blocks(fs)) {
                    let gi = f.metric_unchecked(&x[o..o + n])?;
                    g.view_mut((o, o), (n, n)).copy_from(&gi);
                }
                Ok(g)
            }
            FibreKind::Twisted(t) => t.metric(x),
            FibreKind::Conformal(c) => {
                let w = c.scale.value(x)?;
                if !(w > 0.0) {
                    return Err(Error::Domain(format!("conformal factor {w} is not positive")));
                }
                Ok(c.base.metric_unchecked(x)? * (w * w))
            }
            FibreKind::Expression(comps) => {
                let m = self.dim;
                let mut g = DMatrix::zeros(m, m);
                let mut idx = 0;
                for i in 0..m {
                    for j in i..m {
                        let v = comps[idx].eval(x).map_err(|e| Error::Domain(e.to_string()))?;
                        g[(i, j)] = v;
                        g[(j, i)] = v;
                        idx += 1;
                    }
                }
                Ok(g)
            }
            FibreKind::Pullback(p) => {
                let y = (p.map)(x)?;
                let gt = p.target.metric(&y)?;
                let failed = std::cell::Cell::new(false);
                let cols = crate::numeric::fd::jacobian(
                    |z| match (p.map)(z) {
                        Ok(v) => v,
                        Err(_) => {
                            failed.set(true);
                            vec![f64::NAN; y.len()]
                        }
                    },
                    x,
                );
                if failed.get() {
                    return Err(Error::OutsideChart("leaf map stencil".into()));
                }
                let j = DMatrix::from_fn(y.len(), self.dim, |i, k| cols[i][k]);
                Ok(j.transpose() * gt * j)
            }
        }
    }
}

/// Domain-unchecked view so that difference stencils may straddle the collar.
struct Unchecked<'a>(&'a FibreModel);

impl ChartMetric for Unchecked<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.0.metric_unchecked(x)
    }

    fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        self.0.christoffel_unchecked(x)
    }
}

/// `x ↦ d_F(center, x)`; exact jets for closed-form fibres.
pub struct DistanceField {
    pub fibre: FibreModel,
    pub center: Vec<f64>,
}

impl ScalarField for DistanceField {
    fn dim(&self) -> usize {
        self.fibre.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.fibre.distance(&self.center, x)
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        if self.fibre.closed_form() {
            let xv = DVector::from_column_slice(x);
            let (v, g, h) = num_dual::hessian(
                |z| self.fibre.distance_generic(z.as_slice(), &self.center).expect("closed form"),
                &xv,
            );
            if !v.is_finite() || !g.iter().all(|c| c.is_finite()) {
                return Err(Error::Degenerate("distance not differentiable here".into()));
            }
            Ok(Jet { value: v, grad: g, hess: h })
        } else {
            crate::field::fd_jet(self, x)
        }
    }
}
