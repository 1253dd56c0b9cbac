//! GRW spacetimes `I ×_f F` with metric `−dt² + f(t)² g_F` in the product chart `(t, x)`.

use crate::error::{Error, Result};
use crate::expr::{BinOp, CompiledExpr, Expr, Func};
use crate::fibre::FibreModel;
use crate::metric::{self, ChartMetric, Christoffel};
use crate::numeric::ode::{self, OdeOptions, Termination};
use crate::numeric::{fd, quad, root};
use nalgebra::DMatrix;
use std::f64::consts::FRAC_PI_2;

const TABLE_CELLS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrature {
    /// `A(t) = ∫ f`.
    A,
    /// `C(t) = ∫ 1/f`.
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Future,
    Past,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Future => 1.0,
            Orientation::Past => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Orientation::Future => Orientation::Past,
            Orientation::Past => Orientation::Future,
        }
    }
}

/// Profiles whose primitives and their inverses are known in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Catalog {
    Constant(f64),
    Cosh,
    Cos,
    Sin,
    Exp,
    Power(f64),
}

impl Catalog {
    fn detect(e: &Expr, lo: f64, hi: f64) -> Option<Catalog> {
        let is_t = |a: &Expr| matches!(a, Expr::Var(n, _) if n == "t");
        match e {
            Expr::Num(c) if *c > 0.0 => Some(Catalog::Constant(*c)),
            Expr::Call(f, args, _) if args.len() == 1 && is_t(&args[0]) => match f {
                Func::Cosh => Some(Catalog::Cosh),
                Func::Exp => Some(Catalog::Exp),
                Func::Cos if lo >= -FRAC_PI_2 && hi <= FRAC_PI_2 => Some(Catalog::Cos),
                Func::Sin if lo >= 0.0 && hi <= std::f64::consts::PI => Some(Catalog::Sin),
                _ => None,
            },
            Expr::Bin(BinOp::Pow, b, p, _) if is_t(b) && lo >= 0.0 => match **p {
                Expr::Num(p) => Some(Catalog::Power(p)),
                _ => None,
            },
            _ => None,
        }
    }

    fn primitive(self, which: Quadrature, t: f64) -> f64 {
        use Catalog::*;
        match (self, which) {
            (Constant(c), Quadrature::A) => c * t,
            (Constant(c), Quadrature::C) => t / c,
            (Cosh, Quadrature::A) => t.sinh(),
            (Cosh, Quadrature::C) => 2.0 * (t / 2.0).tanh().atan(),
            (Cos, Quadrature::A) => t.sin(),
            (Cos, Quadrature::C) => t.tan().asinh(),
            (Sin, Quadrature::A) => -t.cos(),
            (Sin, Quadrature::C) => (t / 2.0).tan().ln(),
            (Exp, Quadrature::A) => t.exp(),
            (Exp, Quadrature::C) => -(-t).exp(),
            (Power(p), Quadrature::A) if p == -1.0 => t.ln(),
            (Power(p), Quadrature::A) => t.powf(p + 1.0) / (p + 1.0),
            (Power(p), Quadrature::C) if p == 1.0 => t.ln(),
            (Power(p), Quadrature::C) => t.powf(1.0 - p) / (1.0 - p),
        }
    }

    fn inverse(self, which: Quadrature, v: f64) -> f64 {
        use Catalog::*;
        match (self, which) {
            (Constant(c), Quadrature::A) => v / c,
            (Constant(c), Quadrature::C) => v * c,
            (Cosh, Quadrature::A) => v.asinh(),
            (Cosh, Quadrature::C) => 2.0 * (v / 2.0).tan().atanh(),
            (Cos, Quadrature::A) => v.asin(),
            (Cos, Quadrature::C) => v.sinh().atan(),
            (Sin, Quadrature::A) => (-v).acos(),
            (Sin, Quadrature::C) => 2.0 * v.exp().atan(),
            (Exp, Quadrature::A) => v.ln(),
            (Exp, Quadrature::C) => -(-v).ln(),
            (Power(p), Quadrature::A) if p == -1.0 => v.exp(),
            (Power(p), Quadrature::A) => (v * (p + 1.0)).powf(1.0 / (p + 1.0)),
            (Power(p), Quadrature::C) if p == 1.0 => v.exp(),
            (Power(p), Quadrature::C) => (v * (1.0 - p)).powf(1.0 / (1.0 - p)),
        }
    }
}

/// Cumulative integrals on a uniform grid; values between nodes by a 20-point Gauss rule.
#[derive(Clone, Debug)]
struct QuadTable {
    nodes: Vec<f64>,
    cum: Vec<f64>,
}

impl QuadTable {
    fn build<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64) -> QuadTable {
        let h = (hi - lo) / TABLE_CELLS as f64;
        let nodes: Vec<f64> = (0..=TABLE_CELLS).map(|i| if i == TABLE_CELLS { hi } else { lo + h * i as f64 }).collect();
        let mut cum = vec![0.0; nodes.len()];
        for i in 0..TABLE_CELLS {
            let r = quad::integrate(&g, nodes[i], nodes[i + 1], 1e-15, 1e-13);
            cum[i + 1] = cum[i] + r.value;
        }
        QuadTable { nodes, cum }
    }

    fn eval<F: Fn(f64) -> f64>(&self, g: &F, t: f64) -> f64 {
        let lo = self.nodes[0];
        let hi = *self.nodes.last().unwrap();
        let pos = ((t - lo) / (hi - lo) * TABLE_CELLS as f64).floor();
        let i = (pos.max(0.0) as usize).min(TABLE_CELLS - 1);
        self.cum[i] + quad::gl20_integrate(g, self.nodes[i], t)
    }
}

/// Warping function `f` on an open interval, with `∫f`, `∫1/f` and their inverses.
#[derive(Clone, Debug)]
pub struct WarpingProfile {
    derivs: Vec<CompiledExpr>,
    lo: f64,
    hi: f64,
    catalog: Option<Catalog>,
    tables: Option<(QuadTable, QuadTable)>,
}

impl WarpingProfile {
    /// Parse `f(t)`; `params` are bound constants.
    pub fn parse(text: &str, params: &[(&str, f64)], lo: f64, hi: f64) -> Result<Self> {
        let f = CompiledExpr::parse(text, &["t"], params)?;
        Self::from_expr(f, lo, hi)
    }

    pub fn from_expr(f: CompiledExpr, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Config(format!("empty interval ({lo}, {hi})")));
        }
        let mut derivs = vec![f];
        for k in 0..3 {
            let d = derivs[k].derivative(0);
            derivs.push(d);
        }
        let catalog = Catalog::detect(derivs[0].expr(), lo, hi);
        let mut prof = WarpingProfile { derivs, lo, hi, catalog, tables: None };
        let (slo, shi) = (lo.max(-60.0), hi.min(60.0));
        for i in 1..512 {
            let t = slo + (shi - slo) * i as f64 / 512.0;
            let v = prof.f(t)?;
            if v <= 0.0 {
                return Err(Error::Domain(format!("warping function not positive at t = {t}")));
            }
        }
        if catalog.is_none() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config("numeric warping quadrature needs a bounded interval".into()));
            }
            let fv = |t: f64| prof.f(t).unwrap_or(f64::NAN);
            let ta = QuadTable::build(fv, lo, hi);
            let tc = QuadTable::build(|t| 1.0 / fv(t), lo, hi);
            prof.tables = Some((ta, tc));
        }
        Ok(prof)
    }

    pub fn constant(c: f64) -> Self {
        Self::parse(&format!("{c:?}"), &[], f64::NEG_INFINITY, f64::INFINITY).expect("positive constant")
    }

    pub fn cosh() -> Self {
        Self::parse("cosh(t)", &[], f64::NEG_INFINITY, f64::INFINITY).expect("cosh")
    }

    pub fn exp() -> Self {
        Self::parse("exp(t)", &[], f64::NEG_INFINITY, f64::INFINITY).expect("exp")
    }

    pub fn expr(&self) -> &CompiledExpr {
        &self.derivs[0]
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn has_closed_form(&self) -> bool {
        self.catalog.is_some()
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutsideInterval { t, lo: self.lo, hi: self.hi })
        }
    }

    fn eval_k(&self, k: usize, t: f64) -> Result<f64> {
        self.derivs[k].eval(&[t]).map_err(|e| Error::Domain(e.to_string()))
    }

    pub fn f(&self, t: f64) -> Result<f64> {
        self.eval_k(0, t)
    }

    pub fn df(&self, t: f64) -> Result<f64> {
        self.eval_k(1, t)
    }

    pub fn d2f(&self, t: f64) -> Result<f64> {
        self.eval_k(2, t)
    }

    pub fn d3f(&self, t: f64) -> Result<f64> {
        self.eval_k(3, t)
    }

    /// (f, f′, f″) at t.
    pub fn jet(&self, t: f64) -> Result<(f64, f64, f64)> {
        Ok((self.f(t)?, self.df(t)?, self.d2f(t)?))
    }

    fn integrand(&self, which: Quadrature) -> impl Fn(f64) -> f64 + '_ {
        move |t| {
            let v = self.f(t).unwrap_or(f64::NAN);
            match which {
                Quadrature::A => v,
                Quadrature::C => 1.0 / v,
            }
        }
    }

    /// Primitive relative to an internal origin; defined on the closed interval (limits at the ends).
    fn primitive(&self, which: Quadrature, t: f64) -> f64 {
        if let Some(c) = self.catalog {
            return c.primitive(which, t);
        }
        let (ta, tc) = self.tables.as_ref().expect("tables built");
        let table = if which == Quadrature::A { ta } else { tc };
        table.eval(&self.integrand(which), t)
    }

    /// `∫_{t_ref}^{t}` of `f` or `1/f`.
    pub fn quad(&self, which: Quadrature, t_ref: f64, t: f64) -> Result<f64> {
        self.check(t_ref)?;
        self.check(t)?;
        Ok(self.primitive(which, t) - self.primitive(which, t_ref))
    }

    /// `C(t; t_ref)`.
    pub fn c(&self, t_ref: f64, t: f64) -> Result<f64> {
        self.quad(Quadrature::C, t_ref, t)
    }

    /// Range `(inf, sup)` of `t ↦ quad(t_ref, t)` over the interval.
    pub fn quad_range(&self, which: Quadrature, t_ref: f64) -> Result<(f64, f64)> {
        self.check(t_ref)?;
        let p0 = self.primitive(which, t_ref);
        Ok((self.primitive(which, self.lo) - p0, self.primitive(which, self.hi) - p0))
    }

    /// `∫_I 1/f`.
    pub fn total_c(&self) -> f64 {
        self.primitive(Quadrature::C, self.hi) - self.primitive(Quadrature::C, self.lo)
    }

    /// The `t` with `quad(t_ref, t) = value`.
    pub fn quad_invert(&self, which: Quadrature, t_ref: f64, value: f64) -> Result<f64> {
        let (lo_v, hi_v) = self.quad_range(which, t_ref)?;
        if !(value > lo_v && value < hi_v) {
            return Err(Error::QuadratureRange { value, lo: lo_v, hi: hi_v });
        }
        let target = self.primitive(which, t_ref) + value;
        let t = if let Some(c) = self.catalog {
            c.inverse(which, target)
        } else {
            let g = |t: f64| self.primitive(which, t) - target;
            let guess = root::brent(g, self.lo, self.hi, 1e-14, 200)
                .ok_or(Error::QuadratureRange { value, lo: lo_v, hi: hi_v })?;
            root::newton_polish(
                |t| {
                    let fv = self.f(t).unwrap_or(f64::NAN);
                    let d = if which == Quadrature::A { fv } else { 1.0 / fv };
                    (g(t), d)
                },
                guess,
                2,
            )
        };
        if !self.contains(t) {
            return Err(Error::QuadratureRange { value, lo: lo_v, hi: hi_v });
        }
        Ok(t)
    }

    /// `C^{-1}(v; t_ref)`.
    pub fn c_inv(&self, t_ref: f64, value: f64) -> Result<f64> {
        self.quad_invert(Quadrature::C, t_ref, value)
    }
}

/// A curve in the product chart `(t, x)`.
#[derive(Clone, Debug)]
pub struct SpacetimeCurve {
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct GrwSpace {
    pub warping: WarpingProfile,
    pub fibre: FibreModel,
}

impl GrwSpace {
    pub fn new(warping: WarpingProfile, fibre: FibreModel) -> Self {
        GrwSpace { warping, fibre }
    }

    /// Spacetime dimension `n = 1 + dim F`.
    pub fn n(&self) -> usize {
        1 + self.fibre.dim()
    }

    pub fn check(&self, p: &[f64]) -> Result<()> {
        self.warping.check(p[0])?;
        self.fibre.check(&p[1..])
    }

    pub fn metric_eval(&self, p: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        self.check(p)?;
        let f = self.warping.f(p[0])?;
        Ok(-u[0] * v[0] + f * f * self.fibre.metric_eval(&p[1..], &u[1..], &v[1..])?)
    }

    /// `ζ = f ∂_t`.
    pub fn zeta(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut z = vec![0.0; self.n()];
        z[0] = self.warping.f(p[0])?;
        Ok(z)
    }

    /// Null geodesic from `(t_*, x_*)` with fibre direction `u` (`|u|_F = 1`), normalised so
    /// that `g(γ′, ζ) = ∓1`, built from the warping quadratures.
    pub fn null_geodesic_quadrature(
        &self,
        ts: f64,
        xs: &[f64],
        u: &[f64],
        orientation: Orientation,
        params: &[f64],
    ) -> Result<SpacetimeCurve> {
        self.warping.check(ts)?;
        let un = self.fibre.norm(xs, u)?;
        if (un - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("fibre direction has norm {un}, expected 1")));
        }
        let sign = orientation.sign();
        let mut alphas = Vec::with_capacity(params.len());
        for &s in params {
            alphas.push(self.warping.quad_invert(Quadrature::A, ts, sign * s)?);
        }
        let mut bs = Vec::with_capacity(params.len());
        for &s in params {
            let integrand = |r: f64| {
                let a = self
                    .warping
                    .quad_invert(Quadrature::A, ts, sign * r)
                    .unwrap_or(f64::NAN);
                let fa = self.warping.f(a).unwrap_or(f64::NAN);
                1.0 / (fa * fa)
            };
            let b = if s == 0.0 { 0.0 } else { quad::integrate(integrand, 0.0, s, 1e-14, 1e-12).value };
            bs.push(b);
        }
        let positive: Vec<f64> = bs.iter().copied().filter(|b| *b > 0.0).collect();
        let fib = if positive.is_empty() { None } else { Some(self.fibre.geodesic(xs, u, &positive)?) };
        let mut out = SpacetimeCurve { params: params.to_vec(), points: vec![], velocities: vec![] };
        let mut k = 0;
        for (i, &b) in bs.iter().enumerate() {
            let alpha = alphas[i];
            let fa = self.warping.f(alpha)?;
            let (x, w) = if b > 0.0 {
                let rec = fib.as_ref().unwrap();
                k += 1;
                (rec.points[k - 1].clone(), rec.velocities[k - 1].clone())
            } else {
                (xs.to_vec(), u.to_vec())
            };
            let mut p = vec![alpha];
            p.extend(x);
            let mut v = vec![sign / fa];
            v.extend(w.iter().map(|c| c / (fa * fa)));
            out.points.push(p);
            out.velocities.push(v);
        }
        Ok(out)
    }

    /// Geodesic equations integrated in the product chart.
    pub fn geodesic_numeric(&self, p: &[f64], v: &[f64], params: &[f64]) -> Result<SpacetimeCurve> {
        self.check(p)?;
        let n = self.n();
        let mut y0 = p.to_vec();
        y0.extend_from_slice(v);
        let s_end = params.iter().copied().fold(0.0, f64::max);
        let sol = ode::integrate(
            |_, y, dy| {
                let (q, vel) = y.split_at(n);
                dy[..n].copy_from_slice(vel);
                match self.christoffel_raw(q) {
                    Ok(g) => {
                        let acc = g.contract(vel, vel);
                        for i in 0..n {
                            dy[n + i] = -acc[i];
                        }
                    }
                    Err(_) => dy[n..].iter_mut().for_each(|d| *d = f64::NAN),
                }
            },
            0.0,
            &y0,
            s_end,
            &OdeOptions::default(),
            |_, y| self.check(&y[..n]).is_err(),
        );
        match sol.termination {
            Termination::Reached => {}
            Termination::Stopped { t } => return Err(Error::ChartExit { param: t }),
            _ => return Err(Error::ChartExit { param: sol.t_end() }),
        }
        let mut out = SpacetimeCurve { params: params.to_vec(), points: vec![], velocities: vec![] };
        for &s in params {
            let y = sol.sample(s).ok_or(Error::ChartExit { param: s })?;
            out.points.push(y[..n].to_vec());
            out.velocities.push(y[n..].to_vec());
        }
        Ok(out)
    }

    /// Null geodesic by direct integration; `v` must be null.
    pub fn null_geodesic_numeric(&self, p: &[f64], v: &[f64], params: &[f64]) -> Result<SpacetimeCurve> {
        let q = self.metric_eval(p, v, v)?;
        let scale = v[0] * v[0];
        if q.abs() > 1e-10 * scale.max(1.0) {
            return Err(Error::Domain(format!("initial velocity is not null: g(V,V) = {q:e}")));
        }
        self.geodesic_numeric(p, v, params)
    }

    /// `(K^F(span(v,w)) + f′² − f f″)/f²` for g_F-orthonormal fibre vectors `v`, `w`.
    pub fn null_sectional_curvature(&self, p: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        self.check(p)?;
        let x = &p[1..];
        self.check_orthonormal(x, v, w)?;
        let (f, f1, f2) = self.warping.jet(p[0])?;
        let k = self.fibre.sectional_curvature(x, v, w)?;
        Ok((k + f1 * f1 - f * f2) / (f * f))
    }

    /// Same quantity from the spacetime curvature tensor: `g(R(v̂,u)u, v̂)` with
    /// `v̂ = v/f`, `u = −∂_t + w/f`.
    pub fn null_sectional_curvature_tensor(&self, p: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        self.check(p)?;
        self.check_orthonormal(&p[1..], v, w)?;
        let f = self.warping.f(p[0])?;
        let mut vh = vec![0.0];
        vh.extend(v.iter().map(|c| c / f));
        let mut u = vec![-1.0];
        u.extend(w.iter().map(|c| c / f));
        let r = self.riemann(p)?;
        Ok(r.eval(&vh, &u, &vh, &u))
    }

    fn check_orthonormal(&self, x: &[f64], v: &[f64], w: &[f64]) -> Result<()> {
        let g = self.fibre.metric(x)?;
        let (vv, ww, vw) = (metric::inner(&g, v, v), metric::inner(&g, w, w), metric::inner(&g, v, w));
        if (vv - 1.0).abs() > 1e-8 || (ww - 1.0).abs() > 1e-8 || vw.abs() > 1e-8 {
            return Err(Error::Domain("fibre vectors are not orthonormal".into()));
        }
        Ok(())
    }

    /// Max over the grid of `|L_ζ g − 2f′ g|`, with the Lie derivative by central differences.
    pub fn conformal_check(&self, grid: &[Vec<f64>]) -> Result<f64> {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for p in grid {
            let g = self.metric(p)?;
            let f = self.warping.f(p[0])?;
            let f1 = self.warping.df(p[0])?;
            let dg: Vec<DMatrix<f64>> = (0..n)
                .map(|c| {
                    let h = fd::step_for(p[c], fd::STEP1);
                    let mut a = p.clone();
                    let mut b = p.clone();
                    a[c] += h;
                    b[c] -= h;
                    Ok((self.metric_raw(&a)? - self.metric_raw(&b)?) / (2.0 * h))
                })
                .collect::<Result<_>>()?;
            let dzeta: Vec<f64> = (0..n)
                .map(|a| {
                    if a == 0 {
                        fd::derivative(|t| self.warping.f(t).unwrap_or(f64::NAN), p[0])
                    } else {
                        0.0
                    }
                })
                .collect();
            for a in 0..n {
                for b in 0..n {
                    let mut lie = f * dg[0][(a, b)];
                    lie += g[(0, b)] * dzeta[a] + g[(a, 0)] * dzeta[b];
                    worst = worst.max((lie - 2.0 * f1 * g[(a, b)]).abs());
                }
            }
        }
        Ok(worst)
    }

    fn metric_raw(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.n();
        let f = self.warping.f(p[0])?;
        let gf = self.fibre.metric(&p[1..])?;
        let mut g = DMatrix::zeros(n, n);
        g[(0, 0)] = -1.0;
        g.view_mut((1, 1), (n - 1, n - 1)).copy_from(&(gf * (f * f)));
        Ok(g)
    }

    /// Γ^t_ij = f f′ g_F,ij; Γ^i_tj = (f′/f) δ^i_j; Γ^i_jk = Γ^F.
    fn christoffel_raw(&self, p: &[f64]) -> Result<Christoffel> {
        let n = self.n();
        let x = &p[1..];
        let f = self.warping.f(p[0])?;
        let f1 = self.warping.df(p[0])?;
        let gf = self.fibre.metric(x)?;
        let cf = self.fibre.christoffel(x)?;
        let mut gam = Christoffel::zeros(n);
        for i in 0..n - 1 {
            for j in i..n - 1 {
                gam.set(0, 1 + i, 1 + j, f * f1 * gf[(i, j)]);
            }
            gam.set(1 + i, 0, 1 + i, f1 / f);
            for j in 0..n - 1 {
                for k in j..n - 1 {
                    gam.set(1 + i, 1 + j, 1 + k, cf.get(i, j, k));
                }
            }
        }
        Ok(gam)
    }
}

impl ChartMetric for GrwSpace {
    fn dim(&self) -> usize {
        self.n()
    }

    fn metric(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.warping.check(p[0])?;
        self.metric_raw(p)
    }

    fn christoffel(&self, p: &[f64]) -> Result<Christoffel> {
        self.warping.check(p[0])?;
        self.christoffel_raw(p)
    }
}

#[cfg(test)]
mod tests;
