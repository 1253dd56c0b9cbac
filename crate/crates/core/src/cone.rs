//! Local nullcones `C^±_{p_*}` of a GRW space.

use crate::error::{Error, Result};
use crate::fibre::{DistanceField, FibreModel};
use crate::field::{Composed, FieldRef, Outer};
use crate::grw::{GrwSpace, Orientation, Quadrature};
use crate::metric;
use crate::nullhyp::GraphHypersurface;
use crate::numeric::richardson;
use crate::twist::TwistedDecomposition;
use std::sync::Arc;

pub const DEFAULT_VERTEX_COLLAR: f64 = 1e-3;
/// Acceptance of an extrapolated limit.
pub const LIMIT_TOL: f64 = 1e-4;
/// Acceptance of `1 − cos²` between `∇h` and `P^F`.
pub const ANGLE_TOL: f64 = 1e-8;

#[derive(Clone)]
pub struct NullCone {
    pub space: Arc<GrwSpace>,
    pub ts: f64,
    pub xs: Vec<f64>,
    pub orientation: Orientation,
    pub vertex_collar: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentVerdict {
    pub contained: bool,
    /// `(t_*, x_*)` when contained.
    pub vertex: Option<Vec<f64>>,
    pub angle_residual: f64,
    pub limit_residual: f64,
    pub failures: Vec<String>,
}

impl ContainmentVerdict {
    fn finish(mut self, vertex: Vec<f64>) -> Self {
        self.contained = self.failures.is_empty();
        self.vertex = if self.contained { Some(vertex) } else { None };
        self
    }
}

/// Outer map `d ↦ C^{-1}(±d; t_*)` with its first two derivatives.
pub fn cone_profile(space: Arc<GrwSpace>, ts: f64, orientation: Orientation) -> Outer {
    let sign = orientation.sign();
    Arc::new(move |d: f64| {
        let w = &space.warping;
        let t = w.c_inv(ts, sign * d)?;
        let f = w.f(t)?;
        let df = w.df(t)?;
        Ok((t, sign * f, f * df))
    })
}

impl NullCone {
    pub fn new(space: Arc<GrwSpace>, ts: f64, xs: Vec<f64>, orientation: Orientation) -> Result<Self> {
        space.warping.check(ts)?;
        space.fibre.check(&xs)?;
        Ok(NullCone { space, ts, xs, orientation, vertex_collar: DEFAULT_VERTEX_COLLAR })
    }

    pub fn vertex(&self) -> Vec<f64> {
        let mut p = vec![self.ts];
        p.extend_from_slice(&self.xs);
        p
    }

    fn fibre(&self) -> &FibreModel {
        &self.space.fibre
    }

    /// `σ C(t; t_*) − d_F(x_*, x)` and whether it vanishes within `tol` on the right side of `t_*`.
    pub fn contains(&self, p: &[f64], tol: f64) -> Result<(bool, f64)> {
        self.space.check(p)?;
        let sign = self.orientation.sign();
        let c = self.space.warping.c(self.ts, p[0])?;
        let d = self.fibre().distance(&self.xs, &p[1..])?;
        if d > self.fibre().normal_radius() {
            return Err(Error::OutsideChart("point beyond the normal neighbourhood of the vertex".into()));
        }
        let residual = sign * c - d;
        Ok((residual.abs() <= tol && sign * (p[0] - self.ts) > 0.0, residual))
    }

    /// `h(x) = C^{-1}(±d_F(x_*, x); t_*)`.
    pub fn graph_field(&self) -> FieldRef {
        let dist: FieldRef = Arc::new(DistanceField { fibre: self.fibre().clone(), center: self.xs.clone() });
        Arc::new(Composed::new(dist, cone_profile(self.space.clone(), self.ts, self.orientation)))
    }

    pub fn as_graph(&self) -> Result<GraphHypersurface> {
        GraphHypersurface::new(self.space.clone(), self.graph_field())
    }

    /// Whether `x` is outside the vertex collar.
    pub fn outside_collar(&self, x: &[f64]) -> Result<bool> {
        let d = self.fibre().distance(&self.xs, x)?;
        Ok(d >= self.vertex_collar)
    }

    /// Position field from the warping integrals:
    /// `P = (A/f) ∂_t + (A / (f² C)) P^F_x` with `A = ∫_{t_*}^t f`, `C = ∫_{t_*}^t 1/f`.
    pub fn position_field(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.space.check(p)?;
        let w = &self.space.warping;
        let t = p[0];
        let a = w.quad(Quadrature::A, self.ts, t)?;
        let c = w.quad(Quadrature::C, self.ts, t)?;
        if c.abs() < self.vertex_collar {
            return Err(Error::Degenerate("point inside the vertex collar".into()));
        }
        let f = w.f(t)?;
        let pf = self.fibre().position_field(&self.xs, &p[1..])?;
        let mut out = vec![a / f];
        out.extend(pf.iter().map(|v| v * a / (f * f * c)));
        Ok(out)
    }

    /// `s γ′(s)` at the point reached by the generator through `p` (affine parameter with `g(γ′,ζ) = ∓1`).
    pub fn position_field_geodesic(&self, p: &[f64]) -> Result<Vec<f64>> {
        let x = &p[1..];
        let v = self.fibre().log_map(&self.xs, x)?;
        let d = self.fibre().norm(&self.xs, &v)?;
        if d < self.vertex_collar {
            return Err(Error::Degenerate("point inside the vertex collar".into()));
        }
        let u: Vec<f64> = v.iter().map(|c| c / d).collect();
        let sign = self.orientation.sign();
        let s = sign * self.space.warping.quad(Quadrature::A, self.ts, p[0])?;
        let curve = self.space.null_geodesic_quadrature(self.ts, &self.xs, &u, self.orientation, &[s])?;
        Ok(curve.velocities[0].iter().map(|c| c * s).collect())
    }
}

/// `ρ(t) = (f′ + ct_k(C))/f²` of the nullcone with vertex time `t_*` in a RW space with fibre curvature `k`.
pub fn rw_cone_rho(k: f64, warping: &crate::grw::WarpingProfile, ts: f64, t: f64) -> Result<f64> {
    let c = warping.c(ts, t)?;
    if c == 0.0 {
        return Err(Error::Degenerate("vertex: C(t; t_*) = 0".into()));
    }
    let ct = if k > 0.0 {
        let r = k.sqrt();
        let arg = r * c;
        if (arg / std::f64::consts::PI).fract().abs() < 1e-14 {
            return Err(Error::Degenerate("cut point: √k C is a multiple of π".into()));
        }
        r / arg.tan()
    } else if k < 0.0 {
        let r = (-k).sqrt();
        r / (r * c).tanh()
    } else {
        1.0 / c
    };
    let (f, df, _) = warping.jet(t)?;
    Ok((df + ct) / (f * f))
}

/// Containment of a graph in the nullcone of `(t_*, x_*)`: `∇^F h ∥ P^F` on the grid and
/// `h → t_*` along radial geodesics into `x_*`.
pub fn containment_by_gradient(
    l: &GraphHypersurface,
    xs: &[f64],
    ts: f64,
    grid: &[Vec<f64>],
) -> Result<ContainmentVerdict> {
    let fib = &l.space.fibre;
    let mut verdict = ContainmentVerdict {
        contained: false,
        vertex: None,
        angle_residual: 0.0,
        limit_residual: 0.0,
        failures: vec![],
    };
    let mut directions = Vec::new();
    for x in grid {
        let loc = l.local(x)?;
        let pf = match fib.position_field(xs, x) {
            Ok(v) => v,
            Err(e) => {
                verdict.failures.push(format!("position field at {x:?}: {e}"));
                continue;
            }
        };
        let g = &loc.gf;
        let gg = metric::inner(g, loc.grad.as_slice(), loc.grad.as_slice());
        let pp = metric::inner(g, &pf, &pf);
        let gp = metric::inner(g, loc.grad.as_slice(), &pf);
        if pp <= 0.0 || gg <= 0.0 {
            verdict.failures.push(format!("degenerate direction at {x:?}"));
            continue;
        }
        let res = 1.0 - gp * gp / (gg * pp);
        verdict.angle_residual = verdict.angle_residual.max(res);
        let pn = pp.sqrt();
        directions.push(fib.log_map(xs, x).map(|v| v.iter().map(|c| c / pn).collect::<Vec<f64>>()));
    }
    if verdict.angle_residual > ANGLE_TOL {
        verdict.failures.push(format!("∇h is not radial: 1 − cos² = {:e}", verdict.angle_residual));
    }
    for dir in directions.into_iter().take(4) {
        let u = match dir {
            Ok(u) => u,
            Err(e) => {
                verdict.failures.push(format!("radial direction: {e}"));
                continue;
            }
        };
        let mut bad = None;
        let (lim, _) = richardson::extrapolate(
            |eps| {
                let v: Vec<f64> = u.iter().map(|c| c * eps).collect();
                match fib.exp_map(xs, &v).and_then(|y| l.h.value(&y)) {
                    Ok(val) => val,
                    Err(e) => {
                        bad = Some(e.to_string());
                        f64::NAN
                    }
                }
            },
            0.1,
            0.5,
            6,
        );
        if let Some(e) = bad {
            verdict.failures.push(format!("radial limit: {e}"));
            verdict.limit_residual = f64::INFINITY;
            continue;
        }
        verdict.limit_residual = verdict.limit_residual.max((lim - ts).abs());
    }
    if verdict.limit_residual > LIMIT_TOL {
        verdict.failures.push(format!("lim h = t_* fails by {:e}", verdict.limit_residual));
    }
    let mut vertex = vec![ts];
    vertex.extend_from_slice(xs);
    Ok(verdict.finish(vertex))
}

/// Containment of `{s = C(t; t_0)}` in a future (past) cone through the decomposition `D`:
/// `μ → 0` at the lower (upper) end and the matching `t_*` exists in `I`.
pub fn containment_by_twist(
    space: &GrwSpace,
    d: &TwistedDecomposition,
    t0: f64,
    orientation: Orientation,
    leaf_samples: &[Vec<f64>],
) -> Result<ContainmentVerdict> {
    let mut verdict = ContainmentVerdict {
        contained: false,
        vertex: None,
        angle_residual: 0.0,
        limit_residual: 0.0,
        failures: vec![],
    };
    let (end, inward) = match orientation {
        Orientation::Future => (d.a, 1.0),
        Orientation::Past => (d.b, -1.0),
    };
    if !end.is_finite() {
        verdict.failures.push("base interval is unbounded on the vertex side".into());
    } else {
        let span = (d.b - d.a).min(1.0);
        for z in leaf_samples {
            let mut bad = None;
            let (lim, _) = richardson::extrapolate(
                |eps| {
                    let mut q = vec![end + inward * eps];
                    q.extend_from_slice(z);
                    d.mu.value(&q).unwrap_or_else(|e| {
                        bad = Some(e.to_string());
                        f64::NAN
                    })
                },
                0.25 * span,
                0.5,
                6,
            );
            if let Some(e) = bad {
                verdict.failures.push(format!("μ near the end: {e}"));
                verdict.limit_residual = f64::INFINITY;
                continue;
            }
            verdict.limit_residual = verdict.limit_residual.max(lim.abs());
        }
        if verdict.limit_residual > LIMIT_TOL {
            verdict.failures.push(format!("μ does not vanish at the end: {:e}", verdict.limit_residual));
        }
    }
    let ts = if end.is_finite() {
        match space.warping.c_inv(t0, end) {
            Ok(t) => Some(t),
            Err(e) => {
                verdict.failures.push(format!("no vertex time: {e}"));
                None
            }
        }
    } else {
        None
    };
    let vertex = match (ts, &d.chart) {
        (Some(t), Some(chart)) => {
            let mut v = vec![t];
            v.extend(chart.limit_point(end, inward)?);
            v
        }
        (Some(t), None) => vec![t],
        _ => vec![],
    };
    Ok(verdict.finish(vertex))
}

/// Vertex `(t_*, x_*)` of an umbilic null graph in `I ×_f S^{n−1}` with `∫_I 1/f > π`.
pub fn classify_umbilic_sphere_fibre(
    l: &GraphHypersurface,
    x0: &[f64],
    grid: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<f64>> {
    let space = &l.space;
    if !matches!(space.fibre.space_form_data(), Some(sf) if sf.is_sphere() && (sf.k - 1.0).abs() < 1e-12) {
        return Err(Error::Hypothesis("fibre is not the unit round sphere".into()));
    }
    let n = space.n();
    if n <= 3 {
        return Err(Error::Hypothesis(format!("dimension {n} ≤ 3")));
    }
    let total = space.warping.total_c();
    if !(total > std::f64::consts::PI + 1e-9) {
        return Err(Error::Hypothesis(format!("∫_I 1/f = {total} does not exceed π")));
    }
    let report = l.umbilicity_test(grid, tol, 0)?;
    if !report.umbilic {
        return Err(Error::NotUmbilic { residual: report.max_residual });
    }
    let t0 = l.h.value(x0)?;
    let warped = crate::twist::fit_sphere_decomposition(l, x0)?;
    for orientation in [Orientation::Future, Orientation::Past] {
        let v = containment_by_twist(space, &warped, t0, orientation, &[warped.anchor_z.clone()])?;
        if v.contained {
            return v.vertex.ok_or_else(|| Error::Degenerate("missing vertex".into()));
        }
    }
    Err(Error::Degenerate("no cone vertex found".into()))
}
