use super::{FibreKind, FibreModel, Unchecked};
use crate::error::{Error, Result};
use crate::metric::{self, ChartMetric};
use crate::numeric::ode::{self, OdeOptions, Solution, Termination};
use nalgebra::{DMatrix, DVector};

/// Samples of a geodesic at requested parameters.
#[derive(Clone, Debug)]
pub struct GeodesicRecord {
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

/// Jacobi field samples in chart components; `derivs` are covariant derivatives along the curve.
#[derive(Clone, Debug)]
pub struct JacobiSamples {
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub fields: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
}

const SHOOT_MAX_ITER: usize = 50;
const SHOOT_TOL: f64 = 1e-9;

fn termination_error(sol: &Solution) -> Option<Error> {
    match sol.termination {
        Termination::Reached => None,
        Termination::Stopped { t } => Some(Error::ChartExit { param: t }),
        _ => Some(Error::ChartExit { param: sol.t_end() }),
    }
}

impl FibreModel {
    fn geodesic_ode(&self, x: &[f64], v: &[f64], s_end: f64) -> Result<Solution> {
        self.check(x)?;
        let m = self.dim;
        let view = Unchecked(self);
        let mut y0 = x.to_vec();
        y0.extend_from_slice(v);
        let sol = ode::integrate(
            |_, y, dy| {
                let (p, vel) = y.split_at(m);
                dy[..m].copy_from_slice(vel);
                match view.christoffel(p) {
                    Ok(g) => {
                        let acc = g.contract(vel, vel);
                        for i in 0..m {
                            dy[m + i] = -acc[i];
                        }
                    }
                    Err(_) => dy[m..].iter_mut().for_each(|d| *d = f64::NAN),
                }
            },
            0.0,
            &y0,
            s_end,
            &OdeOptions::default(),
            |_, y| !self.in_domain(&y[..m]),
        );
        match termination_error(&sol) {
            Some(e) => Err(e),
            None => Ok(sol),
        }
    }

    /// Closed-form point and velocity of τ ↦ exp_x(τv).
    fn geodesic_closed(&self, x: &[f64], v: &[f64], tau: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            FibreKind::Euclidean => ((0..self.dim).map(|i| x[i] + tau * v[i]).collect(), v.to_vec()),
            FibreKind::SpaceForm(sf) => sf.geodesic_at(x, v, tau),
            FibreKind::Product(fs) => {
                let mut p = Vec::with_capacity(self.dim);
                let mut w = Vec::with_capacity(self.dim);
                for (f, (o, n)) in fs.iter().zip(Self::blocks(fs)) {
                    let (pi, wi) = f.geodesic_closed(&x[o..o + n], &v[o..o + n], tau);
                    p.extend(pi);
                    w.extend(wi);
                }
                (p, w)
            }
            _ => unreachable!("no closed form"),
        }
    }

    /// Geodesic from `x` with initial velocity `v`, sampled at `params` (all ≥ 0).
    pub fn geodesic(&self, x: &[f64], v: &[f64], params: &[f64]) -> Result<GeodesicRecord> {
        self.check(x)?;
        if v.iter().all(|c| *c == 0.0) {
            return Err(Error::Degenerate("zero initial velocity".into()));
        }
        let mut rec = GeodesicRecord { params: params.to_vec(), points: Vec::new(), velocities: Vec::new() };
        if self.closed_form() {
            for &s in params {
                let (p, w) = self.geodesic_closed(x, v, s);
                if !self.in_domain(&p) {
                    return Err(Error::ChartExit { param: s });
                }
                rec.points.push(p);
                rec.velocities.push(w);
            }
            return Ok(rec);
        }
        let s_max = params.iter().copied().fold(0.0, f64::max);
        let sol = self.geodesic_ode(x, v, s_max)?;
        for &s in params {
            let y = sol.sample(s).ok_or(Error::ChartExit { param: s })?;
            rec.points.push(y[..self.dim].to_vec());
            rec.velocities.push(y[self.dim..].to_vec());
        }
        Ok(rec)
    }

    /// Numerically integrated geodesic regardless of closed forms (oracle route).
    pub fn geodesic_numeric(&self, x: &[f64], v: &[f64], params: &[f64]) -> Result<GeodesicRecord> {
        let s_max = params.iter().copied().fold(0.0, f64::max);
        let sol = self.geodesic_ode(x, v, s_max)?;
        let mut rec = GeodesicRecord { params: params.to_vec(), points: Vec::new(), velocities: Vec::new() };
        for &s in params {
            let y = sol.sample(s).ok_or(Error::ChartExit { param: s })?;
            rec.points.push(y[..self.dim].to_vec());
            rec.velocities.push(y[self.dim..].to_vec());
        }
        Ok(rec)
    }

    pub fn exp_map(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        if v.iter().all(|c| *c == 0.0) {
            return Ok(x.to_vec());
        }
        if self.closed_form() {
            let (p, _) = self.geodesic_closed(x, v, 1.0);
            self.check(&p).map_err(|_| Error::ChartExit { param: 1.0 })?;
            return Ok(p);
        }
        let sol = self.geodesic_ode(x, v, 1.0)?;
        Ok(sol.y_end()[..self.dim].to_vec())
    }

    fn log_closed(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match &self.kind {
            FibreKind::Euclidean => (0..self.dim).map(|i| y[i] - x[i]).collect(),
            FibreKind::SpaceForm(sf) => sf.log(x, y),
            FibreKind::Product(fs) => {
                let mut out = Vec::with_capacity(self.dim);
                for (f, (o, n)) in fs.iter().zip(Self::blocks(fs)) {
                    out.extend(f.log_closed(&x[o..o + n], &y[o..o + n]));
                }
                out
            }
            _ => unreachable!("no closed form"),
        }
    }

    /// Initial velocity `v` with `exp_x(v) = y`; damped Newton shooting when no closed form exists.
    pub fn log_map(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        self.check(y)?;
        if self.closed_form() {
            let v = self.log_closed(x, y);
            if self.norm(x, &v)? > self.normal_radius {
                return Err(Error::OutsideChart("points not in a common normal neighbourhood".into()));
            }
            return Ok(v);
        }
        self.shoot(x, y)
    }

    fn shoot(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim;
        let resid = |v: &[f64]| -> Option<Vec<f64>> {
            let p = self.exp_map(x, v).ok()?;
            Some((0..m).map(|i| p[i] - y[i]).collect())
        };
        let norm = |r: &[f64]| r.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let mut v: Vec<f64> = (0..m).map(|i| y[i] - x[i]).collect();
        let mut r = resid(&v).ok_or(Error::Shooting { residual: f64::INFINITY })?;
        for _ in 0..SHOOT_MAX_ITER {
            let rn = norm(&r);
            if rn <= SHOOT_TOL {
                if self.norm(x, &v)? > self.normal_radius {
                    return Err(Error::OutsideChart("shooting target beyond normal radius".into()));
                }
                return Ok(v);
            }
            let scale = v.iter().map(|c| c.abs()).fold(1e-3, f64::max);
            let h = 1e-6 * scale;
            let mut jac = DMatrix::zeros(m, m);
            for j in 0..m {
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[j] += h;
                vm[j] -= h;
                let rp = resid(&vp).ok_or(Error::Shooting { residual: rn })?;
                let rm = resid(&vm).ok_or(Error::Shooting { residual: rn })?;
                for i in 0..m {
                    jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
                }
            }
            let step = jac
                .lu()
                .solve(&(-DVector::from_column_slice(&r)))
                .ok_or(Error::Shooting { residual: rn })?;
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-4 {
                let cand: Vec<f64> = (0..m).map(|i| v[i] + lambda * step[i]).collect();
                if let Some(rc) = resid(&cand) {
                    if norm(&rc) < rn {
                        v = cand;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::Shooting { residual: rn });
            }
        }
        Err(Error::Shooting { residual: norm(&r) })
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if self.closed_form() {
            self.check(x)?;
            self.check(y)?;
            let xd = x.to_vec();
            return Ok(self.distance_generic(&xd, y).expect("closed form"));
        }
        let v = self.log_map(x, y)?;
        self.norm(x, &v)
    }

    /// Position field P^F_x of the vertex `xs`: d(xs,x) times the unit radial velocity at x.
    pub fn position_field(&self, xs: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let back = self.log_map(x, xs)?;
        Ok(back.iter().map(|c| -c).collect())
    }

    fn frame_ode(
        &self,
        x: &[f64],
        v: &[f64],
        s_end: f64,
        a0: &DMatrix<f64>,
        a0p: &DMatrix<f64>,
    ) -> Result<(Solution, Vec<Vec<f64>>)> {
        self.check(x)?;
        let m = self.dim;
        let p = a0.ncols();
        let frame = self.orthonormal_frame(x)?;
        let view = Unchecked(self);
        let mut y0 = x.to_vec();
        y0.extend_from_slice(v);
        for e in &frame {
            y0.extend_from_slice(e);
        }
        y0.extend(a0.iter());
        y0.extend(a0p.iter());
        let off_e = 2 * m;
        let off_a = off_e + m * m;
        let off_ap = off_a + m * p;
        let sol = ode::integrate(
            |_, y, dy| {
                let pos = &y[..m];
                let vel = &y[m..2 * m];
                let (gam, riem) = match (view.christoffel(pos), self.riemann_unchecked(pos)) {
                    (Ok(g), Ok(r)) => (g, r),
                    _ => {
                        dy.iter_mut().for_each(|d| *d = f64::NAN);
                        return;
                    }
                };
                dy[..m].copy_from_slice(vel);
                let acc = gam.contract(vel, vel);
                for i in 0..m {
                    dy[m + i] = -acc[i];
                }
                let es: Vec<&[f64]> = (0..m).map(|i| &y[off_e + i * m..off_e + (i + 1) * m]).collect();
                for i in 0..m {
                    let de = gam.contract(vel, es[i]);
                    for k in 0..m {
                        dy[off_e + i * m + k] = -de[k];
                    }
                }
                let kmat = riem.jacobi_matrix(vel);
                let kf = DMatrix::from_fn(m, m, |i, j| {
                    let mut s = 0.0;
                    for a in 0..m {
                        for c in 0..m {
                            s += es[i][a] * kmat[(a, c)] * es[j][c];
                        }
                    }
                    s
                });
                let a = DMatrix::from_column_slice(m, p, &y[off_a..off_ap]);
                let ka = kf * a;
                dy[off_a..off_ap].copy_from_slice(&y[off_ap..off_ap + m * p]);
                for (k, val) in ka.iter().enumerate() {
                    dy[off_ap + k] = -val;
                }
            },
            0.0,
            &y0,
            s_end,
            &OdeOptions::default(),
            |_, y| !self.in_domain(&y[..m]),
        );
        if let Some(e) = termination_error(&sol) {
            return Err(e);
        }
        Ok((sol, frame))
    }

    /// Solves J″ + R(J,γ′)γ′ = 0 along the geodesic from `x` with velocity `v`
    /// by reduction to a parallel orthonormal frame.
    pub fn jacobi_transport(&self, x: &[f64], v: &[f64], j0: &[f64], j0p: &[f64], params: &[f64]) -> Result<JacobiSamples> {
        let m = self.dim;
        let g = self.metric(x)?;
        let frame = self.orthonormal_frame(x)?;
        let a0 = DMatrix::from_fn(m, 1, |i, _| metric::inner(&g, j0, &frame[i]));
        let a0p = DMatrix::from_fn(m, 1, |i, _| metric::inner(&g, j0p, &frame[i]));
        let s_max = params.iter().copied().fold(0.0, f64::max);
        let (sol, _) = self.frame_ode(x, v, s_max, &a0, &a0p)?;
        let mut out = JacobiSamples { params: params.to_vec(), points: vec![], fields: vec![], derivs: vec![] };
        for &s in params {
            let y = sol.sample(s).ok_or(Error::ChartExit { param: s })?;
            let off_e = 2 * m;
            let off_a = off_e + m * m;
            let mut jf = vec![0.0; m];
            let mut jd = vec![0.0; m];
            for i in 0..m {
                let e = &y[off_e + i * m..off_e + (i + 1) * m];
                for k in 0..m {
                    jf[k] += y[off_a + i] * e[k];
                    jd[k] += y[off_a + m + i] * e[k];
                }
            }
            out.points.push(y[..m].to_vec());
            out.fields.push(jf);
            out.derivs.push(jd);
        }
        Ok(out)
    }

    /// Returns (g(∇_w P^F, w), ½ d/ds g(J,J)|_{s=1}) for the Jacobi field along the geodesic
    /// from `xs` to `x` with J(0) = 0 and J(1) = w.
    pub fn check_lemma_position_jacobi(&self, xs: &[f64], x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
        let m = self.dim;
        let gx = self.metric(x)?;
        let nabla = metric::covariant_derivative(self, x, w, |y| self.position_field(xs, y))?;
        let lhs = metric::inner(&gx, &nabla, w);

        let v = self.log_map(xs, x)?;
        let a0 = DMatrix::zeros(m, m);
        let a0p = DMatrix::identity(m, m);
        let (sol, _) = self.frame_ode(xs, &v, 1.0, &a0, &a0p)?;
        let y = sol.y_end();
        let off_e = 2 * m;
        let off_a = off_e + m * m;
        let off_ap = off_a + m * m;
        let pos = &y[..m];
        let g1 = self.metric(pos)?;
        let wf = DVector::from_fn(m, |i, _| metric::inner(&g1, w, &y[off_e + i * m..off_e + (i + 1) * m]));
        let a1 = DMatrix::from_column_slice(m, m, &y[off_a..off_ap]);
        let a1p = DMatrix::from_column_slice(m, m, &y[off_ap..off_ap + m * m]);
        let c = a1.lu().solve(&wf).ok_or_else(|| Error::Degenerate("x conjugate to the vertex".into()))?;
        let rhs = wf.dot(&(a1p * c));
        Ok((lhs, rhs))
    }
}
