//! Constant-curvature fibres in a geodesic polar chart `(r, θ_1, …, θ_{m−1})` with metric
//! `dr² + sn_k(r)² g_{S^{m−1}}`, and their closed forms through the standard embedding
//! (sphere in ℝ^{m+1}, hyperboloid in ℝ^{1,m}).

use crate::metric::{Christoffel, Riemann};
use nalgebra::{DMatrix, DVector};
use num_dual::{DualNum, DualVec64};
use nalgebra::Dyn;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceForm {
    pub m: usize,
    /// Sectional curvature, nonzero.
    pub k: f64,
}

/// Unit vector in ℝ^{len+1} from `len` hyperspherical angles.
pub fn unit_from_angles<D: DualNum<Primitive = f64>>(angles: &[D]) -> Vec<D> {
    let len = angles.len();
    let mut out = Vec::with_capacity(len + 1);
    let mut prod = D::from(1.0);
    for a in angles {
        out.push(prod.clone() * a.cos());
        prod = prod * a.sin();
    }
    out.push(prod);
    out
}

/// Inverse of `unit_from_angles`; `u` need not be normalised.
pub fn angles_from_unit(u: &[f64]) -> Vec<f64> {
    let len = u.len() - 1;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        if i + 1 == len {
            out.push(u[len].atan2(u[len - 1]));
        } else {
            let tail = u[i + 1..].iter().map(|x| x * x).sum::<f64>().sqrt();
            out.push(tail.atan2(u[i]));
        }
    }
    out
}

impl SpaceForm {
    pub fn radius(&self) -> f64 {
        1.0 / self.k.abs().sqrt()
    }

    pub fn is_sphere(&self) -> bool {
        self.k > 0.0
    }

    pub fn sn(&self, r: f64) -> f64 {
        let rr = self.radius();
        if self.is_sphere() {
            rr * (r / rr).sin()
        } else {
            rr * (r / rr).sinh()
        }
    }

    /// sn′/sn.
    pub fn ct(&self, r: f64) -> f64 {
        let rr = self.radius();
        if self.is_sphere() {
            1.0 / (rr * (r / rr).tan())
        } else {
            1.0 / (rr * (r / rr).tanh())
        }
    }

    /// Ambient Lorentz (−,+,…) or Euclidean inner product.
    pub fn ambient_dot<D: DualNum<Primitive = f64>>(&self, a: &[D], b: &[D]) -> D {
        let mut s = a[0].clone() * b[0].clone();
        if !self.is_sphere() {
            s = -s;
        }
        for i in 1..a.len() {
            s += a[i].clone() * b[i].clone();
        }
        s
    }

    /// Chart → ambient.
    pub fn embed<D: DualNum<Primitive = f64>>(&self, x: &[D]) -> Vec<D> {
        let rr = self.radius();
        let rho = x[0].clone() / rr;
        let (c, s) = if self.is_sphere() { (rho.cos(), rho.sin()) } else { (rho.cosh(), rho.sinh()) };
        let omega = if self.m == 1 { vec![D::from(1.0)] } else { unit_from_angles(&x[1..]) };
        let mut out = Vec::with_capacity(self.m + 1);
        out.push(c * rr);
        for w in omega {
            out.push(s.clone() * w * rr);
        }
        out
    }

    /// Ambient → chart.
    pub fn chart(&self, p: &[f64]) -> Vec<f64> {
        let rr = self.radius();
        if self.m == 1 {
            let r = if self.is_sphere() { rr * p[1].atan2(p[0]) } else { rr * (p[1] / rr).asinh() };
            return vec![r];
        }
        let tail = &p[1..];
        let nt = tail.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = if self.is_sphere() { rr * nt.atan2(p[0]) } else { rr * (nt / rr).asinh() };
        let mut out = vec![r];
        out.extend(angles_from_unit(tail));
        out
    }

    pub fn embed_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let xv = DVector::from_column_slice(x);
        let (_, j) = num_dual::jacobian(
            |z: DVector<DualVec64<Dyn>>| DVector::from_vec(self.embed(z.as_slice())),
            &xv,
        );
        j
    }

    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.metric_diag(x);
        DMatrix::from_diagonal(&DVector::from_vec(d))
    }

    fn metric_diag(&self, x: &[f64]) -> Vec<f64> {
        let mut d = vec![1.0; self.m];
        let mut prod = self.sn(x[0]).powi(2);
        for i in 1..self.m {
            d[i] = prod;
            prod *= x[i].sin().powi(2);
        }
        d
    }

    /// Analytic Levi-Civita connection of the diagonal polar metric.
    pub fn christoffel(&self, x: &[f64]) -> Christoffel {
        let m = self.m;
        let g = self.metric_diag(x);
        // dlog[a] = ∂_a ln g_bb for b > a (zero for b ≤ a)
        let mut dlog = vec![0.0; m];
        dlog[0] = 2.0 * self.ct(x[0]);
        for a in 1..m {
            dlog[a] = 2.0 / x[a].tan();
        }
        let mut gam = Christoffel::zeros(m);
        for a in 0..m {
            for b in (a + 1)..m {
                gam.set(b, a, b, 0.5 * dlog[a]);
                gam.set(a, b, b, -0.5 * dlog[a] * g[b] / g[a]);
            }
        }
        gam
    }

    pub fn riemann(&self, x: &[f64]) -> Riemann {
        let g = self.metric_diag(x);
        let m = self.m;
        let mut r = Riemann::zeros(m);
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                let v = self.k * g[a] * g[b];
                // R_abab = k(g_aa g_bb), R_abba = −k g_aa g_bb
                r.set(a, b, a, b, v);
                r.set(a, b, b, a, -v);
            }
        }
        r
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let xd: Vec<f64> = x.to_vec();
        self.distance_generic(&xd, y)
    }

    /// Distance to a fixed point `y`, generic so that jets can be taken in `x`.
    pub fn distance_generic<D: DualNum<Primitive = f64>>(&self, x: &[D], y: &[f64]) -> D {
        let rr = self.radius();
        let yd: Vec<D> = y.iter().map(|v| D::from(*v)).collect();
        let p = self.embed(x);
        let q = self.embed(&yd);
        let diff: Vec<D> = p.iter().zip(&q).map(|(a, b)| a.clone() - b.clone()).collect();
        if self.is_sphere() {
            let sum: Vec<D> = p.iter().zip(&q).map(|(a, b)| a.clone() + b.clone()).collect();
            let dn = self.ambient_dot(&diff, &diff).sqrt();
            let sn = self.ambient_dot(&sum, &sum).sqrt();
            dn.atan2(sn) * (2.0 * rr)
        } else {
            let dn = self.ambient_dot(&diff, &diff);
            let dn = if dn.re() > 0.0 { dn.sqrt() } else { D::from(0.0) };
            (dn / (2.0 * rr)).asinh() * (2.0 * rr)
        }
    }

    /// Ambient tangent vector at `x` → chart components.
    pub fn ambient_to_chart(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        let j = self.embed_jacobian(x);
        let mut ew = DVector::from_column_slice(w);
        if !self.is_sphere() {
            ew[0] = -ew[0];
        }
        let rhs = j.transpose() * ew;
        let g = self.metric_diag(x);
        rhs.iter().zip(&g).map(|(a, b)| a / b).collect()
    }

    pub fn chart_to_ambient(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let j = self.embed_jacobian(x);
        (j * DVector::from_column_slice(v)).iter().copied().collect()
    }

    /// Point and velocity of the geodesic `τ ↦ exp_x(τ v)` at τ.
    pub fn geodesic_at(&self, x: &[f64], v: &[f64], tau: f64) -> (Vec<f64>, Vec<f64>) {
        let rr = self.radius();
        let p = self.embed(x);
        let vv = self.chart_to_ambient(x, v);
        let speed = self.ambient_dot(&vv, &vv).max(0.0).sqrt();
        if speed == 0.0 {
            return (x.to_vec(), vec![0.0; self.m]);
        }
        let th = tau * speed / rr;
        let (c, s, dc, ds) = if self.is_sphere() {
            (th.cos(), th.sin(), -th.sin(), th.cos())
        } else {
            (th.cosh(), th.sinh(), th.sinh(), th.cosh())
        };
        let y: Vec<f64> = (0..p.len()).map(|i| p[i] * c + rr * s * vv[i] / speed).collect();
        let dy: Vec<f64> = (0..p.len()).map(|i| p[i] * dc * speed / rr + ds * vv[i]).collect();
        let yc = self.chart(&y);
        let vel = self.ambient_to_chart(&yc, &dy);
        (yc, vel)
    }

    /// Initial velocity of the minimising geodesic from `x` to `y` reaching `y` at τ = 1.
    pub fn log(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let rr = self.radius();
        let p = self.embed(x);
        let yd: Vec<f64> = y.to_vec();
        let q = self.embed(&yd);
        let d = self.distance(x, y);
        if d == 0.0 {
            return vec![0.0; self.m];
        }
        let pq = self.ambient_dot(&p, &q);
        let coef = if self.is_sphere() { pq / (rr * rr) } else { -pq / (rr * rr) };
        let w: Vec<f64> = (0..p.len()).map(|i| q[i] - coef * p[i]).collect();
        let wn = self.ambient_dot(&w, &w).max(0.0).sqrt();
        let amb: Vec<f64> = w.iter().map(|c| c * d / wn).collect();
        self.ambient_to_chart(x, &amb)
    }
}
