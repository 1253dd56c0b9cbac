//! Chart-level (pseudo-)Riemannian metrics, Levi-Civita connection and curvature.
//!
//! Conventions: `Γ^a_bc` is stored at `[a][b][c]`; `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`,
//! `R_abcd = g(R(∂_c,∂_d)∂_b, ∂_a)`, so the sectional curvature of the unit sphere is +1.

use crate::error::{Error, Result};
use crate::field::Jet;
use crate::numeric::fd;
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Christoffel { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    /// Sets Γ^a_bc and Γ^a_cb.
    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let n = self.n;
        self.data[(a * n + b) * n + c] = v;
        self.data[(a * n + c) * n + b] = v;
    }

    /// Γ^a_bc u^b v^c.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|a| {
                let mut s = 0.0;
                for b in 0..n {
                    if u[b] == 0.0 {
                        continue;
                    }
                    for c in 0..n {
                        s += self.get(a, b, c) * u[b] * v[c];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    r = r.max((self.get(a, b, c) - self.get(a, c, b)).abs());
                }
            }
        }
        r
    }
}

/// Fully covariant Riemann tensor `R_abcd`.
#[derive(Clone, Debug)]
pub struct Riemann {
    n: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn zeros(n: usize) -> Self {
        Riemann { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d] = v;
    }

    /// R(u, v, w, z) = R_abcd u^a v^b w^c z^d.
    pub fn eval(&self, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for a in 0..n {
            if u[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if v[b] == 0.0 {
                    continue;
                }
                for c in 0..n {
                    if w[c] == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        s += self.get(a, b, c, d) * u[a] * v[b] * w[c] * z[d];
                    }
                }
            }
        }
        s
    }

    /// Matrix K with `g(R(X,u)u, Y) = Yᵀ K X`.
    pub fn jacobi_matrix(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |a, c| {
            let mut s = 0.0;
            for b in 0..n {
                for d in 0..n {
                    s += self.get(a, b, c, d) * u[b] * u[d];
                }
            }
            s
        })
    }

    /// Ric_bd = g^{ac} R_abcd.
    pub fn ricci(&self, ginv: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |b, d| {
            let mut s = 0.0;
            for a in 0..n {
                for c in 0..n {
                    s += ginv[(a, c)] * self.get(a, b, c, d);
                }
            }
            s
        })
    }

    pub fn max_abs_diff(&self, other: &Riemann) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

pub fn inner(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * u[i] * v[j];
        }
    }
    s
}

pub fn invert(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("metric is not invertible".into()))
}

pub trait ChartMetric: Send + Sync {
    fn dim(&self) -> usize;

    /// Metric components at `x`; errors outside the chart domain.
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        christoffel_fd(self, x)
    }

    fn riemann(&self, x: &[f64]) -> Result<Riemann> {
        riemann_from_connection(self, x)
    }
}

/// Levi-Civita connection from central differences of the metric components.
pub fn christoffel_fd<M: ChartMetric + ?Sized>(m: &M, x: &[f64]) -> Result<Christoffel> {
    let n = m.dim();
    let g = m.metric(x)?;
    let ginv = invert(&g)?;
    let mut dg = Vec::with_capacity(n);
    let mut y = x.to_vec();
    for c in 0..n {
        let h = fd::step_for(x[c], fd::STEP1);
        y[c] = x[c] + h;
        let gp = m.metric(&y)?;
        y[c] = x[c] - h;
        let gm = m.metric(&y)?;
        y[c] = x[c];
        dg.push((gp - gm) / (2.0 * h));
    }
    Ok(christoffel_from_dg(&ginv, &dg))
}

/// Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_db − ∂_d g_bc), with `dg[k] = ∂_k g`.
pub fn christoffel_from_dg(ginv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Christoffel {
    let n = ginv.nrows();
    let mut gam = Christoffel::zeros(n);
    for b in 0..n {
        for c in b..n {
            let low: Vec<f64> = (0..n)
                .map(|d| 0.5 * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]))
                .collect();
            for a in 0..n {
                let v: f64 = (0..n).map(|d| ginv[(a, d)] * low[d]).sum();
                gam.set(a, b, c, v);
            }
        }
    }
    gam
}

/// Curvature from central differences of the (analytic) connection.
pub fn riemann_from_connection<M: ChartMetric + ?Sized>(m: &M, x: &[f64]) -> Result<Riemann> {
    let n = m.dim();
    let g = m.metric(x)?;
    let gam = m.christoffel(x)?;
    let mut dgam = Vec::with_capacity(n);
    let mut y = x.to_vec();
    for c in 0..n {
        let h = fd::step_for(x[c], fd::STEP1);
        y[c] = x[c] + h;
        let gp = m.christoffel(&y)?;
        y[c] = x[c] - h;
        let gm = m.christoffel(&y)?;
        y[c] = x[c];
        let mut d = Christoffel::zeros(n);
        for i in 0..d.data.len() {
            d.data[i] = (gp.data[i] - gm.data[i]) / (2.0 * h);
        }
        dgam.push(d);
    }
    Ok(riemann_from_parts(&g, &gam, &dgam))
}

/// R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb, then lowered.
pub fn riemann_from_parts(g: &DMatrix<f64>, gam: &Christoffel, dgam: &[Christoffel]) -> Riemann {
    let n = g.nrows();
    let mut up = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgam[c].get(a, d, b) - dgam[d].get(a, c, b);
                    for e in 0..n {
                        v += gam.get(a, c, e) * gam.get(e, d, b) - gam.get(a, d, e) * gam.get(e, c, b);
                    }
                    up[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    let mut r = Riemann::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v: f64 = (0..n).map(|e| g[(a, e)] * up[((e * n + b) * n + c) * n + d]).sum();
                    r.set(a, b, c, d, v);
                }
            }
        }
    }
    r
}

/// Curvature from second differences of the metric (used when the connection is itself
/// a finite difference):
/// R_abcd = ½(∂_b∂_c g_ad + ∂_a∂_d g_bc − ∂_a∂_c g_bd − ∂_b∂_d g_ac) + g_ef(Γ^e_bc Γ^f_ad − Γ^e_bd Γ^f_ac).
pub fn riemann_from_metric<M: ChartMetric + ?Sized>(m: &M, x: &[f64]) -> Result<Riemann> {
    let n = m.dim();
    let g = m.metric(x)?;
    let gam = christoffel_fd(m, x)?;
    let mut ddg = vec![DMatrix::<f64>::zeros(n, n); n * n];
    let mut y = x.to_vec();
    for i in 0..n {
        let hi = fd::step_for(x[i], fd::STEP2);
        y[i] = x[i] + hi;
        let gp = m.metric(&y)?;
        y[i] = x[i] - hi;
        let gm = m.metric(&y)?;
        y[i] = x[i];
        ddg[i * n + i] = (gp - &g * 2.0 + gm) / (hi * hi);
        for j in 0..i {
            let hj = fd::step_for(x[j], fd::STEP2);
            let mut at = |si: f64, sj: f64| -> Result<DMatrix<f64>> {
                y[i] = x[i] + si * hi;
                y[j] = x[j] + sj * hj;
                let v = m.metric(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let v = (at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * hi * hj);
            ddg[i * n + j] = v.clone();
            ddg[j * n + i] = v;
        }
    }
    let dd = |p: usize, q: usize, r: usize, s: usize| ddg[p * n + q][(r, s)];
    let mut out = Riemann::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = 0.5 * (dd(b, c, a, d) + dd(a, d, b, c) - dd(a, c, b, d) - dd(b, d, a, c));
                    for e in 0..n {
                        for f in 0..n {
                            v += g[(e, f)] * (gam.get(e, b, c) * gam.get(f, a, d) - gam.get(e, b, d) * gam.get(f, a, c));
                        }
                    }
                    out.set(a, b, c, d, v);
                }
            }
        }
    }
    Ok(out)
}

/// A view of a metric whose connection and curvature come purely from finite differences
/// of the metric components. Used as an independent oracle for analytic connections.
pub struct FdView<'a, M: ?Sized>(pub &'a M);

impl<M: ChartMetric + ?Sized> ChartMetric for FdView<'_, M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.0.metric(x)
    }

    fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        christoffel_fd(self.0, x)
    }

    fn riemann(&self, x: &[f64]) -> Result<Riemann> {
        riemann_from_metric(self.0, x)
    }
}

/// Metric gradient (sharp of the differential).
pub fn gradient_of(g: &DMatrix<f64>, dh: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(invert(g)? * dh)
}

/// Covariant Hessian `∂_i∂_j h − Γ^k_ij ∂_k h`.
pub fn covariant_hessian(jet: &Jet, gam: &Christoffel) -> DMatrix<f64> {
    let n = jet.grad.len();
    DMatrix::from_fn(n, n, |i, j| {
        let mut v = jet.hess[(i, j)];
        for k in 0..n {
            v -= gam.get(k, i, j) * jet.grad[k];
        }
        v
    })
}

/// g(R(u,v)v,u) / (|u|²|v|² − g(u,v)²).
pub fn sectional_from(r: &Riemann, g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> Result<f64> {
    let uu = inner(g, u, u);
    let vv = inner(g, v, v);
    let uv = inner(g, u, v);
    let gram = uu * vv - uv * uv;
    if gram.abs() <= 1e-12 * (uu.abs() * vv.abs()).max(1e-300) {
        return Err(Error::Degenerate("plane vectors are linearly dependent".into()));
    }
    Ok(r.eval(u, v, u, v) / gram)
}

pub fn sectional_curvature<M: ChartMetric + ?Sized>(m: &M, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    let g = m.metric(x)?;
    let r = m.riemann(x)?;
    sectional_from(&r, &g, u, v)
}

/// Covariant derivative `∇_X V` of a vector field given as a chart map.
pub fn covariant_derivative<M, V>(m: &M, x: &[f64], dir: &[f64], field: V) -> Result<Vec<f64>>
where
    M: ChartMetric + ?Sized,
    V: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let h = fd::STEP1 * scale / norm;
    let xp: Vec<f64> = (0..n).map(|i| x[i] + h * dir[i]).collect();
    let xm: Vec<f64> = (0..n).map(|i| x[i] - h * dir[i]).collect();
    let vp = field(&xp)?;
    let vm = field(&xm)?;
    let v0 = field(x)?;
    let gam = m.christoffel(x)?;
    let corr = gam.contract(dir, &v0);
    Ok((0..n).map(|a| (vp[a] - vm[a]) / (2.0 * h) + corr[a]).collect())
}
