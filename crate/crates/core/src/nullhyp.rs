//! Graph hypersurfaces `{(h(x), x)}` of a GRW space and their null geometry.

use crate::error::{Error, Result};
use crate::field::{FieldRef, Jet};
use crate::grw::GrwSpace;
use crate::metric::{self, ChartMetric};
use crate::par;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

pub const DEFAULT_UMBILIC_TOL: f64 = 1e-6;
pub const SCREEN_PAIRS: usize = 8;

#[derive(Clone)]
pub struct GraphHypersurface {
    pub space: Arc<GrwSpace>,
    pub h: FieldRef,
}

/// Everything needed at one graph point: t = h(x), warping jet at t, fibre metric, ∇^F h, Hess^F h.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub x: Vec<f64>,
    pub t: f64,
    pub f: f64,
    pub df: f64,
    pub gf: DMatrix<f64>,
    pub jet: Jet,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl LocalData {
    pub fn point(&self) -> Vec<f64> {
        let mut p = vec![self.t];
        p.extend_from_slice(&self.x);
        p
    }

    pub fn grad_norm(&self) -> f64 {
        metric::inner(&self.gf, self.grad.as_slice(), self.grad.as_slice()).max(0.0).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct NullGraphReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Clone, Debug)]
pub struct UmbilicSample {
    pub x: Vec<f64>,
    pub t: f64,
    pub rho: f64,
    pub mean_curvature: f64,
    /// Spectral norm of `B − ρ g` on g-unit screen vectors.
    pub residual: f64,
    /// Largest `|B(X,Y) − ρ g(X,Y)|` over the seeded random unit pairs.
    pub pair_residual: f64,
    /// `|H − H'|` with `H'` the trace over a randomly rotated screen frame.
    pub frame_spread: f64,
}

#[derive(Clone, Debug)]
pub struct UmbilicityReport {
    pub samples: Vec<UmbilicSample>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub umbilic: bool,
}

impl UmbilicityReport {
    pub fn rho(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rho).collect()
    }
}

impl GraphHypersurface {
    pub fn new(space: Arc<GrwSpace>, h: FieldRef) -> Result<Self> {
        if h.dim() != space.fibre.dim() {
            return Err(Error::Config(format!(
                "graph function has {} variables, fibre has dimension {}",
                h.dim(),
                space.fibre.dim()
            )));
        }
        Ok(GraphHypersurface { space, h })
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn local(&self, x: &[f64]) -> Result<LocalData> {
        let fib = &self.space.fibre;
        fib.check(x)?;
        let jet = self.h.jet(x)?;
        let t = jet.value;
        self.space.warping.check(t)?;
        let f = self.space.warping.f(t)?;
        let df = self.space.warping.df(t)?;
        let gf = fib.metric(x)?;
        let grad = metric::gradient_of(&gf, &jet.grad)?;
        let hess = fib.hessian_from_jet(&jet, x)?;
        Ok(LocalData { x: x.to_vec(), t, f, df, gf, jet, grad, hess })
    }

    pub fn point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut p = vec![self.h.value(x)?];
        p.extend_from_slice(x);
        Ok(p)
    }

    /// `|∇^F h|_F − f∘h` at each grid point.
    pub fn validate_null_graph(&self, grid: &[Vec<f64>]) -> Result<NullGraphReport> {
        let residuals = par::try_map(grid, |x| {
            let l = self.local(x)?;
            Ok::<_, Error>((l.grad_norm() - l.f).abs())
        })?;
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Ok(NullGraphReport { residuals, max_residual })
    }

    /// `|∇^F_{∇h}∇h − (f∘h)(f′∘h)∇h|_F` at each grid point.
    pub fn radial_identity_check(&self, grid: &[Vec<f64>]) -> Result<NullGraphReport> {
        let residuals = par::try_map(grid, |x| {
            let l = self.local(x)?;
            let ginv = metric::invert(&l.gf)?;
            let lhs = &ginv * (&l.hess * &l.grad);
            let r = lhs - &l.grad * (l.f * l.df);
            Ok::<_, Error>(metric::inner(&l.gf, r.as_slice(), r.as_slice()).max(0.0).sqrt())
        })?;
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Ok(NullGraphReport { residuals, max_residual })
    }

    /// `ξ = −(1/f)∂_t − ∇^F h / f³` at the graph point over `x`, in chart components `(t, x)`.
    pub fn xi_field(&self, x: &[f64]) -> Result<Vec<f64>> {
        let l = self.local(x)?;
        Ok(Self::xi_from(&l))
    }

    fn xi_from(l: &LocalData) -> Vec<f64> {
        let mut xi = vec![-1.0 / l.f];
        let c = l.f.powi(3);
        xi.extend(l.grad.iter().map(|g| -g / c));
        xi
    }

    /// Fibre vectors g_F-orthogonal to ∇^F h, orthonormal for `g = f² g_F`.
    pub fn screen_basis(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let l = self.local(x)?;
        Self::screen_from(&l)
    }

    fn screen_from(l: &LocalData) -> Result<Vec<Vec<f64>>> {
        let m = l.x.len();
        let gn = l.grad_norm();
        if gn <= 1e-12 {
            return Err(Error::Degenerate(format!("∇h vanishes at {:?}", l.x)));
        }
        let n: Vec<f64> = l.grad.iter().map(|c| c / gn).collect();
        let coords: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                e
            })
            .collect();
        let mut all = crate::fibre::gram_schmidt(&l.gf, &coords, &[n])?;
        all.truncate(m - 1);
        if all.len() != m - 1 {
            return Err(Error::Degenerate("screen frame construction failed".into()));
        }
        Ok(all.into_iter().map(|e| e.iter().map(|c| c / l.f).collect()).collect())
    }

    /// Screen matrix of `B` in a g-orthonormal frame.
    fn b_matrix(l: &LocalData, frame: &[Vec<f64>]) -> DMatrix<f64> {
        let k = frame.len();
        DMatrix::from_fn(k, k, |i, j| Self::b_from(l, &frame[i], &frame[j]))
    }

    fn b_from(l: &LocalData, xv: &[f64], yv: &[f64]) -> f64 {
        let gxy = l.f * l.f * metric::inner(&l.gf, xv, yv);
        let hxy = metric::inner(&l.hess, xv, yv);
        l.df / (l.f * l.f) * gxy + hxy / l.f
    }

    /// `B(X,Y) = (f′/f²) g(X,Y) + (1/f) Hess^F h(X,Y)` for screen vectors given by fibre components.
    pub fn second_fundamental_form(&self, x: &[f64], xv: &[f64], yv: &[f64]) -> Result<f64> {
        let l = self.local(x)?;
        Ok(Self::b_from(&l, xv, yv))
    }

    /// `B(X,Y) = −g(∇_X ξ, Y)` with `ξ` differentiated along the graph and the spacetime connection.
    pub fn second_fundamental_form_connection(&self, x: &[f64], xv: &[f64], yv: &[f64]) -> Result<f64> {
        let p = self.point(x)?;
        let mut dir = vec![0.0];
        dir.extend_from_slice(xv);
        let nabla = metric::covariant_derivative(self.space.as_ref(), &p, &dir, |q| self.xi_field(&q[1..]))?;
        let mut y = vec![0.0];
        y.extend_from_slice(yv);
        let g = self.space.metric(&p)?;
        Ok(-metric::inner(&g, &nabla, &y))
    }

    /// `H = Σ B(e_i, e_i)` over the screen frame.
    pub fn mean_curvature(&self, x: &[f64]) -> Result<f64> {
        let l = self.local(x)?;
        let frame = Self::screen_from(&l)?;
        Ok(Self::b_matrix(&l, &frame).trace())
    }

    pub fn rho(&self, x: &[f64]) -> Result<f64> {
        Ok(self.mean_curvature(x)? / (self.n() as f64 - 2.0))
    }

    fn umbilic_sample(&self, x: &[f64], seed: u64) -> Result<UmbilicSample> {
        let l = self.local(x)?;
        let frame = Self::screen_from(&l)?;
        let k = frame.len();
        let b = Self::b_matrix(&l, &frame);
        let hm = b.trace();
        let rho = hm / k as f64;
        let dev = &b - DMatrix::identity(k, k) * rho;
        let residual = SymmetricEigen::new(dev.clone()).eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = |rng: &mut ChaCha8Rng| {
            let v = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
            let nv = v.norm();
            v / nv
        };
        let mut pair_residual: f64 = 0.0;
        for _ in 0..SCREEN_PAIRS {
            let a = unit(&mut rng);
            let c = unit(&mut rng);
            pair_residual = pair_residual.max((a.transpose() * &dev * &c)[(0, 0)].abs());
        }
        let q = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal)).qr().q();
        let rotated: Vec<Vec<f64>> = (0..k)
            .map(|j| {
                let mut v = vec![0.0; x.len()];
                for (i, e) in frame.iter().enumerate() {
                    for (vc, ec) in v.iter_mut().zip(e) {
                        *vc += q[(i, j)] * ec;
                    }
                }
                v
            })
            .collect();
        let h2 = Self::b_matrix(&l, &rotated).trace();
        Ok(UmbilicSample {
            x: x.to_vec(),
            t: l.t,
            rho,
            mean_curvature: hm,
            residual,
            pair_residual,
            frame_spread: (hm - h2).abs(),
        })
    }

    pub fn umbilicity_test(&self, grid: &[Vec<f64>], tol: f64, seed: u64) -> Result<UmbilicityReport> {
        let samples = par::map_indexed(grid, |i, x| {
            self.umbilic_sample(x, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
        Ok(UmbilicityReport { samples, max_residual, tolerance: tol, umbilic: max_residual <= tol })
    }

    /// `ξ(ρ) − ρ²`, with `ξ(ρ)` a central difference of `ρ` along the fibre part of `ξ`.
    pub fn null_sectional_from_rho(&self, x: &[f64]) -> Result<f64> {
        let xi = self.xi_field(x)?;
        let dir = &xi[1..];
        let nd = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let eps = 1e-4 * scale / nd;
        let shifted = |s: f64| -> Vec<f64> { x.iter().zip(dir).map(|(a, b)| a + s * b).collect() };
        let fib = &self.space.fibre;
        for s in [eps, -eps, 2.0 * eps, -2.0 * eps] {
            if !fib.in_domain(&shifted(s)) {
                return Err(Error::Degenerate("no room for the ξ-derivative of ρ".into()));
            }
        }
        let r = |s: f64| self.rho(&shifted(s));
        let d = (8.0 * (r(eps)? - r(-eps)?) - (r(2.0 * eps)? - r(-2.0 * eps)?)) / (12.0 * eps);
        let rho = self.rho(x)?;
        Ok(d - rho * rho)
    }

    /// The same curvature from the warped-product formula: `K_u / f²` with
    /// `u = −∂_t − ∇h/|∇h|` and the given screen direction.
    pub fn null_sectional_from_ambient(&self, x: &[f64], screen: &[f64]) -> Result<f64> {
        let l = self.local(x)?;
        let gn = l.grad_norm();
        let w: Vec<f64> = l.grad.iter().map(|c| -c / gn).collect();
        let vn = metric::inner(&l.gf, screen, screen).sqrt();
        let v: Vec<f64> = screen.iter().map(|c| c / vn).collect();
        let k = self.space.null_sectional_curvature(&l.point(), &v, &w)?;
        Ok(k / (l.f * l.f))
    }
}

/// Rectangular grid of `per_axis^m` points strictly inside the box `[lo, hi]`.
pub fn box_grid(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let m = lo.len();
    let mut out = vec![vec![]];
    for i in 0..m {
        let mut next = Vec::new();
        for p in &out {
            for k in 0..per_axis {
                let s = (k as f64 + 0.5) / per_axis as f64;
                let mut q = p.clone();
                q.push(lo[i] + s * (hi[i] - lo[i]));
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// `count` seeded uniform points in the box.
pub fn random_grid(lo: &[f64], hi: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect())
        .collect()
}

#[cfg(test)]
mod tests;
