use super::FibreModel;
use crate::error::{Error, Result};
use crate::field::FieldRef;
use crate::metric::{invert, ChartMetric, Christoffel};
use nalgebra::DMatrix;

/// `(a, b) ×_μ S` with chart `(s, z)`.
#[derive(Clone)]
pub struct TwistedData {
    pub a: f64,
    pub b: f64,
    pub leaf: Box<FibreModel>,
    pub mu: FieldRef,
}

impl TwistedData {
    fn mu_value(&self, x: &[f64]) -> Result<f64> {
        let mu = self.mu.value(x)?;
        if mu > 0.0 {
            Ok(mu)
        } else {
            Err(Error::Degenerate(format!("warping μ = {mu} is not positive")))
        }
    }

    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let m = x.len();
        let mu = self.mu_value(x)?;
        let gs = self.leaf.metric(&x[1..])?;
        let mut g = DMatrix::zeros(m, m);
        g[(0, 0)] = 1.0;
        g.view_mut((1, 1), (m - 1, m - 1)).copy_from(&(gs * (mu * mu)));
        Ok(g)
    }

    /// Γ^s_ab = −μμ_s σ_ab, Γ^a_sb = (μ_s/μ)δ^a_b,
    /// Γ^a_bc = σΓ^a_bc + (μ_b/μ)δ^a_c + (μ_c/μ)δ^a_b − σ^{ad}(μ_d/μ)σ_bc.
    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        let m = x.len();
        let k = m - 1;
        let jet = self.mu.jet(x)?;
        let mu = jet.value;
        if mu <= 0.0 {
            return Err(Error::Degenerate(format!("warping μ = {mu} is not positive")));
        }
        let z = &x[1..];
        let sigma = self.leaf.metric(z)?;
        let sinv = invert(&sigma)?;
        let sg = self.leaf.christoffel(z)?;
        let dl: Vec<f64> = (0..m).map(|i| jet.grad[i] / mu).collect();
        let mut gam = Christoffel::zeros(m);
        for a in 0..k {
            for b in a..k {
                gam.set(0, 1 + a, 1 + b, -mu * jet.grad[0] * sigma[(a, b)]);
            }
            gam.set(1 + a, 0, 1 + a, dl[0]);
        }
        let up: Vec<f64> = (0..k).map(|a| (0..k).map(|d| sinv[(a, d)] * dl[1 + d]).sum()).collect();
        for a in 0..k {
            for b in 0..k {
                for c in b..k {
                    let mut v = sg.get(a, b, c) - up[a] * sigma[(b, c)];
                    if a == c {
                        v += dl[1 + b];
                    }
                    if a == b {
                        v += dl[1 + c];
                    }
                    gam.set(1 + a, 1 + b, 1 + c, v);
                }
            }
        }
        Ok(gam)
    }
}
