//! Scalar fields on chart domains with value/gradient/Hessian jets.

use crate::error::{Error, Result};
use crate::expr::CompiledExpr;
use crate::numeric::fd;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Value, coordinate gradient and coordinate Hessian at a point.
#[derive(Clone, Debug)]
pub struct Jet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet {
    pub fn constant(value: f64, dim: usize) -> Jet {
        Jet { value, grad: DVector::zeros(dim), hess: DMatrix::zeros(dim, dim) }
    }
}

pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        fd_jet(self, x)
    }
}

pub type FieldRef = Arc<dyn ScalarField>;

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("non-finite field value {v}")))
    }
}

/// Central-difference jet; errors if any stencil value is not finite.
pub fn fd_jet<F: ScalarField + ?Sized>(f: &F, x: &[f64]) -> Result<Jet> {
    let value = finite(f.value(x)?)?;
    let bad = std::cell::Cell::new(false);
    let eval = |y: &[f64]| match f.value(y) {
        Ok(v) if v.is_finite() => v,
        _ => {
            bad.set(true);
            f64::NAN
        }
    };
    let g = fd::gradient(eval, x);
    let h = fd::hessian(eval, x);
    if bad.get() {
        return Err(Error::Domain("field not finite on the difference stencil".into()));
    }
    let n = x.len();
    Ok(Jet {
        value,
        grad: DVector::from_vec(g),
        hess: DMatrix::from_fn(n, n, |i, j| h[i][j]),
    })
}

/// A parsed expression in the chart coordinates; jets by forward-mode dual numbers.
#[derive(Clone, Debug)]
pub struct ExprField {
    expr: CompiledExpr,
}

impl ExprField {
    pub fn new(expr: CompiledExpr) -> Self {
        ExprField { expr }
    }

    pub fn parse(text: &str, vars: &[&str], params: &[(&str, f64)]) -> Result<Self> {
        Ok(ExprField { expr: CompiledExpr::parse(text, vars, params)? })
    }

    pub fn expr(&self) -> &CompiledExpr {
        &self.expr
    }
}

impl ScalarField for ExprField {
    fn dim(&self) -> usize {
        self.expr.vars().len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.expr.eval(x).map_err(|e| Error::Domain(e.to_string()))
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let xv = DVector::from_column_slice(x);
        let (v, g, h) = num_dual::hessian(|z| self.expr.eval_dual(z.as_slice()), &xv)
            .map_err(|e| Error::Domain(e.to_string()))?;
        finite(v)?;
        Ok(Jet { value: v, grad: g, hess: h })
    }
}

/// Closure-backed field; jets by central differences.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Result<f64> + Send + Sync> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Result<f64> + Send + Sync> ScalarField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        (self.f)(x)
    }
}

/// Outer one-variable map applied to an inner field: value, first and second derivative.
pub type Outer = Arc<dyn Fn(f64) -> Result<(f64, f64, f64)> + Send + Sync>;

/// `outer ∘ inner`, with the jet assembled by the chain rule.
pub struct Composed {
    pub inner: FieldRef,
    pub outer: Outer,
}

impl Composed {
    pub fn new(inner: FieldRef, outer: Outer) -> Self {
        Composed { inner, outer }
    }
}

impl ScalarField for Composed {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok((self.outer)(self.inner.value(x)?)?.0)
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let j = self.inner.jet(x)?;
        let (v, d1, d2) = (self.outer)(j.value)?;
        let hess = &j.hess * d1 + (&j.grad * j.grad.transpose()) * d2;
        Ok(Jet { value: v, grad: &j.grad * d1, hess })
    }
}

/// `a + scale·b`.
pub struct SumField {
    pub a: FieldRef,
    pub b: FieldRef,
    pub scale: f64,
}

impl ScalarField for SumField {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.a.value(x)? + self.scale * self.b.value(x)?)
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let ja = self.a.jet(x)?;
        let jb = self.b.jet(x)?;
        Ok(Jet {
            value: ja.value + self.scale * jb.value,
            grad: ja.grad + jb.grad * self.scale,
            hess: ja.hess + jb.hess * self.scale,
        })
    }
}

/// A field that depends only on one chart coordinate, given by a 1-D jet.
pub struct CoordinateField {
    pub dim: usize,
    pub index: usize,
    pub profile: Outer,
}

impl ScalarField for CoordinateField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok((self.profile)(x[self.index])?.0)
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let (v, d1, d2) = (self.profile)(x[self.index])?;
        let mut j = Jet::constant(v, self.dim);
        j.grad[self.index] = d1;
        j.hess[(self.index, self.index)] = d2;
        Ok(j)
    }
}
