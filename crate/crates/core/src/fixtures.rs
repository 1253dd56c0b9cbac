//! Built-in spacetimes and hypersurfaces used by tests, the CLI and benchmarks.

use crate::error::Result;
use crate::field::{ExprField, FieldRef};
use crate::fibre::FibreModel;
use crate::grw::{GrwSpace, WarpingProfile};
use crate::nullhyp::GraphHypersurface;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

/// Edge margin kept away from open interval ends.
pub const EDGE: f64 = 1e-3;

/// Variable names `s, z1, …, zk` of a twisted chart.
pub fn twisted_vars(leaf_dim: usize) -> Vec<String> {
    let mut v = vec!["s".to_string()];
    v.extend((1..=leaf_dim).map(|i| format!("z{i}")));
    v
}

/// A field on `(s, z)` given by an expression in those names.
pub fn twisted_field(text: &str, leaf_dim: usize, params: &[(&str, f64)]) -> Result<FieldRef> {
    let names = twisted_vars(leaf_dim);
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Ok(Arc::new(ExprField::parse(text, &refs, params)?))
}

/// Fibre of constant curvature `k` and dimension `m`.
pub fn space_form(m: usize, k: f64) -> FibreModel {
    if k == 0.0 {
        FibreModel::euclidean(m)
    } else if k > 0.0 {
        FibreModel::sphere(m, 1.0 / k.sqrt())
    } else {
        FibreModel::hyperbolic(m, k)
    }
}

pub fn minkowski(n: usize) -> GrwSpace {
    GrwSpace::new(WarpingProfile::constant(1.0), FibreModel::euclidean(n - 1))
}

pub fn de_sitter(n: usize) -> GrwSpace {
    GrwSpace::new(WarpingProfile::cosh(), FibreModel::sphere(n - 1, 1.0))
}

/// `ℝ × S^{n−1}`.
pub fn einstein_static(n: usize) -> GrwSpace {
    GrwSpace::new(WarpingProfile::constant(1.0), FibreModel::sphere(n - 1, 1.0))
}

/// `ℝ ×_{e^t} H^{n−1}`.
pub fn exp_hyperbolic(n: usize) -> GrwSpace {
    GrwSpace::new(WarpingProfile::exp(), FibreModel::hyperbolic(n - 1, -1.0))
}

/// Robertson-Walker space with fibre curvature `k` and the given warping.
pub fn robertson_walker(n: usize, k: f64, warping: WarpingProfile) -> GrwSpace {
    GrwSpace::new(warping, space_form(n - 1, k))
}

/// Closed Friedmann-like model `(0, π) ×_{sin t} S^{n−1}`, with `∫ 1/f = ∞`.
pub fn closed_friedmann(n: usize) -> GrwSpace {
    let w = WarpingProfile::parse("sin(t)", &[], 0.0, std::f64::consts::PI).expect("sin profile");
    GrwSpace::new(w, FibreModel::sphere(n - 1, 1.0))
}

/// A totally geodesic null graph of a space form together with its defining profile name.
pub struct TotallyGeodesicFixture {
    pub name: &'static str,
    pub graph: GraphHypersurface,
    /// Box in the fibre chart on which the graph is sampled.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// `{t = s}` in `ℝ × ℝ^{n−1}`.
pub fn table_minkowski(n: usize) -> TotallyGeodesicFixture {
    let space = Arc::new(minkowski(n));
    let h = twisted_field("s", n - 2, &[]).unwrap();
    TotallyGeodesicFixture {
        name: "minkowski",
        graph: GraphHypersurface::new(space, h).unwrap(),
        lo: vec![-2.0; n - 1],
        hi: vec![2.0; n - 1],
    }
}

fn leaf_box(leaf: &FibreModel, margin: f64) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = leaf.bounds();
    let clamp = |v: f64, d: f64| if v.is_finite() { v } else { d };
    let lo: Vec<f64> = lo.iter().map(|v| clamp(*v, -1.0) + margin).collect();
    let hi: Vec<f64> = hi.iter().map(|v| clamp(*v, 1.5) - margin).collect();
    (lo, hi)
}

/// `{t = 2 artanh(tan(s/2))}` in `ℝ ×_{cosh} ((−π/2, π/2) ×_{cos s} S^{n−2})`.
pub fn table_de_sitter(n: usize) -> TotallyGeodesicFixture {
    let leaf = FibreModel::sphere(n - 2, 1.0);
    let (llo, lhi) = leaf_box(&leaf, 0.2);
    let mu = twisted_field("cos(s)", n - 2, &[]).unwrap();
    let fibre = FibreModel::twisted(-FRAC_PI_2, FRAC_PI_2, leaf, mu, 1.0).unwrap();
    let space = Arc::new(GrwSpace::new(WarpingProfile::cosh(), fibre));
    let h = twisted_field("2*atanh(tan(s/2))", n - 2, &[]).unwrap();
    let mut lo = vec![-1.2];
    lo.extend(llo);
    let mut hi = vec![1.2];
    hi.extend(lhi);
    TotallyGeodesicFixture { name: "de-sitter", graph: GraphHypersurface::new(space, h).unwrap(), lo, hi }
}

/// `{t = 2 arctan(tanh(s/2))}` in `(−π/2, π/2) ×_{cos} (ℝ ×_{cosh s} H^{n−2})`.
pub fn table_anti_de_sitter(n: usize) -> TotallyGeodesicFixture {
    let leaf = FibreModel::hyperbolic(n - 2, -1.0);
    let (llo, lhi) = leaf_box(&leaf, 0.2);
    let mu = twisted_field("cosh(s)", n - 2, &[]).unwrap();
    let fibre = FibreModel::twisted(-6.0, 6.0, leaf, mu, 1.0).unwrap();
    let w = WarpingProfile::parse("cos(t)", &[], -FRAC_PI_2, FRAC_PI_2).unwrap();
    let space = Arc::new(GrwSpace::new(w, fibre));
    let h = twisted_field("2*atan(tanh(s/2))", n - 2, &[]).unwrap();
    let mut lo = vec![-2.0];
    lo.extend(llo);
    let mut hi = vec![2.0];
    hi.extend(lhi);
    TotallyGeodesicFixture { name: "anti-de-sitter", graph: GraphHypersurface::new(space, h).unwrap(), lo, hi }
}

pub fn table_fixtures(n: usize) -> Vec<TotallyGeodesicFixture> {
    vec![table_minkowski(n), table_de_sitter(n), table_anti_de_sitter(n)]
}

/// `ℝ × (S² × S²)`, an Einstein-static-like space whose fibre has no constant curvature.
pub fn sphere_product_static() -> GrwSpace {
    let s2 = FibreModel::sphere(2, 1.0);
    GrwSpace::new(WarpingProfile::constant(1.0), FibreModel::product(vec![s2.clone(), s2]))
}
