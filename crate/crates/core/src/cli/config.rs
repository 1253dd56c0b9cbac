//! Job files: a spacetime block, `[[task]]` blocks and an output block, in TOML.

use crate::cone::NullCone;
use crate::error::{Error, Result};
use crate::expr::CompiledExpr;
use crate::fibre::FibreModel;
use crate::field::{ExprField, FieldRef, SumField};
use crate::grw::{GrwSpace, Orientation, WarpingProfile};
use crate::metric::ChartMetric;
use crate::nullhyp::{box_grid, random_grid, GraphHypersurface};
use crate::staticspace::{RadialStaticFamily, StaticModel};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub seed: Option<u64>,
    pub spacetime: Option<SpacetimeSpec>,
    #[serde(default, rename = "task")]
    pub tasks: Vec<TaskSpec>,
    pub output: Option<OutputSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Option<Format>,
    pub path: Option<String>,
}

fn full_line() -> [f64; 2] {
    [f64::NEG_INFINITY, f64::INFINITY]
}

fn one() -> f64 {
    1.0
}

fn four() -> usize {
    4
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpacetimeSpec {
    Grw {
        warping: String,
        #[serde(default = "full_line")]
        interval: [f64; 2],
        #[serde(default)]
        params: Params,
        fibre: FibreSpec,
    },
    Static {
        fibre: FibreSpec,
        /// Expression in the fibre coordinates.
        potential: String,
        #[serde(default)]
        params: Params,
    },
    RadialStatic {
        /// `h(r)`.
        profile: String,
        r_interval: [f64; 2],
        #[serde(default = "four")]
        n: usize,
        #[serde(default)]
        params: Params,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FibreSpec {
    Euclidean {
        dim: usize,
    },
    Sphere {
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    Hyperbolic {
        dim: usize,
        #[serde(default = "minus_one")]
        curvature: f64,
    },
    Product {
        factors: Vec<FibreSpec>,
    },
    /// `J ×_μ S` in coordinates `(s, z1, …)`.
    Twisted {
        interval: [f64; 2],
        mu: String,
        leaf: Box<FibreSpec>,
        #[serde(default = "one")]
        normal_radius: f64,
        #[serde(default)]
        params: Params,
    },
    /// Upper-triangle metric components in `x1, …, xm` on a box.
    ExpressionMetric {
        lo: Vec<f64>,
        hi: Vec<f64>,
        components: Vec<String>,
        #[serde(default = "one")]
        normal_radius: f64,
        #[serde(default)]
        params: Params,
    },
}

fn minus_one() -> f64 {
    -1.0
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum OrientationSpec {
    #[default]
    Future,
    Past,
}

impl From<OrientationSpec> for Orientation {
    fn from(o: OrientationSpec) -> Self {
        match o {
            OrientationSpec::Future => Orientation::Future,
            OrientationSpec::Past => Orientation::Past,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub ts: f64,
    pub xs: Vec<f64>,
    #[serde(default)]
    pub orientation: OrientationSpec,
}

/// A graph `t = h(x)`: an expression or a nullcone, optionally plus `eps · bump`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub expr: Option<String>,
    pub cone: Option<ConeSpec>,
    pub bump: Option<String>,
    #[serde(default)]
    pub eps: f64,
}

/// Either explicit points, a box with `per_axis` nodes, or `count` seeded random points in a box.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: Option<Vec<Vec<f64>>>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub per_axis: Option<usize>,
    pub count: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub r_range: [f64; 2],
    #[serde(default = "cert_samples")]
    pub samples: usize,
    #[serde(default = "cert_eps")]
    pub eps_int: f64,
    #[serde(default = "cert_tol")]
    pub tol: f64,
    pub expect: Option<VerdictSpec>,
}

fn cert_samples() -> usize {
    201
}

fn cert_eps() -> f64 {
    0.05
}

fn cert_tol() -> f64 {
    1e-10
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictSpec {
    ExactlyTwo,
    Refused,
}

fn null_tol() -> f64 {
    1e-8
}

fn umbilic_tol() -> f64 {
    crate::nullhyp::DEFAULT_UMBILIC_TOL
}

fn mean_tol() -> f64 {
    1e-5
}

fn s_lo() -> f64 {
    -0.2
}

fn s_hi() -> f64 {
    0.2
}

fn s_samples() -> usize {
    17
}

fn leaf_step() -> f64 {
    0.05
}

fn leaf_radius() -> f64 {
    0.2
}

fn jacobi_samples() -> usize {
    8
}

fn jacobi_scan() -> usize {
    70
}

fn zero_tol() -> f64 {
    1e-6
}

fn static_range() -> [f64; 2] {
    [-0.5, 0.5]
}

fn static_samples() -> usize {
    11
}

fn directions() -> usize {
    200
}

fn planes() -> usize {
    16
}

fn threshold() -> f64 {
    0.25
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Validate {
        graph: GraphSpec,
        grid: GridSpec,
        #[serde(default = "null_tol")]
        tol: f64,
        seed: Option<u64>,
    },
    Cone {
        cone: ConeSpec,
        grid: GridSpec,
        /// Number of seeded generator directions whose points are tested for membership.
        #[serde(default)]
        generators: usize,
        #[serde(default)]
        params: Vec<f64>,
        #[serde(default = "null_tol")]
        tol: f64,
        #[serde(default = "mean_tol")]
        rho_tol: f64,
        #[serde(default = "umbilic_tol")]
        umbilic_tol: f64,
        seed: Option<u64>,
    },
    Umbilic {
        graph: GraphSpec,
        grid: GridSpec,
        #[serde(default = "umbilic_tol")]
        tol: f64,
        #[serde(default = "null_tol")]
        null_tol: f64,
        seed: Option<u64>,
    },
    Reconstruct {
        graph: GraphSpec,
        x0: Vec<f64>,
        #[serde(default = "s_lo")]
        s_lo: f64,
        #[serde(default = "s_hi")]
        s_hi: f64,
        #[serde(default = "s_samples")]
        s_samples: usize,
        #[serde(default = "leaf_step")]
        leaf_step: f64,
        #[serde(default = "leaf_radius")]
        leaf_radius: f64,
        #[serde(default = "umbilic_tol")]
        tol: f64,
        seed: Option<u64>,
    },
    Construct {
        t0: f64,
        grid: GridSpec,
        #[serde(default)]
        dual: bool,
        #[serde(default = "null_tol")]
        tol: f64,
        #[serde(default = "mean_tol")]
        mean_tol: f64,
        seed: Option<u64>,
    },
    Dual {
        graph: GraphSpec,
        x0: Vec<f64>,
        grid: GridSpec,
        #[serde(default = "null_tol")]
        tol: f64,
        #[serde(default = "umbilic_tol")]
        umbilic_tol: f64,
        #[serde(default = "mean_tol")]
        mean_tol: f64,
        seed: Option<u64>,
    },
    ClassifyDs {
        t0: Vec<f64>,
        expect: Option<Vec<String>>,
    },
    Conjugate {
        #[serde(default)]
        ts: f64,
        xs: Vec<f64>,
        u: Vec<f64>,
        #[serde(default)]
        orientation: OrientationSpec,
        s_max: f64,
        #[serde(default = "jacobi_samples")]
        samples: usize,
        #[serde(default = "jacobi_scan")]
        scan: usize,
        expect_zero: Option<f64>,
        expect_rank: Option<usize>,
        #[serde(default)]
        expect_none: bool,
        #[serde(default = "zero_tol")]
        zero_tol: f64,
        max_proportionality: Option<f64>,
        min_proportionality: Option<f64>,
    },
    Static {
        r0: Option<f64>,
        #[serde(default = "static_range")]
        s_range: [f64; 2],
        #[serde(default = "static_samples")]
        samples: usize,
        #[serde(default)]
        t0: f64,
        certificate: Option<CertificateSpec>,
        graph: Option<String>,
        grid: Option<GridSpec>,
        #[serde(default = "null_tol")]
        null_tol: f64,
        #[serde(default = "mean_tol")]
        tol: f64,
        seed: Option<u64>,
    },
    Obstruction {
        point: Vec<f64>,
        #[serde(default = "directions")]
        directions: usize,
        #[serde(default = "planes")]
        planes: usize,
        #[serde(default = "threshold")]
        threshold: f64,
        expect_obstructed: Option<bool>,
        seed: Option<u64>,
    },
    Fixtures {
        #[serde(default = "four")]
        n: usize,
    },
}

impl TaskSpec {
    pub fn command(&self) -> &'static str {
        match self {
            TaskSpec::Validate { .. } => "validate",
            TaskSpec::Cone { .. } => "cone",
            TaskSpec::Umbilic { .. } => "umbilic",
            TaskSpec::Reconstruct { .. } => "reconstruct",
            TaskSpec::Construct { .. } => "construct",
            TaskSpec::Dual { .. } => "dual",
            TaskSpec::ClassifyDs { .. } => "classify-ds",
            TaskSpec::Conjugate { .. } => "conjugate",
            TaskSpec::Static { .. } => "static",
            TaskSpec::Obstruction { .. } => "obstruction",
            TaskSpec::Fixtures { .. } => "fixtures",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            TaskSpec::Validate { seed, .. }
            | TaskSpec::Cone { seed, .. }
            | TaskSpec::Umbilic { seed, .. }
            | TaskSpec::Reconstruct { seed, .. }
            | TaskSpec::Construct { seed, .. }
            | TaskSpec::Dual { seed, .. }
            | TaskSpec::Static { seed, .. }
            | TaskSpec::Obstruction { seed, .. } => *seed,
            _ => None,
        }
    }

    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        match self {
            TaskSpec::Validate { tol, .. } | TaskSpec::Reconstruct { tol, .. } => vec![("tol", *tol)],
            TaskSpec::Umbilic { tol, null_tol, .. } => vec![("tol", *tol), ("null_tol", *null_tol)],
            TaskSpec::Cone { tol, rho_tol, umbilic_tol, .. } => {
                vec![("tol", *tol), ("rho_tol", *rho_tol), ("umbilic_tol", *umbilic_tol)]
            }
            TaskSpec::Construct { tol, mean_tol, .. } => vec![("tol", *tol), ("mean_tol", *mean_tol)],
            TaskSpec::Dual { tol, umbilic_tol, mean_tol, .. } => {
                vec![("tol", *tol), ("umbilic_tol", *umbilic_tol), ("mean_tol", *mean_tol)]
            }
            TaskSpec::Conjugate { zero_tol, max_proportionality, min_proportionality, .. } => {
                let mut v = vec![("zero_tol", *zero_tol)];
                v.extend(max_proportionality.map(|t| ("max_proportionality", t)));
                v.extend(min_proportionality.map(|t| ("min_proportionality", t)));
                v
            }
            TaskSpec::Static { null_tol, tol, certificate, .. } => {
                let mut v = vec![("null_tol", *null_tol), ("tol", *tol)];
                if let Some(c) = certificate {
                    v.push(("certificate.tol", c.tol));
                    v.push(("certificate.eps_int", c.eps_int));
                }
                v
            }
            TaskSpec::Obstruction { threshold, .. } => vec![("threshold", *threshold)],
            TaskSpec::ClassifyDs { .. } | TaskSpec::Fixtures { .. } => vec![],
        }
    }
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: JobConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (i, t) in cfg.tasks.iter().enumerate() {
            for (name, v) in t.tolerances() {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("task {i} ({}): {name} must be positive, got {v}", t.command())));
                }
            }
        }
        Ok(cfg)
    }
}

fn param_list(p: &Params) -> Vec<(&str, f64)> {
    p.iter().map(|(k, v)| (k.as_str(), *v)).collect()
}

/// Coordinate names of a fibre: `s, z1, …` for twisted fibres, `x1, …, xm` otherwise.
pub fn coordinate_names(f: &FibreModel) -> Vec<String> {
    match f.kind() {
        crate::fibre::FibreKind::Twisted(_) => crate::fixtures::twisted_vars(f.dim() - 1),
        _ => (1..=f.dim()).map(|i| format!("x{i}")).collect(),
    }
}

pub fn field_on(f: &FibreModel, text: &str, params: &Params) -> Result<FieldRef> {
    let names = coordinate_names(f);
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Ok(Arc::new(ExprField::parse(text, &refs, &param_list(params))?))
}

impl FibreSpec {
    pub fn build(&self) -> Result<FibreModel> {
        Ok(match self {
            FibreSpec::Euclidean { dim } => FibreModel::euclidean(positive_dim(*dim)?),
            FibreSpec::Sphere { dim, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::Config(format!("sphere radius must be positive, got {radius}")));
                }
                FibreModel::sphere(positive_dim(*dim)?, *radius)
            }
            FibreSpec::Hyperbolic { dim, curvature } => {
                if !(*curvature < 0.0) {
                    return Err(Error::Config(format!("hyperbolic curvature must be negative, got {curvature}")));
                }
                FibreModel::hyperbolic(positive_dim(*dim)?, *curvature)
            }
            FibreSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::Config("product fibre needs at least one factor".into()));
                }
                FibreModel::product(factors.iter().map(|f| f.build()).collect::<Result<_>>()?)
            }
            FibreSpec::Twisted { interval, mu, leaf, normal_radius, params } => {
                let leaf = leaf.build()?;
                let mu = crate::fixtures::twisted_field(mu, leaf.dim(), &param_list(params))?;
                FibreModel::twisted(interval[0], interval[1], leaf, mu, *normal_radius)?
            }
            FibreSpec::ExpressionMetric { lo, hi, components, normal_radius, params } => {
                let names: Vec<String> = (1..=lo.len()).map(|i| format!("x{i}")).collect();
                let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                let comps = components
                    .iter()
                    .map(|c| CompiledExpr::parse(c, &refs, &param_list(params)).map_err(Error::from))
                    .collect::<Result<Vec<_>>>()?;
                FibreModel::expression(comps, lo.clone(), hi.clone(), *normal_radius)?
            }
        })
    }
}

fn positive_dim(d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::Config("fibre dimension must be at least 1".into()));
    }
    Ok(d)
}

/// A spacetime built from its block.
#[derive(Clone)]
pub enum Spacetime {
    Grw { space: Arc<GrwSpace>, params: Params },
    Static { model: Arc<StaticModel>, params: Params },
    Radial(RadialStaticFamily),
}

impl SpacetimeSpec {
    pub fn build(&self) -> Result<Spacetime> {
        Ok(match self {
            SpacetimeSpec::Grw { warping, interval, params, fibre } => {
                let w = WarpingProfile::parse(warping, &param_list(params), interval[0], interval[1])?;
                Spacetime::Grw { space: Arc::new(GrwSpace::new(w, fibre.build()?)), params: params.clone() }
            }
            SpacetimeSpec::Static { fibre, potential, params } => {
                let fibre = fibre.build()?;
                let phi = field_on(&fibre, potential, params)?;
                Spacetime::Static { model: Arc::new(StaticModel::new(fibre, phi)?), params: params.clone() }
            }
            SpacetimeSpec::RadialStatic { profile, r_interval, n, params } => {
                Spacetime::Radial(RadialStaticFamily::parse(profile, &param_list(params), r_interval[0], r_interval[1], *n)?)
            }
        })
    }
}

impl Spacetime {
    pub fn grw(&self, command: &str) -> Result<(Arc<GrwSpace>, &Params)> {
        match self {
            Spacetime::Grw { space, params } => Ok((space.clone(), params)),
            _ => Err(Error::Config(format!("`{command}` needs a grw spacetime"))),
        }
    }

    pub fn fibre(&self) -> Result<FibreModel> {
        match self {
            Spacetime::Grw { space, .. } => Ok(space.fibre.clone()),
            Spacetime::Static { model, .. } => Ok(model.fibre.clone()),
            Spacetime::Radial(_) => Err(Error::Config("radial-static spacetimes have no explicit fibre block".into())),
        }
    }
}

impl GraphSpec {
    pub fn build(&self, space: Arc<GrwSpace>, params: &Params) -> Result<GraphHypersurface> {
        let base: FieldRef = match (&self.expr, &self.cone) {
            (Some(e), None) => field_on(&space.fibre, e, params)?,
            (None, Some(c)) => NullCone::new(space.clone(), c.ts, c.xs.clone(), c.orientation.into())?.graph_field(),
            _ => return Err(Error::Config("graph needs exactly one of `expr` and `cone`".into())),
        };
        let h: FieldRef = match &self.bump {
            Some(b) => Arc::new(SumField { a: base, b: field_on(&space.fibre, b, params)?, scale: self.eps }),
            None if self.eps != 0.0 => return Err(Error::Config("`eps` given without `bump`".into())),
            None => base,
        };
        GraphHypersurface::new(space, h)
    }
}

impl GridSpec {
    pub fn build(&self, dim: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let pts = match (&self.points, &self.lo, &self.hi) {
            (Some(p), None, None) if self.per_axis.is_none() && self.count.is_none() => p.clone(),
            (None, Some(lo), Some(hi)) => {
                if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
                    return Err(Error::Config("grid box needs lo ≤ hi componentwise".into()));
                }
                match (self.per_axis, self.count) {
                    (Some(k), None) if k >= 1 => box_grid(lo, hi, k),
                    (None, Some(c)) if c >= 1 => random_grid(lo, hi, c, seed),
                    _ => return Err(Error::Config("grid box needs exactly one of `per_axis` and `count` (≥ 1)".into())),
                }
            }
            _ => return Err(Error::Config("grid needs either `points` or `lo`/`hi`".into())),
        };
        if let Some(p) = pts.iter().find(|p| p.len() != dim) {
            return Err(Error::Config(format!("grid point {p:?} does not have dimension {dim}")));
        }
        Ok(pts)
    }
}
