use crate::expr::ParseError;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("point outside chart domain: {0}")]
    OutsideChart(String),
    #[error("time {t} outside interval ({lo}, {hi})")]
    OutsideInterval { t: f64, lo: f64, hi: f64 },
    #[error("quadrature value {value} outside attainable range ({lo}, {hi})")]
    QuadratureRange { value: f64, lo: f64, hi: f64 },
    #[error("shooting did not converge (residual {residual:.3e})")]
    Shooting { residual: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("curve left the chart at parameter {param}")]
    ChartExit { param: f64 },
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("hypersurface is not umbilic (residual {residual:.3e})")]
    NotUmbilic { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
