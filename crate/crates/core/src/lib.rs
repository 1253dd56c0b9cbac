pub mod error;
pub mod expr;

pub use error::{Error, Result};
pub mod numeric;
pub mod field;
pub mod metric;
pub mod fibre;
pub mod grw;
pub mod par;
pub mod nullhyp;
pub mod cone;
pub mod twist;
pub mod jacobi;
pub mod staticspace;
pub mod fixtures;
pub mod cli;
