pub mod fd;
pub mod ode;
pub mod quad;
pub mod richardson;
pub mod root;
