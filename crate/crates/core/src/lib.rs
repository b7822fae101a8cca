pub mod cli;
pub mod coin;
pub mod config;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod momentum;
pub mod konno;
pub mod quadrature;
pub mod scattering;
pub mod weaklimit;
