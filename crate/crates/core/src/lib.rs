//! Reducible spectral curves: theta functions, Abel inversion, matricial
//! polynomials, Nahm flow and Kähler potentials.

pub mod curve;
pub mod error;
pub mod flow;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod potential;
pub mod random;
pub mod selftest;
pub mod sections;
pub mod theta;

pub use error::{Error, Result};
