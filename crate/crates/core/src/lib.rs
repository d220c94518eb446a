//! Numerical machinery for entire subsolutions of degenerate elliptic
//! inequalities `F(D²u) ≥ f(u)` with `F` a partial-trace or Pucci operator.

pub mod entire_solutions;
pub mod error;
pub mod matrixops;
pub mod nonlinearity;
pub mod quadrature;
pub mod radial_ode;

pub use error::{Error, Result};
