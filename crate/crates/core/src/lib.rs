//! Norm angles and angular equivalence on `R^n`.
//!
//! The crate evaluates user-specified norms (weighted `l^p`, inner-product,
//! sums, maxima, polygonal gauges and their duals), computes the one-sided
//! g-functionals and norm angles they induce, and provides diagnostics built
//! on those angles: angular-equivalence constant scans, divergence probes,
//! planar unit-ball analysis (polar radius, boundary angle functions),
//! vertex/extreme-ray detection and convexity moduli.
//!
//! Layout:
//! - [`norms`]: the expression type, grammar parser, evaluation, duals;
//! - [`gfunc`]: difference quotients, one-sided g-functionals, norm angles;
//! - [`plane`]: polar radius `r`, the boundary angle `sigma`, one-sided
//!   limits `phi`, and the closed planar g/angle formulas;
//! - [`equiv`]: tan-ratio scans, topological constants, the inner-product
//!   pencil bound, divergence probes;
//! - [`geometry`]: vertices, flat faces, strict-convexity witnesses and
//!   convexity moduli;
//! - [`regress`]: the built-in reference value suite used by the CLI.

pub mod equiv;
pub mod error;
pub mod geometry;
pub mod gfunc;
pub mod norms;
pub mod plane;
pub mod regress;
pub mod sample;

pub use error::{Error, Result};
pub use norms::{dualize, evaluate, parse_norm, NormExpr, Vector};
