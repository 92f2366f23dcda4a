//! Convex extensions of proper lower semicontinuous convex functions from the
//! hyperplane `{x = 0}` to the half-space `[0, inf) x R^n`, their smoothing by
//! `x`-dependent mollification, randomized property verification, and the
//! polyconvex-elasticity constructions built on top of them.

pub mod cli;
pub mod convex;
pub mod elasticity;
pub mod error;
pub mod ext_real;
pub mod extension;
pub mod mollifier;
pub mod quadrature;
pub mod suites;
pub mod verification;

mod vecops;

pub use error::{Error, Result};
pub use ext_real::ExtReal;
