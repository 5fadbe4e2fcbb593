//! Discrete conformal structures on ideally triangulated surfaces with
//! boundary, and solvers for the prescribed boundary-length problem.

// `!(x > 0.0)` is used on purpose throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curvature;
pub mod error;
pub mod flows;
pub mod hexagon;
pub mod numerics;
pub mod schemes;
pub mod topology;

pub use error::{Error, Result};
