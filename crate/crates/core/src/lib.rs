//! Numerical laboratory for weighted heat equations
//! `u_t = Δ_f u + F(u)` on rotationally symmetric smooth metric measure
//! spaces.
//!
//! The crate solves the radial reduction of two reaction families
//! (log-power and exponential) with a second-order finite-difference
//! discretization, and checks gradient estimates, Harnack inequalities and
//! Liouville-type conclusions pointwise on the computed solutions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod estimates;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod solver;
pub mod spline;

pub use error::{Error, Result};
