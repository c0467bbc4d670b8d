//! Desk-scale numerics for boost-covariant boundary nets on the interior of the
//! Lorentz hyperboloid.
//!
//! - [`geometry`]: light-cone intervals, double cones, boosts, ordering predicates.
//! - [`inner`]: symmetric inner functions and their mollified Fourier profiles.
//! - [`axb`]: the Schrödinger representation of the ax+b group on a grid.
//! - [`modular`]: Tomita–Takesaki data of finite-dimensional standard subspaces.
//! - [`current`]: the U(1)-current one-particle spaces in dilation coordinates.
//! - [`net`]: cone generators, locality, covariance and state classification.
//! - [`suites`]: verification suites producing [`suites::Verdict`] records.

// `!(a > b)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod axb;
pub mod current;
pub mod geometry;
pub mod inner;
pub mod linalg;
pub mod modular;
pub mod net;
pub mod suites;

pub use axb::{Grid, GridState};
pub use geometry::{DoubleCone, Ext, Interval, Point2D, Rational};
pub use inner::{InnerFunction, Mollifier, Multiplier, RawMultiplier, TimeGrid};
pub use num_complex::Complex64;
