//! Numerical toolkit for Fisher-Rao geometry on statistical families and
//! conformal angle checks in the complex plane.
//!
//! * [`differential`]: finite-difference Jacobians, directional derivatives and
//!   Cauchy-Riemann checks.
//! * [`statmanifold`]: parametric families, Fisher information and Burbea-Rao
//!   α-order entropy metrics.
//! * [`geodesic`]: Christoffel symbols, geodesic shooting and Rao distances.
//! * [`conformal`]: arcs, tangent angles, angle preservation and arc length.
//! * [`scene3d`]: the four-point viewing scene with its distances, view angles
//!   and per-ray complex planes.
//! * [`cli`]: the `raogeo` command-line front end and its CSV/SVG outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conformal;
pub mod differential;
pub mod error;
pub mod geodesic;
pub mod quadrature;
pub mod scene3d;
pub mod statmanifold;

pub use error::{Error, Result};
