//! Numerical laboratory for Finsler geometry.
//!
//! Metric families on a single chart, curvature from the geodesic spray,
//! geodesics and asymmetric distances, Lie derivatives along complete lifts,
//! Ricci-soliton checks, and the Ricci-integral and diameter estimates for
//! shrinking solitons.

pub mod bounds;
pub mod cli;
pub mod curvature;
pub mod domain;
pub mod dual;
pub mod error;
pub mod geodesics;
pub mod linalg;
pub mod metric;
pub mod sampling;
pub mod soliton;
pub mod tensors;

pub use error::{Error, Result};
