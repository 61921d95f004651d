//! Renewal function, renewal density and two-time moments of inverse Lévy
//! subordinators, from the drift and Lévy measure alone.
//!
//! Two independent inverse-Laplace engines are provided: [`bromwich`]
//! (real-axis Bromwich integral) and [`postwidder`] (Post-Widder formula
//! with Richardson extrapolation). [`moments`] builds covariances on top of
//! the renewal measure and [`oracles`] holds the closed forms used to check
//! them.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bromwich;
pub mod error;
pub mod levy;
pub mod moments;
pub mod oracles;
pub mod postwidder;
pub mod quad;
pub mod series;
pub mod special;

pub use error::{Error, Result};
pub use levy::{CustomSpec, ExponentForm, FamilyParams, LevyMeasure, MeasureKernel, SubordinatorSpec, Taylor};
