//! Fréchet means, large-sample tests and Dirichlet-process density estimation
//! on spheres, projective spaces, landmark shape spaces and SPD matrices.
//!
//! The `mstats` binary is a thin wrapper over [`cli`].

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod cli;
pub mod error;
pub mod frechet;
pub mod geometry;
pub mod inference;
pub mod landmarks;
pub mod linalg;

pub use error::{Error, Result};
pub use geometry::{Coords, Manifold, Point, SpdMetric, TangentVector};
