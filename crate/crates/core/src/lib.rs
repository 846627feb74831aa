//! Similarity iterated function systems, coding trees, Galton-Watson fractals
//! and the dimensions attached to them.
//!
//! The crate computes exact quantities (Moran roots, extinction probabilities,
//! reduced offspring laws, section counts) and finite-resolution geometry
//! (attractor clouds, Hausdorff distances, minisets, covering estimators).
//! Every random quantity is a pure function of a 64-bit seed.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod error;
pub mod galton_watson;
pub mod geometry;
pub mod io;
pub mod rng;
pub mod similarity;
pub mod symbols;
pub mod tree;

pub use error::{Error, Result};
