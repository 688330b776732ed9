//! Finite-resolution laboratory for restricted families of orthogonal
//! projections in R^3.
//!
//! The chain of constructions:
//!
//! 1. [`construct::generate_percolation_set`] builds a random planar Cantor
//!    set of dimension `alpha = log N / log M` with exact branching;
//!    [`construct::ahlfors_regularity_profile`] and
//!    [`analysis::tube_exponent_profile`] measure its regularity and how
//!    little mass any tube of width `w` can hold.
//! 2. [`construct::map_family_to_sphere`] lifts the set onto a cap of the
//!    sphere, giving a weighted family of directions `(G, gamma)`;
//!    [`analysis::smallness_profile`] and
//!    [`analysis::worst_case_smallness`] measure how much of the family is
//!    nearly orthogonal to a probe vector.
//! 3. [`projection::mmp_experiment`] projects 3-D test sets onto sampled
//!    lines of the family and checks dimension conservation (sets of
//!    dimension at most 1) or positive projected length (above 1).
//!
//! [`pipeline`] drives all of this from a TOML config and writes CSV, JSON
//! and SVG outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod construct;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod pipeline;
pub mod projection;
pub mod seed;
pub mod sphere;

pub use error::{Error, Result};
pub use geometry::{Direction3, Tube2};
pub use grid::GridSet;
pub use seed::RngSeed;
