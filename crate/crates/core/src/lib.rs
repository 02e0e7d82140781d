//! Locally covariant free Klein-Gordon field on flat 1+1D spacetimes.
//!
//! The crate builds the functor from spacetimes to observable algebras for the
//! free scalar field on the Minkowski plane and the flat cylinder, on a lattice
//! with `dt = dx = h`, and turns each structural axiom into a sampled check
//! that reports its worst deviation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod functor;
pub mod greens;
pub mod modular;
pub mod natfield;
pub mod report;
pub mod spacetime;
pub mod suite;
pub mod testfun;
pub mod weyl;

pub use error::{Error, Result};
