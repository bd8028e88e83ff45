//! Joint recovery of sparse input signals and graph-filter coefficients from
//! observed diffused graph signals.
//!
//! A diffusion process on a graph is modeled as a polynomial filter in a
//! symmetric graph-shift operator. When the filter is invertible, the inputs
//! satisfy `X = V diag(g~) V^T Y` for the inverse filter's frequency response
//! `g~`, which turns the bilinear identification problem into a linear one:
//! minimize `||Z g~||_1` subject to `1^T g~ = 1`, with the Khatri-Rao design
//! matrix `Z = Y^T V (col-wise kron) V`. This crate provides the pieces of
//! that pipeline:
//!
//! - [`graphs`]: undirected weighted graphs and graph-shift operators;
//! - [`spectral`]: symmetric eigendecomposition, Vandermonde matrices,
//!   filter responses, and the Khatri-Rao operator;
//! - [`signals`]: seeded generators for sparse inputs, filters, and
//!   noiseless observations;
//! - [`solver`]: the weighted l1-synthesis linear program and its
//!   iteratively-reweighted refinement;
//! - [`identifiability`]: permutation-ambiguity detection and the
//!   rank/dual-certificate pair that guarantees exact recovery.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the
//! experiment harness live in the companion `graphdeconv-cli` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod graphs;
pub mod identifiability;
pub mod mat;
pub mod seed;
pub mod signals;
pub mod solver;
pub mod spectral;

mod lp;

pub use error::Error;
pub use mat::Mat;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
