//! Inverse design of layered optical thin films.
//!
//! Materials are chosen by an actor-critic agent walking a learned 2D
//! material map, layer thicknesses by a genetic algorithm, and every
//! candidate is scored with a transfer-matrix solver against a target
//! spectrum.
//!
//! This crate is `no_std` (it needs `alloc`). File formats, the command line
//! and the threaded worker pool live in the `filmsearch` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod a3c;
pub mod design;
pub mod embedding;
pub mod ga;
pub mod material;
pub mod nn;
pub mod tmm;

pub use num_complex::Complex64;
