//! Exact sparse deconvolution with a box (square-wave) kernel.
//!
//! Convolving a signal with a box of width `k` replaces every window of `k`
//! consecutive samples with its sum. The operator is not invertible, but
//! sparse signals are recovered exactly by minimizing the l1 norm subject to
//! the measurements whenever `|supp(x)| < floor(n / k)`, and that bound is
//! tight when `k` divides `n`.
//!
//! The crate is `no_std` (it needs `alloc`) and is organized as:
//!
//! - [`boxconv`]: the valid/circular box operators, their adjoints, the 2D
//!   separable box, and the characterization of the operator kernel.
//! - [`lpsolve`]: a small dense linear-programming core (Mehrotra interior
//!   point with a revised-simplex fallback).
//! - [`recovery`]: basis pursuit, tie detection, the nullspace-property
//!   checker, the tightness construction, and an l0 brute-force oracle.
//! - [`imaging2d`]: pixel-shift scan simulation and TV-regularized 2D
//!   reconstruction.
//!
//! # Indexing
//!
//! All indices are 0-based. A 1-based index `j` in `{1..n}` with residue class
//! `j mod k` in `{1..k}` (residue 0 read as `k`) corresponds to the 0-based
//! index `j - 1` with residue class `(j - 1) mod k` in `{0..k-1}`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boxconv;
mod error;
pub mod imaging2d;
pub mod linalg;
pub mod lpsolve;
pub mod recovery;

pub use boxconv::{BoxOperator, Image2D, KernelBasis, Mode, Signal1D};
pub use error::{Error, Result};
