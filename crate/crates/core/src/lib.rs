//! Numerical toolkit for linear cocycles over torus translations.
//!
//! The crate is `no_std` (with `alloc`); the optional `parallel` feature
//! spreads grid loops over a rayon pool without changing results.
#![no_std]
// `Float` supplies f64 methods in no_std builds; with std linked in they resolve inherently.
#![allow(unused_imports)]
// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod avalanche;
pub mod cocycle;
pub mod error;
pub mod flags;
pub mod linalg;
pub mod models;
pub mod par;
pub mod random;
pub mod spectra;

pub use error::{Error, Result};
