//! Numerical laboratory for Toeplitz operators with indicator symbols on
//! Bergman spaces of the disc, the ball and the polydisc.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod moments;
pub mod oracles;
pub mod schatten;
pub mod toeplitz;

pub use error::{Error, Result};
