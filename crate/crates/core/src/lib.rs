//! Time-budgeted join-tree reformulation of discrete belief networks, with
//! metareasoning policies that decide how long to keep reformulating before
//! committing to inference.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clock;
pub mod error;
pub mod harness;
pub mod inference;
pub mod metareason;
pub mod net;
pub mod profiler;
pub mod reformulation;
pub mod seed;

pub use error::{Error, Result};
