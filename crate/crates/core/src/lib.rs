// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod demo;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod gripper;
pub mod losses;
pub mod refine;
pub mod sampler;
pub mod scores;

pub use error::{Error, Result};
