//! Pool-based active learning with dual (positive/negative) class prompts
//! over frozen feature embeddings.

// Negated comparisons are how NaN inputs get rejected; index loops mirror
// the matrix algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod datastore;
pub mod error;
pub mod experiment;
pub mod model;
pub mod numerics;
pub mod selection;

pub use error::{Error, Result};
