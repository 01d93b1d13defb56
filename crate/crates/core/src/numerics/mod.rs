//! Deterministic finite-precision arithmetic.
//!
//! Every forward pass runs through a [`NumericFormat`], so the precision a
//! model executes under is an explicit, configurable contract. All
//! operations are pure and bit-reproducible for identical inputs.

mod format;
mod matrix;

pub use format::NumericFormat;
pub use matrix::{argmax_first, compensated_sum, relu, Matrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("index {index:?} outside shape {shape:?}")]
    IndexOutOfRange {
        index: (usize, usize),
        shape: (usize, usize),
    },
    #[error("rows of unequal length")]
    Ragged,
    #[error("fixed-point overflow near {value}")]
    Overflow { value: f64 },
    #[error("non-finite value")]
    NonFinite,
    #[error("softmax over a fully masked row")]
    AllMasked,
    #[error("empty vector")]
    Empty,
    #[error("invalid fixed-point format: frac_bits={frac_bits}, total_bits={total_bits}")]
    InvalidFormat { frac_bits: u32, total_bits: u32 },
    #[error("cannot parse numeric format `{0}`")]
    Parse(String),
}
