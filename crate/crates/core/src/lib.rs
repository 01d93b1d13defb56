//! Fixed autoregressive Transformer systems.
//!
//! A fixed system is a triple of a fixed-weight Transformer, a deterministic
//! decoding rule and a context manager, run in a loop. This crate compiles
//! finite functions into explicit Transformer weights ([`construct`]),
//! evaluates them under an explicit numeric format ([`numerics`],
//! [`transformer`]), drives them with pluggable context managers
//! ([`managers`], [`system`]) and relates the resulting systems to classical
//! machines ([`machines`]).

pub mod numerics;
pub mod system;
pub mod construct;
pub mod machines;
pub mod managers;
pub mod transformer;
pub mod verify;
pub mod vocab;

pub use numerics::{Matrix, NumericError, NumericFormat};
pub use transformer::{Transformer, TransformerError, TransformerSpec, TransformerWeights};
pub use vocab::{TokenId, Vocabulary};
