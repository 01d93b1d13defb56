//! Compilation of finite function tables into explicit Transformer weights.
//!
//! [`compile_binary_fn`] realises any `f: Σ² → Σ` with a one-layer,
//! two-head model over a window of two tokens. [`compile_pair_fn`] realises
//! `f: Σ² → Σ²` with a window-3 model driven by a leading control token that
//! selects which output component to decode.

mod binary;
mod margin;
mod pair;
mod table;

pub use binary::{closed_form_heads, compile_binary_fn, BinaryLayout};
pub use margin::{margin_report, precision_sweep, sweep_threshold, MarginFailure, MarginReport};
pub use pair::{compile_pair_fn, PairLayout, PAIR_SCORE_GAP};
pub use table::{parse_fn_table, write_fn_table, BinaryFnTable, FnTable, PairFnTable};

use thiserror::Error;

use crate::numerics::NumericError;
use crate::transformer::TransformerError;
use crate::vocab::{TokenId, VocabError};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("alphabet size {0} is below 2")]
    AlphabetTooSmall(usize),
    #[error("table is not total: no entry for ({0}, {1})")]
    NotTotal(String, String),
    #[error("table entry for ({0}, {1}) given twice")]
    DuplicateEntry(String, String),
    #[error("control token `{0}` collides with the base alphabet")]
    ControlCollision(String),
    #[error("compiled model decodes {got} instead of {expected} on window {window:?}")]
    VerificationFailed {
        window: Vec<TokenId>,
        expected: TokenId,
        got: TokenId,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Model(#[from] TransformerError),
}
