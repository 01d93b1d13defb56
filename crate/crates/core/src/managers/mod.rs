//! Context managers: the component that maintains the string `r`, forms each
//! prompt window from it and folds each decoded token back in.

mod appending;
mod config;
mod lag;
mod summarization;
mod two_call;

pub use appending::AppendingManager;
pub use config::{ManagerConfig, ManagerStyle};
pub use lag::{lag_run, lag_step, parse_lag_rule, write_lag_rule, LagOutcome, LagRule, LagRun};
pub use summarization::SummarizationManager;
pub use two_call::TwoCallManager;

use thiserror::Error;

use crate::vocab::{TokenId, VocabError, Vocabulary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManagerError {
    #[error("invalid manager configuration: {0}")]
    Config(String),
    #[error("maintained string has {len} tokens, the rule reads {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("state is halted")]
    Halted,
    #[error("rule has no entry for window {0:?}")]
    MissingRule(Vec<TokenId>),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Normal,
    Summarizing,
    Halted,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Normal => "normal",
            Phase::Summarizing => "summarizing",
            Phase::Halted => "halted",
        })
    }
}

/// The manager's whole state; updates return a new value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ManagerState {
    pub r: Vec<TokenId>,
    pub phase: Phase,
    /// Tokens decoded so far in a multi-token summary or a two-call macro-step.
    pub pending: Vec<TokenId>,
    pub step: u64,
}

impl ManagerState {
    pub fn new(input: Vec<TokenId>) -> Self {
        Self {
            r: input,
            phase: Phase::Normal,
            pending: Vec::new(),
            step: 0,
        }
    }

    pub fn is_halted(&self) -> bool {
        self.phase == Phase::Halted
    }

    fn halted(&self) -> Self {
        Self {
            r: self.r.clone(),
            phase: Phase::Halted,
            pending: Vec::new(),
            step: self.step,
        }
    }
}

/// What the manager asks of the model next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prompt {
    Window(Vec<TokenId>),
    /// Stop without another decoding call; the state moves to halted.
    Halt,
}

/// A resolved context manager.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Manager {
    Summarization(SummarizationManager),
    Appending(AppendingManager),
    TwoCall(TwoCallManager),
}

impl Manager {
    /// Longest window this manager ever emits.
    pub fn window_len(&self) -> usize {
        match self {
            Manager::Summarization(m) => m.n,
            Manager::Appending(m) => m.n,
            Manager::TwoCall(_) => 3,
        }
    }

    pub fn window(&self, state: &ManagerState) -> Prompt {
        if state.is_halted() {
            return Prompt::Halt;
        }
        match self {
            Manager::Summarization(m) => m.window(state),
            Manager::Appending(m) => m.window(state),
            Manager::TwoCall(m) => m.window(state),
        }
    }

    /// Applies `Prompt::Halt`: the state becomes halted with `r` kept.
    pub fn halt(&self, state: &ManagerState) -> ManagerState {
        state.halted()
    }

    pub fn update(&self, state: &ManagerState, decoded: TokenId) -> ManagerState {
        if state.is_halted() {
            return state.clone();
        }
        let mut next = match self {
            Manager::Summarization(m) => m.update(state, decoded),
            Manager::Appending(m) => m.update(state, decoded),
            Manager::TwoCall(m) => m.update(state, decoded),
        };
        next.step = state.step + 1;
        next
    }

    /// Tokens whose emission stops the run.
    pub fn halting(&self) -> &[TokenId] {
        match self {
            Manager::Summarization(m) => std::slice::from_ref(&m.eos),
            Manager::Appending(m) => &m.halting,
            Manager::TwoCall(m) => &m.halting,
        }
    }
}

fn require(vocab: &Vocabulary, name: &str, role: &str) -> Result<TokenId, ManagerError> {
    vocab
        .get(name)
        .ok_or_else(|| ManagerError::Config(format!("{role} token `{name}` is not in the vocabulary")))
}
