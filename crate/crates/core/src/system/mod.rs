//! The execution loop of a fixed system: form a window, decode one token,
//! update the manager, until the manager halts or the step cap is reached.

mod mock_file;
mod source;
mod trace;

pub use mock_file::{parse_mock, write_mock};
pub use source::{FnSource, MockTable, NextTokenSource};
pub use trace::{HaltReason, SystemTrace, TraceRow};

use thiserror::Error;

use crate::managers::{Manager, ManagerError, ManagerState, Prompt};
use crate::transformer::TransformerError;
use crate::vocab::{TokenId, VocabError, Vocabulary, ACCEPT, REJECT};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("next-token source has no entry for window {0:?}")]
    MockMiss(Vec<TokenId>),
    #[error("window of {len} tokens exceeds the source window {max}")]
    WindowTooLong { len: usize, max: usize },
    #[error("invalid system configuration: {0}")]
    Config(String),
    #[error("halted on `{0}`, which is neither accept nor reject")]
    NoVerdict(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("diverged: no halt within {0} steps")]
    Diverged(u64),
    #[error(transparent)]
    Model(#[from] TransformerError),
    #[error(transparent)]
    Manager(#[from] ManagerError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `accept` and `reject` stop the run and classify the input.
    Decide,
    Transduce,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemConfig {
    pub manager: Manager,
    pub max_steps: u64,
    pub mode: Mode,
}

impl SystemConfig {
    pub fn new(manager: Manager, mode: Mode) -> Self {
        Self {
            manager,
            max_steps: DEFAULT_MAX_STEPS,
            mode,
        }
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accept,
    Reject,
    Diverged,
}

/// Ids of `accept` and `reject`, required in decide mode.
fn verdict_tokens(vocab: &Vocabulary, cfg: &SystemConfig) -> Result<Option<(TokenId, TokenId)>, SystemError> {
    if cfg.mode != Mode::Decide {
        return Ok(None);
    }
    let acc = vocab
        .get(ACCEPT)
        .ok_or_else(|| SystemError::Config("decide mode needs an `accept` token".into()))?;
    let rej = vocab
        .get(REJECT)
        .ok_or_else(|| SystemError::Config("decide mode needs a `reject` token".into()))?;
    if let Manager::Appending(_) | Manager::TwoCall(_) = cfg.manager {
        let h = cfg.manager.halting();
        if !h.contains(&acc) || !h.contains(&rej) {
            return Err(SystemError::Config(
                "decide mode needs accept and reject in the halting set".into(),
            ));
        }
    }
    Ok(Some((acc, rej)))
}

pub fn run_system(
    source: &dyn NextTokenSource,
    cfg: &SystemConfig,
    input: &[TokenId],
) -> Result<SystemTrace, SystemError> {
    if cfg.max_steps == 0 {
        return Err(SystemError::Config("max_steps must be at least 1".into()));
    }
    let vocab = source.vocab();
    for &t in input {
        vocab.check(t)?;
    }
    if cfg.manager.window_len() > source.window() {
        return Err(SystemError::Config(format!(
            "manager window {} exceeds the source window {}",
            cfg.manager.window_len(),
            source.window()
        )));
    }
    let verdicts = verdict_tokens(vocab, cfg)?;
    let mut state = ManagerState::new(input.to_vec());
    let mut rows = Vec::new();
    let reason = loop {
        if rows.len() as u64 >= cfg.max_steps {
            break HaltReason::Cap;
        }
        let window = match cfg.manager.window(&state) {
            Prompt::Halt => {
                state = cfg.manager.halt(&state);
                break HaltReason::Exhausted;
            }
            Prompt::Window(w) => w,
        };
        if window.len() > source.window() {
            return Err(SystemError::WindowTooLong {
                len: window.len(),
                max: source.window(),
            });
        }
        let decoded = source.next_token(&window)?;
        vocab.check(decoded)?;
        let stop = verdicts.is_some_and(|(a, r)| decoded == a || decoded == r);
        state = if stop {
            cfg.manager.halt(&state)
        } else {
            cfg.manager.update(&state, decoded)
        };
        rows.push(TraceRow {
            t: rows.len() as u64 + 1,
            window,
            decoded,
            r_len: state.r.len(),
            phase: state.phase,
        });
        if state.is_halted() {
            break HaltReason::Token(decoded);
        }
    };
    let output = state
        .r
        .iter()
        .copied()
        .filter(|&t| !vocab.is_control(t))
        .collect();
    Ok(SystemTrace {
        rows,
        reason,
        r: state.r,
        output,
    })
}

pub fn decide(
    source: &dyn NextTokenSource,
    cfg: &SystemConfig,
    input: &[TokenId],
) -> Result<Outcome, SystemError> {
    if cfg.mode != Mode::Decide {
        return Err(SystemError::Config("decide needs decide mode".into()));
    }
    let (acc, rej) = verdict_tokens(source.vocab(), cfg)?.expect("decide mode");
    if input.is_empty() {
        return Ok(Outcome::Reject);
    }
    let trace = run_system(source, cfg, input)?;
    match trace.reason {
        HaltReason::Cap => Ok(Outcome::Diverged),
        HaltReason::Token(t) if t == acc => Ok(Outcome::Accept),
        HaltReason::Token(t) if t == rej => Ok(Outcome::Reject),
        HaltReason::Token(t) => Err(SystemError::NoVerdict(source.vocab().name(t).to_string())),
        HaltReason::Exhausted => Err(SystemError::NoVerdict("<empty string>".into())),
    }
}

pub fn transduce(
    source: &dyn NextTokenSource,
    cfg: &SystemConfig,
    input: &[TokenId],
) -> Result<Vec<TokenId>, SystemError> {
    let trace = run_system(source, cfg, input)?;
    match trace.reason {
        HaltReason::Cap => Err(SystemError::Diverged(cfg.max_steps)),
        _ => Ok(trace.output),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::managers::{AppendingManager, LagRule, SummarizationManager};

    fn vocab() -> Vocabulary {
        Vocabulary::new(["a", "b", "<s>", "<EOS>", "accept", "reject"]).unwrap()
    }

    #[test]
    fn eos_mock_returns_input() {
        let v = vocab();
        let eos = v.id("<EOS>").unwrap();
        let src = FnSource::new(v.clone(), 6, move |_| eos);
        let m = Manager::Summarization(SummarizationManager::new(6, 1, &v).unwrap());
        let cfg = SystemConfig::new(m, Mode::Transduce);
        let input = v.parse_tokens("a b a").unwrap();
        let tr = run_system(&src, &cfg, &input).unwrap();
        assert_eq!(tr.rows.len(), 1);
        assert_eq!(tr.output, input);
        assert_eq!(transduce(&src, &cfg, &input).unwrap(), input);
    }

    #[test]
    fn cap_marks_divergence() {
        let v = vocab();
        let rule = LagRule::from_fn(v.clone(), 2, 1, vec![], |w| vec![w[1]]).unwrap();
        let m = Manager::Appending(AppendingManager::new(2, ["<EOS>"], &v).unwrap());
        let cfg = SystemConfig::new(m, Mode::Transduce).with_max_steps(10);
        let tr = run_system(&rule, &cfg, &v.parse_tokens("a b").unwrap()).unwrap();
        assert_eq!(tr.reason, HaltReason::Cap);
        assert_eq!(tr.rows.len(), 10);
        assert!(matches!(
            transduce(&rule, &cfg, &v.parse_tokens("a b").unwrap()),
            Err(SystemError::Diverged(10))
        ));
    }

    #[test]
    fn decide_conventions() {
        let v = vocab();
        let acc = v.id("accept").unwrap();
        let src = FnSource::new(v.clone(), 2, move |_| acc);
        let m = Manager::Appending(AppendingManager::new(2, ["accept", "reject"], &v).unwrap());
        let cfg = SystemConfig::new(m, Mode::Decide);
        assert_eq!(decide(&src, &cfg, &[]).unwrap(), Outcome::Reject);
        assert_eq!(decide(&src, &cfg, &[TokenId(0)]).unwrap(), Outcome::Accept);
        let bad = Manager::Appending(AppendingManager::new(2, ["<EOS>"], &v).unwrap());
        assert!(matches!(
            decide(&src, &SystemConfig::new(bad, Mode::Decide), &[TokenId(0)]),
            Err(SystemError::Config(_))
        ));
    }
}
