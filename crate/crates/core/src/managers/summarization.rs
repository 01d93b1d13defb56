use super::{require, ManagerError, ManagerState, Phase, Prompt};
use crate::vocab::{TokenId, Vocabulary, EOS, SUMMARY};

/// Prompts with `r` while it is short; once `|r| ≥ N − budget` it prompts
/// `<s> ∘ r_{1:N−budget}` and replaces that prefix with the decoded summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummarizationManager {
    pub n: usize,
    pub budget: usize,
    pub summary: TokenId,
    pub eos: TokenId,
}

impl SummarizationManager {
    pub fn new(n: usize, budget: usize, vocab: &Vocabulary) -> Result<Self, ManagerError> {
        if n < 3 {
            return Err(ManagerError::Config(format!("window N = {n} must be at least 3")));
        }
        if budget < 1 || 2 * budget > n {
            return Err(ManagerError::Config(format!(
                "budget {budget} must satisfy 1 ≤ budget ≤ N/2 = {}",
                n / 2
            )));
        }
        Ok(Self {
            n,
            budget,
            summary: require(vocab, SUMMARY, "summary")?,
            eos: require(vocab, EOS, "terminator")?,
        })
    }

    fn prefix_len(&self) -> usize {
        self.n - self.budget
    }

    /// Most summary tokens one summarization event can produce.
    pub fn summary_cap(&self) -> usize {
        if self.budget == 1 {
            1
        } else {
            self.budget - 1
        }
    }

    pub(super) fn window(&self, state: &ManagerState) -> Prompt {
        let r = &state.r;
        if state.phase == Phase::Summarizing {
            let mut w = Vec::with_capacity(self.n);
            w.push(self.summary);
            w.extend_from_slice(&r[..self.prefix_len()]);
            w.extend_from_slice(&state.pending);
            return Prompt::Window(w);
        }
        if r.is_empty() {
            return Prompt::Halt;
        }
        if r.len() < self.prefix_len() {
            Prompt::Window(r.clone())
        } else {
            let mut w = Vec::with_capacity(self.n);
            w.push(self.summary);
            w.extend_from_slice(&r[..self.prefix_len()]);
            Prompt::Window(w)
        }
    }

    pub(super) fn update(&self, state: &ManagerState, decoded: TokenId) -> ManagerState {
        let mut next = state.clone();
        let summarizing = state.phase == Phase::Summarizing || state.r.len() >= self.prefix_len();
        if !summarizing {
            if decoded == self.eos {
                next.phase = Phase::Halted;
            } else {
                next.r.push(decoded);
            }
            return next;
        }
        let done = if self.budget == 1 {
            next.pending.push(decoded);
            true
        } else if decoded == self.eos {
            true
        } else {
            next.pending.push(decoded);
            next.pending.len() >= self.summary_cap()
        };
        if done {
            let mut r = std::mem::take(&mut next.pending);
            r.extend_from_slice(&state.r[self.prefix_len()..]);
            next.r = r;
            next.phase = Phase::Normal;
        } else {
            next.phase = Phase::Summarizing;
        }
        next
    }
}
