use super::{require, ManagerError, ManagerState, Phase, Prompt};
use crate::vocab::{TokenId, Vocabulary, CONTROL_1, CONTROL_2, EPSILON};

/// Realises one step of a (2,2)-restricted system with two single-token
/// calls: `(<1>, r₁, r₂)` then `(<2>, r₁, r₂)`; both results are appended
/// and `r₁` is dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCallManager {
    pub first: TokenId,
    pub second: TokenId,
    pub halting: Vec<TokenId>,
    pub epsilon: Option<TokenId>,
}

impl TwoCallManager {
    pub fn new<S: AsRef<str>>(
        halting: impl IntoIterator<Item = S>,
        vocab: &Vocabulary,
    ) -> Result<Self, ManagerError> {
        let halting = halting
            .into_iter()
            .map(|h| vocab.id(h.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            first: require(vocab, CONTROL_1, "control")?,
            second: require(vocab, CONTROL_2, "control")?,
            halting,
            epsilon: vocab.get(EPSILON),
        })
    }

    pub(super) fn window(&self, state: &ManagerState) -> Prompt {
        if state.r.len() < 2 {
            return Prompt::Halt;
        }
        let control = if state.pending.is_empty() {
            self.first
        } else {
            self.second
        };
        Prompt::Window(vec![control, state.r[0], state.r[1]])
    }

    pub(super) fn update(&self, state: &ManagerState, decoded: TokenId) -> ManagerState {
        let mut next = state.clone();
        if self.halting.contains(&decoded) {
            next.phase = Phase::Halted;
            next.pending.clear();
            return next;
        }
        if state.pending.is_empty() {
            next.pending.push(decoded);
            return next;
        }
        let first = next.pending.pop().expect("one pending token");
        next.r.remove(0);
        next.r
            .extend([first, decoded].into_iter().filter(|&t| Some(t) != self.epsilon));
        next
    }
}
