use super::{ManagerError, ManagerState, Phase, Prompt};
use crate::vocab::{TokenId, Vocabulary, EPSILON};

/// Sliding window: prompts the first `min(|r|, N)` tokens, drops `r₁` and
/// appends the decoded token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppendingManager {
    pub n: usize,
    pub halting: Vec<TokenId>,
    /// Decoding this token appends nothing.
    pub epsilon: Option<TokenId>,
}

impl AppendingManager {
    pub fn new<S: AsRef<str>>(
        n: usize,
        halting: impl IntoIterator<Item = S>,
        vocab: &Vocabulary,
    ) -> Result<Self, ManagerError> {
        if n < 1 {
            return Err(ManagerError::Config("window N must be at least 1".into()));
        }
        let halting = halting
            .into_iter()
            .map(|h| vocab.id(h.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        if halting.is_empty() {
            return Err(ManagerError::Config("halting set is empty".into()));
        }
        Ok(Self {
            n,
            halting,
            epsilon: vocab.get(EPSILON),
        })
    }

    pub(super) fn window(&self, state: &ManagerState) -> Prompt {
        if state.r.is_empty() {
            return Prompt::Halt;
        }
        Prompt::Window(state.r[..state.r.len().min(self.n)].to_vec())
    }

    pub(super) fn update(&self, state: &ManagerState, decoded: TokenId) -> ManagerState {
        let mut next = state.clone();
        if self.halting.contains(&decoded) {
            next.phase = Phase::Halted;
            return next;
        }
        if !next.r.is_empty() {
            next.r.remove(0);
        }
        if Some(decoded) != self.epsilon {
            next.r.push(decoded);
        }
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::managers::Manager;

    fn setup(n: usize) -> (Manager, Vocabulary) {
        let v = Vocabulary::new(["a", "b", "c", "ε", "<EOS>"]).unwrap();
        (Manager::Appending(AppendingManager::new(n, ["<EOS>"], &v).unwrap()), v)
    }

    #[test]
    fn window_is_prefix() {
        let (m, v) = setup(6);
        let r = v.parse_tokens("a b c a b c a b c").unwrap();
        assert_eq!(m.window(&ManagerState::new(r.clone())), Prompt::Window(r[..6].to_vec()));
        let short = r[..4].to_vec();
        assert_eq!(m.window(&ManagerState::new(short.clone())), Prompt::Window(short));
        let (m1, _) = setup(1);
        assert_eq!(m1.window(&ManagerState::new(r.clone())), Prompt::Window(r[..1].to_vec()));
    }

    #[test]
    fn slides_and_halts() {
        let (m, v) = setup(6);
        let s = ManagerState::new(v.parse_tokens("a b c a b c").unwrap());
        let s1 = m.update(&s, v.id("a").unwrap());
        assert_eq!(v.render(&s1.r), "b c a b c a");
        let h = m.update(&s, v.id("<EOS>").unwrap());
        assert!(h.is_halted());
        assert_eq!(h.r, s.r);
    }

    #[test]
    fn epsilon_appends_nothing() {
        let (m, v) = setup(6);
        let s = ManagerState::new(v.parse_tokens("a b").unwrap());
        assert_eq!(v.render(&m.update(&s, v.id("ε").unwrap()).r), "b");
    }
}
