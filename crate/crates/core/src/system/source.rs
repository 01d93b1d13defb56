use std::collections::HashMap;

use rand::Rng;

use super::SystemError;
use crate::managers::LagRule;
use crate::transformer::Transformer;
use crate::vocab::{TokenId, Vocabulary};

/// Anything that maps a window to the next token.
pub trait NextTokenSource {
    fn vocab(&self) -> &Vocabulary;

    /// Longest window accepted.
    fn window(&self) -> usize;

    fn next_token(&self, window: &[TokenId]) -> Result<TokenId, SystemError>;

    /// Cells of opaque workspace one call needs when simulated on a machine.
    fn scratch_cells(&self) -> usize {
        0
    }
}

impl NextTokenSource for Transformer {
    fn vocab(&self) -> &Vocabulary {
        Transformer::vocab(self)
    }

    fn window(&self) -> usize {
        self.spec().window
    }

    fn next_token(&self, window: &[TokenId]) -> Result<TokenId, SystemError> {
        Ok(Transformer::next_token(self, window)?)
    }

    fn scratch_cells(&self) -> usize {
        Transformer::scratch_cells(self)
    }
}

/// A `(N, 1)` rule read as a next-token function on windows of exactly `N`
/// tokens; empty output decodes as `ε`.
impl NextTokenSource for LagRule {
    fn vocab(&self) -> &Vocabulary {
        LagRule::vocab(self)
    }

    fn window(&self) -> usize {
        self.n()
    }

    fn next_token(&self, window: &[TokenId]) -> Result<TokenId, SystemError> {
        if window.len() != self.n() {
            return Err(SystemError::MockMiss(window.to_vec()));
        }
        self.apply_token(window)
            .ok_or_else(|| SystemError::MockMiss(window.to_vec()))
    }
}

/// Explicit window → token table; a lookup miss is an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockTable {
    vocab: Vocabulary,
    window: usize,
    table: HashMap<Vec<TokenId>, TokenId>,
}

impl MockTable {
    pub fn new(vocab: Vocabulary, window: usize) -> Self {
        Self {
            vocab,
            window,
            table: HashMap::new(),
        }
    }

    pub fn insert(&mut self, window: Vec<TokenId>, token: TokenId) {
        self.table.insert(window, token);
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Total table over every window of length `1..=window`, each entry
    /// drawn uniformly from `outputs` in lexicographic window order.
    pub fn random(
        vocab: Vocabulary,
        window: usize,
        outputs: &[TokenId],
        rng: &mut impl Rng,
    ) -> Self {
        Self::from_fn(vocab, window, |_| outputs[rng.gen_range(0..outputs.len())])
    }

    /// Total table over every window of length `1..=window`.
    pub fn from_fn(vocab: Vocabulary, window: usize, mut f: impl FnMut(&[TokenId]) -> TokenId) -> Self {
        let mut mock = Self::new(vocab, window);
        let sigma = mock.vocab.len();
        for len in 1..=window {
            let mut w = vec![TokenId(0); len];
            loop {
                let t = f(&w);
                mock.insert(w.clone(), t);
                let mut i = len;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    w[i].0 += 1;
                    if w[i].0 < sigma {
                        break;
                    }
                    w[i].0 = 0;
                }
                if w.iter().all(|t| t.0 == 0) {
                    break;
                }
            }
        }
        mock
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<TokenId>, &TokenId)> {
        self.table.iter()
    }
}

impl NextTokenSource for MockTable {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn window(&self) -> usize {
        self.window
    }

    fn next_token(&self, window: &[TokenId]) -> Result<TokenId, SystemError> {
        self.table
            .get(window)
            .copied()
            .ok_or_else(|| SystemError::MockMiss(window.to_vec()))
    }
}

/// Wraps a closure as a source.
pub struct FnSource<F> {
    vocab: Vocabulary,
    window: usize,
    f: F,
}

impl<F: Fn(&[TokenId]) -> TokenId> FnSource<F> {
    pub fn new(vocab: Vocabulary, window: usize, f: F) -> Self {
        Self { vocab, window, f }
    }
}

impl<F: Fn(&[TokenId]) -> TokenId> NextTokenSource for FnSource<F> {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn window(&self) -> usize {
        self.window
    }

    fn next_token(&self, window: &[TokenId]) -> Result<TokenId, SystemError> {
        Ok((self.f)(window))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_mock_is_total_and_seeded() {
        let v = Vocabulary::new(["a", "b", "c"]).unwrap();
        let outs = [TokenId(0), TokenId(2)];
        let m1 = MockTable::random(v.clone(), 3, &outs, &mut ChaCha8Rng::seed_from_u64(4));
        let m2 = MockTable::random(v, 3, &outs, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(m1.len(), 3 + 9 + 27);
        assert_eq!(m1, m2);
        assert!(m1.next_token(&[TokenId(1), TokenId(1)]).is_ok());
        assert!(m1.next_token(&[TokenId(1); 4]).is_err());
    }
}
