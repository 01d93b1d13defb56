use super::{ConstructError, PairFnTable};
use crate::numerics::{Matrix, NumericFormat};
use crate::transformer::{
    HeadWeights, LayerWeights, Positional, Transformer, TransformerSpec, TransformerWeights,
};
use crate::vocab::{TokenId, Vocabulary, CONTROL_1, CONTROL_2};

/// Attention score gap between the targeted position and every other one.
pub const PAIR_SCORE_GAP: f64 = 30.0;

/// Residual-stream layout of the pair-function model.
///
/// `[token (K+2) | control (2) | first (K) | second (K) | indicator (2K²) | position (3)]`.
/// Token ids `0..K` are the base alphabet, `K` is `<1>` and `K+1` is `<2>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairLayout {
    pub k: usize,
}

impl PairLayout {
    pub fn vocab_size(&self) -> usize {
        self.k + 2
    }

    pub fn control_token(&self, c: usize) -> TokenId {
        TokenId(self.k + c)
    }

    pub fn head_dim(&self) -> usize {
        self.k.max(3)
    }

    fn control(&self, c: usize) -> usize {
        self.vocab_size() + c
    }

    fn first(&self, a: usize) -> usize {
        self.vocab_size() + 2 + a
    }

    fn second(&self, b: usize) -> usize {
        self.vocab_size() + 2 + self.k + b
    }

    fn indicator(&self, c: usize, a: usize, b: usize) -> usize {
        self.vocab_size() + 2 + 2 * self.k + self.hidden_index(c, a, b)
    }

    fn hidden_index(&self, c: usize, a: usize, b: usize) -> usize {
        c * self.k * self.k + a * self.k + b
    }

    pub fn ffn_hidden(&self) -> usize {
        2 * self.k * self.k
    }

    pub fn d_model(&self) -> usize {
        self.vocab_size() + 2 + 2 * self.k + self.ffn_hidden() + 3
    }

    fn position(&self, p: usize) -> usize {
        self.d_model() - 3 + p
    }
}

/// Compiles `f: Σ² → Σ²` into a one-layer, three-head model with window 3
/// over `Σ ∪ {<1>, <2>}` whose greedy prediction on `(<c>, a, b)` is the
/// `c`-th component of `f(a, b)`.
///
/// Each head reads one fixed position through the one-hot positional code;
/// the feed-forward layer fires a unit indicator for `(c, a, b)`. The
/// compiled model is checked on all `2K²` prompts before it is returned.
pub fn compile_pair_fn(
    table: &PairFnTable,
    format: NumericFormat,
) -> Result<Transformer, ConstructError> {
    let k = table.k();
    let lay = PairLayout { k };
    let d = lay.d_model();
    let dh = lay.head_dim();
    let v = lay.vocab_size();
    let spec = TransformerSpec {
        vocab_size: v,
        window: 3,
        d_model: d,
        layers: 1,
        head_dims: vec![dh; 3],
        ffn_hidden: lay.ffn_hidden(),
        positional: Positional::OneHot { width: 3 },
    };

    let mut names: Vec<String> = table.vocab().names().to_vec();
    names.push(CONTROL_1.to_string());
    names.push(CONTROL_2.to_string());
    let vocab = Vocabulary::new(&names)?;

    let embedding = Matrix::from_triplets(v, d, (0..v).map(|t| (t, t, 1.0)))?;
    let scale = PAIR_SCORE_GAP * (dh as f64).sqrt();
    let heads = (0..3)
        .map(|target| {
            let w_q = Matrix::from_triplets(d, dh, (0..3).map(|p| (lay.position(p), target, scale)))?;
            let w_k = Matrix::from_triplets(d, dh, (0..3).map(|p| (lay.position(p), p, 1.0)))?;
            let w_v = if target == 0 {
                Matrix::from_triplets(d, dh, (0..2).map(|c| (k + c, c, 1.0)))?
            } else {
                Matrix::from_triplets(d, dh, (0..k).map(|a| (a, a, 1.0)))?
            };
            Ok(HeadWeights { w_q, w_k, w_v })
        })
        .collect::<Result<Vec<_>, ConstructError>>()?;
    let w_o = Matrix::from_triplets(
        3 * dh,
        d,
        (0..2)
            .map(|c| (c, lay.control(c), 1.0))
            .chain((0..k).map(|a| (dh + a, lay.first(a), 1.0)))
            .chain((0..k).map(|b| (2 * dh + b, lay.second(b), 1.0))),
    )?;

    let mut w1 = Vec::new();
    let mut out = Vec::new();
    for (a, b, (f1, f2)) in table.entries() {
        for (c, fc) in [(0, f1), (1, f2)] {
            let h = lay.hidden_index(c, a.0, b.0);
            w1.push((lay.control(c), h, 1.0));
            w1.push((lay.first(a.0), h, 1.0));
            w1.push((lay.second(b.0), h, 1.0));
            out.push((lay.indicator(c, a.0, b.0), fc.0, 1.0));
        }
    }
    let hidden = lay.ffn_hidden();
    let w1 = Matrix::from_triplets(d, hidden, w1)?;
    let w2 = Matrix::from_triplets(
        hidden,
        d,
        (0..hidden).map(|h| (h, lay.vocab_size() + 2 + 2 * k + h, 1.0)),
    )?;
    let output = Matrix::from_triplets(d, v, out)?;

    let weights = TransformerWeights {
        embedding,
        layers: vec![LayerWeights {
            heads,
            w_o,
            w1,
            b1: vec![-2.0; hidden],
            w2,
            b2: vec![0.0; d],
        }],
        output,
    };
    let model = Transformer::new(spec, weights, vocab, format)?;

    for (a, b, (f1, f2)) in table.entries() {
        for (c, expected) in [(0, f1), (1, f2)] {
            let window = vec![lay.control_token(c), a, b];
            let got = model.next_token(&window)?;
            if got != expected {
                return Err(ConstructError::VerificationFailed {
                    window,
                    expected,
                    got,
                });
            }
        }
    }
    Ok(model)
}
