use std::f64::consts::E;

use super::{BinaryFnTable, ConstructError};
use crate::numerics::{Matrix, NumericFormat};
use crate::transformer::{
    HeadWeights, LayerWeights, Positional, Transformer, TransformerSpec, TransformerWeights,
};
use crate::vocab::TokenId;

/// Residual-stream block offsets of the binary-function model.
///
/// `[token | prev feature | self feature | pair indicator]`, widths
/// `K, K, K, K²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryLayout {
    pub k: usize,
}

impl BinaryLayout {
    pub fn d_model(&self) -> usize {
        3 * self.k + self.k * self.k
    }

    pub fn token(&self, a: usize) -> usize {
        a
    }

    pub fn prev_feature(&self, a: usize) -> usize {
        self.k + a
    }

    pub fn self_feature(&self, a: usize) -> usize {
        2 * self.k + a
    }

    pub fn pair(&self, a: usize, b: usize) -> usize {
        3 * self.k + a * self.k + b
    }
}

/// Exact last-row outputs of the two heads on window `(a, b)`:
/// `(p·e_a + q·e_b, q·e_a + p·e_b)` with `p = e/(1+e)`, `q = 1/(1+e)`,
/// collapsing to `(e_a, e_a)` when `a = b`.
pub fn closed_form_heads(a: TokenId, b: TokenId, k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut prev = vec![0.0; k];
    let mut own = vec![0.0; k];
    if a == b {
        prev[a.0] = 1.0;
        own[a.0] = 1.0;
    } else {
        let p = E / (1.0 + E);
        let q = 1.0 / (1.0 + E);
        prev[a.0] = p;
        prev[b.0] = q;
        own[a.0] = q;
        own[b.0] = p;
    }
    (prev, own)
}

fn head_weights(k: usize, d: usize, query: impl Fn(usize, usize) -> f64) -> HeadWeights {
    let s = (k as f64).sqrt();
    let mut q = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let v = query(i, j) * s;
            if v != 0.0 {
                q.push((i, j, v));
            }
        }
    }
    let tok = Matrix::from_triplets(d, k, (0..k).map(|i| (i, i, 1.0))).expect("in range");
    HeadWeights {
        w_q: Matrix::from_triplets(d, k, q).expect("in range"),
        w_k: tok.clone(),
        w_v: tok,
    }
}

/// Compiles `f: Σ² → Σ` into a one-layer, two-head model with window 2
/// whose greedy prediction on `(a, b)` is `f(a, b)` for every pair.
///
/// The previous-token head attends away from the current token and the
/// self head attends to it; the feed-forward layer inverts the resulting
/// convex mixtures and fires a unit indicator on the pair block.
pub fn compile_binary_fn(
    table: &BinaryFnTable,
    format: NumericFormat,
) -> Result<Transformer, ConstructError> {
    let k = table.k();
    let lay = BinaryLayout { k };
    let d = lay.d_model();
    let spec = TransformerSpec {
        vocab_size: k,
        window: 2,
        d_model: d,
        layers: 1,
        head_dims: vec![k, k],
        ffn_hidden: k * k,
        positional: Positional::None,
    };

    let embedding = Matrix::from_triplets(k, d, (0..k).map(|a| (a, lay.token(a), 1.0)))?;
    let prev = head_weights(k, d, |i, j| if i != j { 1.0 } else { 0.0 });
    let own = head_weights(k, d, |i, j| if i == j { 1.0 } else { 0.0 });
    let w_o = Matrix::from_triplets(
        2 * k,
        d,
        (0..k).flat_map(|i| [(i, lay.prev_feature(i), 1.0), (k + i, lay.self_feature(i), 1.0)]),
    )?;

    // W1 = W_A · W_B: W_A unmixes the two features, W_B sums them per pair.
    let hi = E / (E - 1.0);
    let lo = -1.0 / (E - 1.0);
    let w_a = Matrix::from_triplets(
        d,
        d,
        (0..k).flat_map(|i| {
            [
                (lay.prev_feature(i), lay.prev_feature(i), hi),
                (lay.prev_feature(i), lay.self_feature(i), lo),
                (lay.self_feature(i), lay.prev_feature(i), lo),
                (lay.self_feature(i), lay.self_feature(i), hi),
            ]
        }),
    )?;
    let w_b = Matrix::from_triplets(
        d,
        k * k,
        (0..k).flat_map(|i| {
            (0..k).flat_map(move |j| {
                [
                    (lay.prev_feature(i), i * k + j, 1.0),
                    (lay.self_feature(j), i * k + j, 1.0),
                ]
            })
        }),
    )?;
    let w1 = NumericFormat::Float53.matmul(&w_a, &w_b)?;
    let w2 = Matrix::from_triplets(k * k, d, (0..k * k).map(|p| (p, 3 * k + p, 1.0)))?;
    let output = Matrix::from_triplets(
        d,
        k,
        table
            .entries()
            .map(|(a, b, c)| (lay.pair(a.0, b.0), c.0, 1.0)),
    )?;

    let weights = TransformerWeights {
        embedding,
        layers: vec![LayerWeights {
            heads: vec![prev, own],
            w_o,
            w1,
            b1: vec![-1.0; k * k],
            w2,
            b2: vec![0.0; d],
        }],
        output,
    };
    Ok(Transformer::new(spec, weights, table.vocab().clone(), format)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::Vocabulary;

    fn xor() -> BinaryFnTable {
        let v = Vocabulary::new(["1", "2"]).unwrap();
        BinaryFnTable::from_fn(v, |a, b| TokenId(a.0 ^ b.0)).unwrap()
    }

    #[test]
    fn xor_reproduces_with_expected_width() {
        let m = compile_binary_fn(&xor(), NumericFormat::Float53).unwrap();
        assert_eq!(m.spec().d_model, 10);
        for (a, b, c) in xor().entries() {
            assert_eq!(m.next_token(&[a, b]).unwrap(), c);
        }
    }

    #[test]
    fn heads_match_closed_form() {
        let k = 3;
        let t = BinaryFnTable::from_fn(Vocabulary::new(["a", "b", "c"]).unwrap(), |a, _| a).unwrap();
        let m = compile_binary_fn(&t, NumericFormat::Float53).unwrap();
        for (a, b, _) in t.entries() {
            let x = m.embed(&[a, b]).unwrap();
            let heads = m.head_outputs(&x, 0).unwrap();
            let (p, s) = closed_form_heads(a, b, k);
            for i in 0..k {
                assert!((heads[0].get(1, i) - p[i]).abs() < 1e-15);
                assert!((heads[1].get(1, i) - s[i]).abs() < 1e-15);
            }
        }
    }
}
