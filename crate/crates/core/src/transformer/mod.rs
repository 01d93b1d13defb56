//! Exact evaluator for fixed-weight decoder-only Transformers.
//!
//! One forward pass is embedding, then per layer masked multi-head
//! self-attention with a residual connection and a ReLU feed-forward block
//! with a residual connection, then a linear classification head. There is
//! no normalisation layer. Logits are produced for the last window position
//! and decoded greedily.

mod io;

pub use io::{read_weights, write_weights};

use rand::Rng;
use thiserror::Error;

use crate::numerics::{argmax_first, relu, Matrix, NumericError, NumericFormat};
use crate::vocab::{TokenId, VocabError, Vocabulary};

#[derive(Debug, Error)]
pub enum TransformerError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error("empty context window")]
    EmptyWindow,
    #[error("window of length {len} exceeds context length {max}")]
    WindowTooLong { len: usize, max: usize },
    #[error("token id {0} outside the vocabulary")]
    TokenOutOfRange(usize),
    #[error("malformed model: {0}")]
    Shape(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// How positions are exposed to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positional {
    None,
    /// One-hot position code in the last `width` channels of the residual stream.
    OneHot { width: usize },
}

/// Architecture hyper-parameters; fixes every weight shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformerSpec {
    pub vocab_size: usize,
    pub window: usize,
    pub d_model: usize,
    pub layers: usize,
    /// Per-head dimension of queries, keys and values.
    pub head_dims: Vec<usize>,
    pub ffn_hidden: usize,
    pub positional: Positional,
}

impl TransformerSpec {
    pub fn heads_width(&self) -> usize {
        self.head_dims.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadWeights {
    pub w_q: Matrix,
    pub w_k: Matrix,
    pub w_v: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub heads: Vec<HeadWeights>,
    /// Maps concatenated head outputs back into the residual stream.
    pub w_o: Matrix,
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformerWeights {
    pub embedding: Matrix,
    pub layers: Vec<LayerWeights>,
    /// Classification head, `d_model × vocab_size`.
    pub output: Matrix,
}

impl TransformerWeights {
    /// Dense weights with every entry uniform in `[-scale, scale]`.
    pub fn random(spec: &TransformerSpec, scale: f64, rng: &mut impl Rng) -> Self {
        let zeros = Self::zeros(spec);
        let mut fill = |m: &Matrix| {
            let data = (0..m.rows() * m.cols())
                .map(|_| rng.gen_range(-scale..=scale))
                .collect();
            Matrix::from_vec(m.rows(), m.cols(), data).expect("shape from template")
        };
        let embedding = fill(&zeros.embedding);
        let layers = zeros
            .layers
            .iter()
            .map(|l| LayerWeights {
                heads: l
                    .heads
                    .iter()
                    .map(|h| HeadWeights {
                        w_q: fill(&h.w_q),
                        w_k: fill(&h.w_k),
                        w_v: fill(&h.w_v),
                    })
                    .collect(),
                w_o: fill(&l.w_o),
                w1: fill(&l.w1),
                b1: fill(&Matrix::zeros(1, l.b1.len())).row(0),
                w2: fill(&l.w2),
                b2: fill(&Matrix::zeros(1, l.b2.len())).row(0),
            })
            .collect();
        let output = fill(&zeros.output);
        Self {
            embedding,
            layers,
            output,
        }
    }

    /// All-zero weights of the right shapes for `spec`.
    pub fn zeros(spec: &TransformerSpec) -> Self {
        let d = spec.d_model;
        let layers = (0..spec.layers)
            .map(|_| LayerWeights {
                heads: spec
                    .head_dims
                    .iter()
                    .map(|&h| HeadWeights {
                        w_q: Matrix::zeros(d, h),
                        w_k: Matrix::zeros(d, h),
                        w_v: Matrix::zeros(d, h),
                    })
                    .collect(),
                w_o: Matrix::zeros(spec.heads_width(), d),
                w1: Matrix::zeros(d, spec.ffn_hidden),
                b1: vec![0.0; spec.ffn_hidden],
                w2: Matrix::zeros(spec.ffn_hidden, d),
                b2: vec![0.0; d],
            })
            .collect();
        Self {
            embedding: Matrix::zeros(spec.vocab_size, d),
            layers,
            output: Matrix::zeros(d, spec.vocab_size),
        }
    }

    fn check(&self, spec: &TransformerSpec) -> Result<(), TransformerError> {
        let d = spec.d_model;
        let expect = |what: &str, m: &Matrix, shape: (usize, usize)| {
            if m.shape() == shape {
                Ok(())
            } else {
                Err(TransformerError::Shape(format!(
                    "{what} has shape {:?}, expected {shape:?}",
                    m.shape()
                )))
            }
        };
        expect("embedding", &self.embedding, (spec.vocab_size, d))?;
        expect("output head", &self.output, (d, spec.vocab_size))?;
        if self.layers.len() != spec.layers {
            return Err(TransformerError::Shape(format!(
                "{} layers present, {} declared",
                self.layers.len(),
                spec.layers
            )));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.heads.len() != spec.head_dims.len() {
                return Err(TransformerError::Shape(format!("layer {l}: head count")));
            }
            for (h, (hw, &dh)) in layer.heads.iter().zip(&spec.head_dims).enumerate() {
                expect(&format!("layer {l} head {h} W_Q"), &hw.w_q, (d, dh))?;
                expect(&format!("layer {l} head {h} W_K"), &hw.w_k, (d, dh))?;
                expect(&format!("layer {l} head {h} W_V"), &hw.w_v, (d, dh))?;
            }
            expect(&format!("layer {l} W_O"), &layer.w_o, (spec.heads_width(), d))?;
            expect(&format!("layer {l} W_1"), &layer.w1, (d, spec.ffn_hidden))?;
            expect(&format!("layer {l} W_2"), &layer.w2, (spec.ffn_hidden, d))?;
            if layer.b1.len() != spec.ffn_hidden || layer.b2.len() != d {
                return Err(TransformerError::Shape(format!("layer {l}: bias length")));
            }
        }
        Ok(())
    }

    fn quantize(&self, fmt: NumericFormat) -> Result<Self, NumericError> {
        let q = |m: &Matrix| m.try_map(|x| fmt.round(x));
        let qv = |v: &[f64]| v.iter().map(|&x| fmt.round(x)).collect::<Result<Vec<_>, _>>();
        let layers = self
            .layers
            .iter()
            .map(|l| {
                Ok(LayerWeights {
                    heads: l
                        .heads
                        .iter()
                        .map(|h| {
                            Ok(HeadWeights {
                                w_q: q(&h.w_q)?,
                                w_k: q(&h.w_k)?,
                                w_v: q(&h.w_v)?,
                            })
                        })
                        .collect::<Result<_, NumericError>>()?,
                    w_o: q(&l.w_o)?,
                    w1: q(&l.w1)?,
                    b1: qv(&l.b1)?,
                    w2: q(&l.w2)?,
                    b2: qv(&l.b2)?,
                })
            })
            .collect::<Result<_, NumericError>>()?;
        Ok(Self {
            embedding: q(&self.embedding)?,
            layers,
            output: q(&self.output)?,
        })
    }
}

/// Last-position scores over the vocabulary.
pub type Logits = Vec<f64>;

/// Greedy decoding rule: lowest-index maximiser.
pub fn greedy_decode(logits: &[f64]) -> TokenId {
    TokenId(argmax_first(logits))
}

/// A fixed model: architecture, weights rounded into one numeric format,
/// and the vocabulary naming its token ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformer {
    spec: TransformerSpec,
    weights: TransformerWeights,
    vocab: Vocabulary,
    format: NumericFormat,
}

impl Transformer {
    pub fn new(
        spec: TransformerSpec,
        weights: TransformerWeights,
        vocab: Vocabulary,
        format: NumericFormat,
    ) -> Result<Self, TransformerError> {
        if spec.window == 0 {
            return Err(TransformerError::Shape("window must be at least 1".into()));
        }
        if vocab.len() != spec.vocab_size {
            return Err(TransformerError::Shape(format!(
                "vocabulary has {} names, model has {} tokens",
                vocab.len(),
                spec.vocab_size
            )));
        }
        if let Positional::OneHot { width } = spec.positional {
            if width < spec.window || width > spec.d_model {
                return Err(TransformerError::Shape(format!(
                    "positional width {width} must cover the window and fit in d_model"
                )));
            }
        }
        weights.check(&spec)?;
        let weights = weights.quantize(format)?;
        Ok(Self {
            spec,
            weights,
            vocab,
            format,
        })
    }

    /// The same model with its weights re-rounded into `format`.
    pub fn with_format(&self, format: NumericFormat) -> Result<Self, TransformerError> {
        Ok(Self {
            spec: self.spec.clone(),
            weights: self.weights.quantize(format)?,
            vocab: self.vocab.clone(),
            format,
        })
    }

    pub fn spec(&self) -> &TransformerSpec {
        &self.spec
    }

    pub fn weights(&self) -> &TransformerWeights {
        &self.weights
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn format(&self) -> NumericFormat {
        self.format
    }

    /// Scalars held live during one forward pass; the opaque workspace a
    /// machine simulating this model must reserve.
    pub fn scratch_cells(&self) -> usize {
        let s = &self.spec;
        s.window * (2 * s.d_model + 3 * s.heads_width() + s.ffn_hidden + s.window) + s.vocab_size
    }

    pub fn embed(&self, tokens: &[TokenId]) -> Result<Matrix, TransformerError> {
        if tokens.is_empty() {
            return Err(TransformerError::EmptyWindow);
        }
        if tokens.len() > self.spec.window {
            return Err(TransformerError::WindowTooLong {
                len: tokens.len(),
                max: self.spec.window,
            });
        }
        let mut x = Matrix::zeros(tokens.len(), self.spec.d_model);
        for (t, tok) in tokens.iter().enumerate() {
            if tok.0 >= self.spec.vocab_size {
                return Err(TransformerError::TokenOutOfRange(tok.0));
            }
            for (j, v) in self.weights.embedding.row_nonzeros(tok.0) {
                x.set(t, j, v);
            }
            if let Positional::OneHot { width } = self.spec.positional {
                x.set(t, self.spec.d_model - width + t, 1.0);
            }
        }
        Ok(x)
    }

    fn layer(&self, layer: usize) -> Result<&LayerWeights, TransformerError> {
        self.weights
            .layers
            .get(layer)
            .ok_or_else(|| TransformerError::Shape(format!("no layer {layer}")))
    }

    fn check_stream(&self, x: &Matrix) -> Result<(), TransformerError> {
        if x.cols() != self.spec.d_model || x.rows() == 0 || x.rows() > self.spec.window {
            return Err(TransformerError::Shape(format!(
                "residual stream of shape {:?} for d_model {} and window {}",
                x.shape(),
                self.spec.d_model,
                self.spec.window
            )));
        }
        Ok(())
    }

    /// Causally masked attention probabilities of one head (`rows × rows`).
    pub fn attention_probs(
        &self,
        x: &Matrix,
        layer: usize,
        head: usize,
    ) -> Result<Matrix, TransformerError> {
        self.check_stream(x)?;
        let f = self.format;
        let hw = self
            .layer(layer)?
            .heads
            .get(head)
            .ok_or_else(|| TransformerError::Shape(format!("no head {head}")))?;
        let q = f.matmul(x, &hw.w_q)?;
        let k = f.matmul(x, &hw.w_k)?;
        let scores = f.matmul(&q, &k.transpose())?;
        let scale = (self.spec.head_dims[head] as f64).sqrt();
        let scores = f.div_scalar(&scores, scale)?;
        let n = x.rows();
        let mut probs = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut row = scores.row(i);
            row.iter_mut().skip(i + 1).for_each(|s| *s = f64::NEG_INFINITY);
            probs.extend(f.softmax_row(&row)?);
        }
        Ok(Matrix::from_vec(n, n, probs)?)
    }

    /// Per-head attention outputs, each `rows × d_h`.
    pub fn head_outputs(&self, x: &Matrix, layer: usize) -> Result<Vec<Matrix>, TransformerError> {
        let f = self.format;
        self.layer(layer)?
            .heads
            .iter()
            .enumerate()
            .map(|(h, hw)| {
                let p = self.attention_probs(x, layer, h)?;
                let v = f.matmul(x, &hw.w_v)?;
                Ok(f.matmul(&p, &v)?)
            })
            .collect()
    }

    /// `x + Concat_h(head_h) W_O`.
    pub fn attention_layer(&self, x: &Matrix, layer: usize) -> Result<Matrix, TransformerError> {
        let f = self.format;
        let heads = self.head_outputs(x, layer)?;
        let concat = Matrix::hcat(&heads)?;
        let mixed = f.matmul(&concat, &self.layer(layer)?.w_o)?;
        Ok(f.add_matrix(x, &mixed)?)
    }

    /// `ReLU(z W_1 + 1 b_1ᵀ)`.
    pub fn ffn_hidden(&self, z: &Matrix, layer: usize) -> Result<Matrix, TransformerError> {
        self.check_stream(z)?;
        let f = self.format;
        let l = self.layer(layer)?;
        let pre = f.add_row_bias(&f.matmul(z, &l.w1)?, &l.b1)?;
        Ok(relu(&pre))
    }

    /// `z + ReLU(z W_1 + 1 b_1ᵀ) W_2 + 1 b_2ᵀ`.
    pub fn ffn(&self, z: &Matrix, layer: usize) -> Result<Matrix, TransformerError> {
        let f = self.format;
        let l = self.layer(layer)?;
        let hidden = self.ffn_hidden(z, layer)?;
        let out = f.add_row_bias(&f.matmul(&hidden, &l.w2)?, &l.b2)?;
        Ok(f.add_matrix(z, &out)?)
    }

    /// Final residual stream after all layers.
    pub fn residual_stream(&self, tokens: &[TokenId]) -> Result<Matrix, TransformerError> {
        let mut x = self.embed(tokens)?;
        for l in 0..self.spec.layers {
            let z = self.attention_layer(&x, l)?;
            x = self.ffn(&z, l)?;
        }
        Ok(x)
    }

    /// Logits at every position (`rows × vocab`).
    pub fn logits_all(&self, tokens: &[TokenId]) -> Result<Matrix, TransformerError> {
        let x = self.residual_stream(tokens)?;
        Ok(self.format.matmul(&x, &self.weights.output)?)
    }

    /// Logits at the last position.
    pub fn forward(&self, tokens: &[TokenId]) -> Result<Logits, TransformerError> {
        let x = self.residual_stream(tokens)?;
        let last = x.slice_rows(x.rows() - 1, x.rows());
        Ok(self.format.matmul(&last, &self.weights.output)?.row(0))
    }

    pub fn next_token(&self, window: &[TokenId]) -> Result<TokenId, TransformerError> {
        Ok(greedy_decode(&self.forward(window)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec(layers: usize) -> TransformerSpec {
        TransformerSpec {
            vocab_size: 3,
            window: 4,
            d_model: 4,
            layers,
            head_dims: vec![2, 2],
            ffn_hidden: 3,
            positional: Positional::None,
        }
    }

    fn vocab3() -> Vocabulary {
        Vocabulary::new(["x", "y", "z"]).unwrap()
    }

    #[test]
    fn zero_model_decodes_token_zero() {
        let spec = tiny_spec(1);
        let w = TransformerWeights::zeros(&spec);
        let t = Transformer::new(spec, w, vocab3(), NumericFormat::Float53).unwrap();
        assert_eq!(t.forward(&[TokenId(2)]).unwrap(), vec![0.0; 3]);
        assert_eq!(t.next_token(&[TokenId(2)]).unwrap(), TokenId(0));
    }

    #[test]
    fn zero_ffn_is_identity() {
        let spec = tiny_spec(1);
        let mut w = TransformerWeights::zeros(&spec);
        w.embedding = Matrix::from_rows(&[
            vec![1.0, 0.5, 0.0, 2.0],
            vec![0.0, 1.0, -1.0, 0.0],
            vec![3.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let t = Transformer::new(spec, w, vocab3(), NumericFormat::Float53).unwrap();
        let z = t.embed(&[TokenId(0), TokenId(2)]).unwrap();
        assert_eq!(t.ffn(&z, 0).unwrap(), z);
    }

    #[test]
    fn embed_errors() {
        let spec = tiny_spec(0);
        let t = Transformer::new(spec.clone(), TransformerWeights::zeros(&spec), vocab3(), NumericFormat::Float53)
            .unwrap();
        assert!(matches!(t.embed(&[]), Err(TransformerError::EmptyWindow)));
        assert!(matches!(
            t.embed(&[TokenId(0); 5]),
            Err(TransformerError::WindowTooLong { len: 5, max: 4 })
        ));
        assert!(matches!(t.embed(&[TokenId(3)]), Err(TransformerError::TokenOutOfRange(3))));
    }

    #[test]
    fn positional_block_written() {
        let mut spec = tiny_spec(0);
        spec.positional = Positional::OneHot { width: 4 };
        let t = Transformer::new(spec.clone(), TransformerWeights::zeros(&spec), vocab3(), NumericFormat::Float53)
            .unwrap();
        let x = t.embed(&[TokenId(0), TokenId(1), TokenId(1)]).unwrap();
        assert_eq!(x.row(2), vec![0.0, 0.0, 1.0, 0.0]);
        let mut bad = tiny_spec(0);
        bad.positional = Positional::OneHot { width: 2 };
        assert!(Transformer::new(bad.clone(), TransformerWeights::zeros(&bad), vocab3(), NumericFormat::Float53)
            .is_err());
    }

    #[test]
    fn shape_validation() {
        let spec = tiny_spec(1);
        let mut w = TransformerWeights::zeros(&spec);
        w.layers[0].w_o = Matrix::zeros(3, 4);
        assert!(matches!(
            Transformer::new(spec, w, vocab3(), NumericFormat::Float53),
            Err(TransformerError::Shape(_))
        ));
    }

    #[test]
    fn uniform_logits_tie_to_zero() {
        assert_eq!(greedy_decode(&[0.25; 5]), TokenId(0));
    }
}
