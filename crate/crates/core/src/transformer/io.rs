//! Plain-text weight files.
//!
//! ```text
//! transformer-weights 1
//! format float53
//! tokens a b c
//! window 2
//! d_model 15
//! layers 1
//! heads 3 3
//! ffn_hidden 9
//! positional none
//! matrix embedding 3 15 sparse 3
//! 0 0 1.0
//! ...
//! vector layer0.b1 9
//! -1.0 -1.0 ...
//! end
//! ```
//!
//! Scalars are written in shortest round-trip decimal form, so reading a
//! file back reproduces every weight bit for bit.

use std::fmt::Write as _;

use super::{
    HeadWeights, LayerWeights, Positional, Transformer, TransformerError, TransformerSpec,
    TransformerWeights,
};
use crate::numerics::{Matrix, NumericFormat};
use crate::vocab::Vocabulary;

const MAGIC: &str = "transformer-weights 1";

fn fmt_scalar(x: f64) -> String {
    format!("{x:?}")
}

fn write_matrix(out: &mut String, name: &str, m: &Matrix) {
    let (r, c) = m.shape();
    if m.is_sparse() || m.nnz() * 4 < r * c {
        let trips = m.triplets();
        let _ = writeln!(out, "matrix {name} {r} {c} sparse {}", trips.len());
        for (i, j, v) in trips {
            let _ = writeln!(out, "{i} {j} {}", fmt_scalar(v));
        }
    } else {
        let _ = writeln!(out, "matrix {name} {r} {c} dense");
        for i in 0..r {
            let row: Vec<String> = m.row(i).into_iter().map(fmt_scalar).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
}

fn write_vector(out: &mut String, name: &str, v: &[f64]) {
    let _ = writeln!(out, "vector {name} {}", v.len());
    let row: Vec<String> = v.iter().map(|&x| fmt_scalar(x)).collect();
    let _ = writeln!(out, "{}", row.join(" "));
}

pub fn write_weights(model: &Transformer) -> String {
    let spec = model.spec();
    let w = model.weights();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "format {}", model.format());
    let _ = writeln!(out, "tokens {}", model.vocab().names().join(" "));
    let _ = writeln!(out, "window {}", spec.window);
    let _ = writeln!(out, "d_model {}", spec.d_model);
    let _ = writeln!(out, "layers {}", spec.layers);
    let dims: Vec<String> = spec.head_dims.iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "heads {}", dims.join(" "));
    let _ = writeln!(out, "ffn_hidden {}", spec.ffn_hidden);
    match spec.positional {
        Positional::None => {
            let _ = writeln!(out, "positional none");
        }
        Positional::OneHot { width } => {
            let _ = writeln!(out, "positional onehot {width}");
        }
    }
    write_matrix(&mut out, "embedding", &w.embedding);
    for (l, layer) in w.layers.iter().enumerate() {
        for (h, hw) in layer.heads.iter().enumerate() {
            write_matrix(&mut out, &format!("layer{l}.head{h}.wq"), &hw.w_q);
            write_matrix(&mut out, &format!("layer{l}.head{h}.wk"), &hw.w_k);
            write_matrix(&mut out, &format!("layer{l}.head{h}.wv"), &hw.w_v);
        }
        write_matrix(&mut out, &format!("layer{l}.wo"), &layer.w_o);
        write_matrix(&mut out, &format!("layer{l}.w1"), &layer.w1);
        write_vector(&mut out, &format!("layer{l}.b1"), &layer.b1);
        write_matrix(&mut out, &format!("layer{l}.w2"), &layer.w2);
        write_vector(&mut out, &format!("layer{l}.b2"), &layer.b2);
    }
    write_matrix(&mut out, "output", &w.output);
    let _ = writeln!(out, "end");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> TransformerError {
        TransformerError::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str, TransformerError> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let l = l.trim();
            if !l.is_empty() && !l.starts_with('#') {
                return Ok(l);
            }
        }
        Err(self.err("unexpected end of file"))
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>, TransformerError> {
        let l = self.next()?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(parts.collect())
    }

    fn usize_field(&mut self, key: &str) -> Result<usize, TransformerError> {
        let v = self.keyed(key)?;
        match v.as_slice() {
            [x] => x.parse().map_err(|_| self.err(format!("bad integer for `{key}`"))),
            _ => Err(self.err(format!("`{key}` takes one value"))),
        }
    }

    fn scalar(&self, s: &str) -> Result<f64, TransformerError> {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.err(format!("bad scalar `{s}`")))
    }

    fn index(&self, s: &str) -> Result<usize, TransformerError> {
        s.parse().map_err(|_| self.err(format!("bad index `{s}`")))
    }

    fn matrix(&mut self, name: &str) -> Result<Matrix, TransformerError> {
        let head = self.keyed("matrix")?;
        if head.first() != Some(&name) || head.len() < 4 {
            return Err(self.err(format!("expected matrix `{name}`")));
        }
        let rows = self.index(head[1])?;
        let cols = self.index(head[2])?;
        match head[3] {
            "dense" => {
                let mut data = Vec::with_capacity(rows * cols);
                for _ in 0..rows {
                    let l = self.next()?;
                    let row = l
                        .split_whitespace()
                        .map(|s| self.scalar(s))
                        .collect::<Result<Vec<_>, _>>()?;
                    if row.len() != cols {
                        return Err(self.err(format!("row of `{name}` needs {cols} entries")));
                    }
                    data.extend(row);
                }
                Matrix::from_vec(rows, cols, data).map_err(|e| self.err(e.to_string()))
            }
            "sparse" => {
                let nnz = self.index(head.get(4).ok_or_else(|| self.err("missing nnz"))?)?;
                let mut trips = Vec::with_capacity(nnz);
                for _ in 0..nnz {
                    let l = self.next()?;
                    let p: Vec<&str> = l.split_whitespace().collect();
                    if p.len() != 3 {
                        return Err(self.err("sparse entry needs `row col value`"));
                    }
                    trips.push((self.index(p[0])?, self.index(p[1])?, self.scalar(p[2])?));
                }
                Matrix::from_triplets(rows, cols, trips).map_err(|e| self.err(e.to_string()))
            }
            other => Err(self.err(format!("unknown storage `{other}`"))),
        }
    }

    fn vector(&mut self, name: &str) -> Result<Vec<f64>, TransformerError> {
        let head = self.keyed("vector")?;
        if head.first() != Some(&name) || head.len() != 2 {
            return Err(self.err(format!("expected vector `{name}`")));
        }
        let n = self.index(head[1])?;
        let l = if n == 0 { "" } else { self.next()? };
        let v = l
            .split_whitespace()
            .map(|s| self.scalar(s))
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() != n {
            return Err(self.err(format!("vector `{name}` needs {n} entries")));
        }
        Ok(v)
    }
}

pub fn read_weights(text: &str) -> Result<Transformer, TransformerError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    if lines.next()? != MAGIC {
        return Err(lines.err("not a transformer weight file"));
    }
    let fmt_field = lines.keyed("format")?;
    let format: NumericFormat = fmt_field
        .first()
        .ok_or_else(|| lines.err("missing format"))?
        .parse()
        .map_err(|e: crate::numerics::NumericError| lines.err(e.to_string()))?;
    let tokens = lines.keyed("tokens")?;
    let vocab = Vocabulary::new(tokens).map_err(|e| lines.err(e.to_string()))?;
    let window = lines.usize_field("window")?;
    let d_model = lines.usize_field("d_model")?;
    let layers = lines.usize_field("layers")?;
    let head_dims = lines
        .keyed("heads")?
        .into_iter()
        .map(|s| lines.index(s))
        .collect::<Result<Vec<_>, _>>()?;
    let ffn_hidden = lines.usize_field("ffn_hidden")?;
    let positional = match lines.keyed("positional")?.as_slice() {
        ["none"] => Positional::None,
        ["onehot", w] => Positional::OneHot {
            width: lines.index(w)?,
        },
        _ => return Err(lines.err("positional must be `none` or `onehot W`")),
    };
    let spec = TransformerSpec {
        vocab_size: vocab.len(),
        window,
        d_model,
        layers,
        head_dims,
        ffn_hidden,
        positional,
    };
    let embedding = lines.matrix("embedding")?;
    let mut layer_weights = Vec::with_capacity(layers);
    for l in 0..layers {
        let heads = (0..spec.head_dims.len())
            .map(|h| {
                Ok(HeadWeights {
                    w_q: lines.matrix(&format!("layer{l}.head{h}.wq"))?,
                    w_k: lines.matrix(&format!("layer{l}.head{h}.wk"))?,
                    w_v: lines.matrix(&format!("layer{l}.head{h}.wv"))?,
                })
            })
            .collect::<Result<Vec<_>, TransformerError>>()?;
        layer_weights.push(LayerWeights {
            heads,
            w_o: lines.matrix(&format!("layer{l}.wo"))?,
            w1: lines.matrix(&format!("layer{l}.w1"))?,
            b1: lines.vector(&format!("layer{l}.b1"))?,
            w2: lines.matrix(&format!("layer{l}.w2"))?,
            b2: lines.vector(&format!("layer{l}.b2"))?,
        });
    }
    let output = lines.matrix("output")?;
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    let weights = TransformerWeights {
        embedding,
        layers: layer_weights,
        output,
    };
    Transformer::new(spec, weights, vocab, format)
}
