//! Helpers shared by the benchmarks under `benches/`.

use ctxlab::transformer::{HeadWeights, LayerWeights, TransformerWeights};
use ctxlab::Transformer;

/// Copy of `w` with every matrix in dense storage.
pub fn densify(w: &TransformerWeights) -> TransformerWeights {
    TransformerWeights {
        embedding: w.embedding.to_dense(),
        layers: w
            .layers
            .iter()
            .map(|l| LayerWeights {
                heads: l
                    .heads
                    .iter()
                    .map(|h| HeadWeights {
                        w_q: h.w_q.to_dense(),
                        w_k: h.w_k.to_dense(),
                        w_v: h.w_v.to_dense(),
                    })
                    .collect(),
                w_o: l.w_o.to_dense(),
                w1: l.w1.to_dense(),
                b1: l.b1.clone(),
                w2: l.w2.to_dense(),
                b2: l.b2.clone(),
            })
            .collect(),
        output: w.output.to_dense(),
    }
}

/// The same model evaluated through dense matrices.
pub fn dense_model(m: &Transformer) -> Transformer {
    Transformer::new(m.spec().clone(), densify(m.weights()), m.vocab().clone(), m.format()).expect("valid model")
}
