use rand::Rng;

use super::{Check, CriterionReport, VerifyOptions};
use crate::numerics::NumericFormat;
use crate::transformer::{Positional, Transformer, TransformerSpec, TransformerWeights};
use crate::vocab::{TokenId, Vocabulary};

const TRIALS: usize = 1000;
const MODELS: usize = 10;

fn random_model(rng: &mut impl Rng, format: NumericFormat) -> Transformer {
    let vocab_size = rng.gen_range(3..=8);
    let window = rng.gen_range(4..=10);
    let spec = TransformerSpec {
        vocab_size,
        window,
        d_model: window + rng.gen_range(4..=8),
        layers: rng.gen_range(1..=3),
        head_dims: (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(2..=4)).collect(),
        ffn_hidden: rng.gen_range(4..=12),
        positional: Positional::OneHot { width: window },
    };
    let weights = TransformerWeights::random(&spec, 1.0, rng);
    let vocab = Vocabulary::new((0..vocab_size).map(|i| format!("t{i}"))).expect("distinct names");
    Transformer::new(spec, weights, vocab, format).expect("consistent shapes")
}

/// Rewriting the suffix of a window from position `p` on leaves the logits
/// of positions before `p` bit-identical.
pub fn causality(opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(9, "causality");
    let mut rng = opts.rng(9);
    let models: Vec<Transformer> = (0..MODELS)
        .map(|i| {
            let format = if i % 2 == 0 {
                NumericFormat::Float53
            } else {
                NumericFormat::Fixed { frac_bits: 16, total_bits: 64 }
            };
            random_model(&mut rng, format)
        })
        .collect();
    let mut rows_compared = 0;
    for trial in 0..TRIALS {
        let m = &models[trial % MODELS];
        let (v, n) = (m.spec().vocab_size, m.spec().window);
        let len = rng.gen_range(2..=n);
        let x: Vec<TokenId> = (0..len).map(|_| TokenId(rng.gen_range(0..v))).collect();
        let p = rng.gen_range(1..len);
        let mut y = x[..p].to_vec();
        let tail = rng.gen_range(1..=n - p);
        y.extend((0..tail).map(|_| TokenId(rng.gen_range(0..v))));
        let (lx, ly) = match (m.logits_all(&x), m.logits_all(&y)) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => return check.fail(format!("trial {trial}"), format!("{:?} {:?}", a.err(), b.err())),
        };
        for i in 0..p {
            for j in 0..v {
                if lx.get(i, j).to_bits() != ly.get(i, j).to_bits() {
                    return check.fail(
                        format!("trial {trial}"),
                        format!("row {i} logit {j} changed: {} vs {}", lx.get(i, j), ly.get(i, j)),
                    );
                }
            }
            rows_compared += 1;
        }
    }
    check.pass(format!(
        "{TRIALS} suffix perturbations over {MODELS} random models (float53 and fixed 16/64); {rows_compared} earlier rows bit-identical"
    ))
}
