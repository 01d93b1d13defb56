use ctxlab::construct::{compile_binary_fn, compile_pair_fn, BinaryFnTable, BinaryLayout, PairFnTable};
use ctxlab::numerics::compensated_sum;
use ctxlab::transformer::{Positional, TransformerSpec, TransformerWeights};
use ctxlab::{Matrix, NumericFormat, TokenId, Transformer, Vocabulary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(v: usize, n: usize, layers: usize) -> TransformerSpec {
    TransformerSpec {
        vocab_size: v,
        window: n,
        d_model: n + 6,
        layers,
        head_dims: vec![3, 2],
        ffn_hidden: 7,
        positional: Positional::OneHot { width: n },
    }
}

fn model(seed: u64, format: NumericFormat) -> Transformer {
    let s = spec(5, 6, 2);
    let w = TransformerWeights::random(&s, 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
    let v = Vocabulary::new((0..5).map(|i| format!("t{i}"))).unwrap();
    Transformer::new(s, w, v, format).unwrap()
}

fn format() -> impl Strategy<Value = NumericFormat> {
    prop_oneof![Just(NumericFormat::Float53), Just(NumericFormat::fixed(18, 64).unwrap())]
}

fn tokens() -> impl Strategy<Value = Vec<TokenId>> {
    proptest::collection::vec((0usize..5).prop_map(TokenId), 1..=6)
}

proptest! {
    #[test]
    fn earlier_logits_ignore_the_suffix(
        seed in 0u64..50,
        f in format(),
        x in tokens(),
        y in tokens(),
        cut in 1usize..6,
    ) {
        let m = model(seed, f);
        let p = cut.min(x.len());
        let mut z = x[..p].to_vec();
        z.extend(y.iter().take(6 - p));
        let lx = m.logits_all(&x).unwrap();
        let lz = m.logits_all(&z).unwrap();
        for i in 0..p {
            for j in 0..5 {
                prop_assert_eq!(lx.get(i, j).to_bits(), lz.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn attention_rows_are_distributions(seed in 0u64..50, f in format(), x in tokens()) {
        let m = model(seed, f);
        let e = m.embed(&x).unwrap();
        let tol = match f {
            NumericFormat::Float53 => 4.0 * f64::EPSILON,
            NumericFormat::Fixed { frac_bits, .. } => 4.0 * 2f64.powi(-(frac_bits as i32)),
        };
        for head in 0..2 {
            let p = m.attention_probs(&e, 0, head).unwrap();
            for i in 0..x.len() {
                let row = p.row(i);
                prop_assert!(row.iter().all(|&v| v >= 0.0));
                prop_assert!(row[i + 1..].iter().all(|&v| v == 0.0));
                prop_assert!((compensated_sum(&row) - 1.0).abs() <= tol);
            }
        }
    }

    #[test]
    fn zero_blocks_reduce_to_output_head(seed in 0u64..50, x in tokens()) {
        let s = spec(5, 6, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let random = TransformerWeights::random(&s, 1.0, &mut rng);
        let mut w = TransformerWeights::zeros(&s);
        w.embedding = random.embedding.clone();
        w.output = random.output.clone();
        let v = Vocabulary::new((0..5).map(|i| format!("t{i}"))).unwrap();
        let m = Transformer::new(s, w, v, NumericFormat::Float53).unwrap();
        let want = NumericFormat::Float53.matmul(&m.embed(&x).unwrap(), &m.weights().output).unwrap();
        let got = m.logits_all(&x).unwrap();
        prop_assert_eq!(got, want);
    }
}

fn tables() -> Vec<BinaryFnTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (2..=5)
        .flat_map(|k| (0..4).map(move |_| k))
        .map(|k| BinaryFnTable::random(k, &mut rng).unwrap())
        .collect()
}

#[test]
fn binary_compile_logits_are_one_hot() {
    for t in tables() {
        let m = compile_binary_fn(&t, NumericFormat::Float53).unwrap();
        for (a, b, c) in t.entries() {
            let l = m.forward(&[a, b]).unwrap();
            for (j, v) in l.iter().enumerate() {
                let want = if j == c.0 { 1.0 } else { 0.0 };
                assert!((v - want).abs() <= 1e-6, "K={} ({a:?},{b:?})", t.k());
            }
        }
    }
}

#[test]
fn binary_compile_block_discipline() {
    for t in tables() {
        let k = t.k();
        let layout = BinaryLayout { k };
        let m = compile_binary_fn(&t, NumericFormat::Float53).unwrap();
        let w = m.weights();
        assert_eq!(m.spec().d_model, 3 * k + k * k);
        for a in 0..k {
            for j in 0..layout.d_model() {
                let want = if j == layout.token(a) { 1.0 } else { 0.0 };
                assert_eq!(w.embedding.get(a, j), want);
            }
        }
        for i in 0..layout.d_model() {
            let in_pair = (3 * k..3 * k + k * k).contains(&i);
            for c in 0..k {
                if !in_pair {
                    assert_eq!(w.output.get(i, c), 0.0);
                }
            }
        }
        for (a, b, c) in t.entries() {
            assert_eq!(w.output.get(layout.pair(a.0, b.0), c.0), 1.0);
        }
    }
}

#[test]
fn binary_compile_indicator_is_one_hot() {
    for t in tables() {
        let m = compile_binary_fn(&t, NumericFormat::Float53).unwrap();
        for (a, b, _) in t.entries() {
            let x = m.embed(&[a, b]).unwrap();
            let z = m.attention_layer(&x, 0).unwrap();
            let h = m.ffn_hidden(&z, 0).unwrap().row(1);
            let hot: Vec<usize> = (0..h.len()).filter(|&i| h[i] > 1e-9).collect();
            assert_eq!(hot.len(), 1, "K={} ({a:?},{b:?}): {h:?}", t.k());
            assert!((h[hot[0]] - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn pair_compilation_is_verified() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in [2, 3, 4] {
        let t = PairFnTable::random(k, &mut rng).unwrap();
        let m = compile_pair_fn(&t, NumericFormat::Float53).unwrap();
        let v = m.vocab();
        let (c1, c2) = (v.id("<1>").unwrap(), v.id("<2>").unwrap());
        for (a, b, (o1, o2)) in t.entries() {
            assert_eq!(m.next_token(&[c1, a, b]).unwrap(), o1);
            assert_eq!(m.next_token(&[c2, a, b]).unwrap(), o2);
        }
    }
}

#[test]
fn matrix_shapes_follow_spec() {
    let m = model(0, NumericFormat::Float53);
    let l = &m.weights().layers[0];
    assert_eq!(l.w_o.shape(), (5, 12));
    assert_eq!(l.w1.shape(), (12, 7));
    assert_eq!(m.weights().output.shape(), (12, 5));
    let _: &Matrix = &m.weights().embedding;
}
