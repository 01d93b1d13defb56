use ctxlab::construct::{compile_binary_fn, BinaryFnTable};
use ctxlab::numerics::{argmax_first, compensated_sum};
use ctxlab::{Matrix, NumericFormat};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formats() -> impl Strategy<Value = NumericFormat> {
    prop_oneof![
        Just(NumericFormat::Float53),
        (8u32..=30).prop_map(|f| NumericFormat::fixed(f, 64).unwrap()),
    ]
}

fn ulp(f: NumericFormat) -> f64 {
    match f {
        NumericFormat::Float53 => f64::EPSILON,
        NumericFormat::Fixed { frac_bits, .. } => 2f64.powi(-(frac_bits as i32)),
    }
}

fn sparse_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec((0..rows, 0..cols, -4i32..=4), 0..rows * cols)
        .prop_map(move |t| {
            Matrix::from_triplets(rows, cols, t.into_iter().map(|(i, j, v)| (i, j, v as f64 * 0.25))).unwrap()
        })
}

proptest! {
    #[test]
    fn softmax_sums_to_one(f in formats(), v in proptest::collection::vec(-20.0f64..20.0, 1..=64)) {
        let v: Vec<f64> = v.iter().map(|&x| f.round(x).unwrap()).collect();
        let p = f.softmax_row(&v).unwrap();
        let total = compensated_sum(&p);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((total - 1.0).abs() <= 4.0 * ulp(f), "sum {total}");
    }

    #[test]
    fn evaluation_is_deterministic(f in formats(), a in sparse_matrix(4, 5), b in sparse_matrix(5, 3)) {
        let x = f.matmul(&a.to_dense(), &b.to_dense()).unwrap();
        let y = f.matmul(&a.to_dense(), &b.to_dense()).unwrap();
        for i in 0..4 {
            for j in 0..3 {
                prop_assert_eq!(x.get(i, j).to_bits(), y.get(i, j).to_bits());
            }
        }
        let s = f.softmax_row(&x.row(0)).unwrap();
        prop_assert_eq!(s, f.softmax_row(&y.row(0)).unwrap());
    }

    #[test]
    fn sparse_products_equal_dense_bitwise(f in formats(), a in sparse_matrix(5, 6), b in sparse_matrix(6, 4)) {
        let dense = f.matmul(&a.to_dense(), &b.to_dense()).unwrap();
        for (x, y) in [(&a, &b), (&a.to_dense(), &b), (&a, &b.to_dense())] {
            let got = f.matmul(x, y).unwrap();
            for i in 0..5 {
                for j in 0..4 {
                    prop_assert_eq!(got.get(i, j).to_bits(), dense.get(i, j).to_bits());
                }
            }
        }
    }
}

/// Fixed point with at least 20 fraction bits picks the same token as
/// float53 on every compiled binary-function logit row.
#[test]
fn fixed_and_float_agree_on_binary_compile_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 2..=5 {
        for _ in 0..3 {
            let t = BinaryFnTable::random(k, &mut rng).unwrap();
            let float = compile_binary_fn(&t, NumericFormat::Float53).unwrap();
            for frac in [20, 24, 32] {
                let fixed = float.with_format(NumericFormat::fixed(frac, 64).unwrap()).unwrap();
                for (a, b, _) in t.entries() {
                    let lf = float.forward(&[a, b]).unwrap();
                    let lx = fixed.forward(&[a, b]).unwrap();
                    let pf = NumericFormat::Float53.softmax_row(&lf).unwrap();
                    let px = fixed.format().softmax_row(&lx).unwrap();
                    assert_eq!(argmax_first(&pf), argmax_first(&px), "K={k} frac={frac}");
                }
            }
        }
    }
}
