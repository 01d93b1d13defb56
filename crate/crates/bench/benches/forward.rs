use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ctxlab::construct::{compile_binary_fn, BinaryFnTable};
use ctxlab::NumericFormat;
use ctxlab_bench::dense_model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn forward(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut g = c.benchmark_group("binary_forward");
    for k in [2, 4, 8, 16] {
        let t = BinaryFnTable::random(k, &mut rng).unwrap();
        for format in [NumericFormat::Float53, NumericFormat::fixed(24, 64).unwrap()] {
            let sparse = compile_binary_fn(&t, format).unwrap();
            let dense = dense_model(&sparse);
            let (a, b, _) = t.entries().last().unwrap();
            let tag = format!("{format:?}/K={k}");
            g.bench_with_input(BenchmarkId::new("sparse", &tag), &[a, b], |bch, x| {
                bch.iter(|| sparse.forward(x).unwrap())
            });
            g.bench_with_input(BenchmarkId::new("dense", &tag), &[a, b], |bch, x| {
                bch.iter(|| dense.forward(x).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, forward);
criterion_main!(benches);
