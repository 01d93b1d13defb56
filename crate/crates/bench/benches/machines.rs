use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ctxlab::machines::{builtin, lba_to_lag, TransducerSim};
use ctxlab::managers::lag_run;
use ctxlab::system::{MockTable, Mode};
use ctxlab::{TokenId, Vocabulary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lag(c: &mut Criterion) {
    let m = builtin::anbn();
    let lag = lba_to_lag(&m).unwrap();
    let mut g = c.benchmark_group("lag_run_anbn");
    for n in [4, 8, 16] {
        let word = format!("{}{}", "a".repeat(n), "b".repeat(n));
        let input = lag.encode(&m.parse_input(&word).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(2 * n), &input, |b, x| {
            b.iter(|| lag_run(lag.rule(), x.clone(), 10_000_000))
        });
    }
    g.finish();
}

fn transducer(c: &mut Criterion) {
    let v = Vocabulary::new(["a", "b", "<s>", "<EOS>"]).unwrap();
    let outs = v.parse_tokens("a b a b <EOS>").unwrap();
    let mut g = c.benchmark_group("transducer_run");
    for n in [4, 6, 8] {
        let src = MockTable::random(v.clone(), n, &outs, &mut ChaCha8Rng::seed_from_u64(n as u64));
        let sim = TransducerSim::new(&src, n, Mode::Transduce).unwrap();
        let x: Vec<TokenId> = (0..32).map(|i| TokenId(i % 2)).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| sim.run(x, 10_000).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, lag, transducer);
criterion_main!(benches);
