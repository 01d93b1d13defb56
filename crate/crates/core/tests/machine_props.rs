use ctxlab::machines::{builtin, configuration_bound, lba_to_lag, transducer_to_dfa, DfaLabel, TransducerSim};
use ctxlab::managers::{lag_step, Manager, ManagerState, SummarizationManager};
use ctxlab::system::{decide, run_system, MockTable, Mode, SystemConfig};
use ctxlab::verify::{all_words, par_map};
use ctxlab::{TokenId, Vocabulary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vocab(sigma: usize) -> Vocabulary {
    let base = ["a", "b", "c"];
    Vocabulary::new(base[..sigma].iter().copied().chain(["<s>", "<EOS>", "accept", "reject"])).unwrap()
}

fn mock(sigma: usize, n: usize, seed: u64, decide_mode: bool) -> MockTable {
    let v = vocab(sigma);
    let mut outs: Vec<TokenId> = (0..sigma).map(TokenId).collect();
    outs.extend(outs.clone());
    let extra = if decide_mode { "accept reject" } else { "<EOS>" };
    outs.extend(v.parse_tokens(extra).unwrap());
    MockTable::random(v, n, &outs, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn summarizer(v: &Vocabulary, n: usize, mode: Mode, cap: u64) -> SystemConfig {
    SystemConfig::new(Manager::Summarization(SummarizationManager::new(n, 1, v).unwrap()), mode).with_max_steps(cap)
}

proptest! {
    #[test]
    fn transducer_matches_system(
        seed in any::<u64>(),
        sigma in 2usize..=3,
        n in 3usize..=6,
        x in proptest::collection::vec(0usize..3, 0..=12),
    ) {
        let src = mock(sigma, n, seed, false);
        let x: Vec<TokenId> = x.into_iter().map(|t| TokenId(t % sigma)).collect();
        let cfg = summarizer(&vocab(sigma), n, Mode::Transduce, 300);
        let sim = TransducerSim::new(&src, n, Mode::Transduce).unwrap();
        let live = run_system(&src, &cfg, &x).unwrap();
        let tm = sim.run(&x, 300).unwrap();
        prop_assert_eq!(tm.reason, live.reason);
        prop_assert_eq!(&tm.output, &live.output);
        prop_assert_eq!(tm.steps, live.steps());
        prop_assert!(tm.head_monotone());
        prop_assert!(tm.peak_cell <= n + 1 + sim.workspace_size());
    }

    #[test]
    fn dfa_agrees_with_live_system(seed in any::<u64>(), sigma in 2usize..=3, n in 3usize..=5) {
        let src = mock(sigma, n, seed, true);
        let v = vocab(sigma);
        let alphabet: Vec<TokenId> = (0..sigma).map(TokenId).collect();
        let sim = TransducerSim::new(&src, n, Mode::Decide).unwrap();
        let dfa = transducer_to_dfa(&sim, &alphabet, 1_000_000).unwrap();
        let bound = configuration_bound(v.len(), n);
        prop_assert!(dfa.explored <= bound);
        let cfg = summarizer(&v, n, Mode::Decide, (bound + 10) as u64);
        for x in all_words(&alphabet, 7) {
            prop_assert_eq!(dfa.run(&x), DfaLabel::of_decision(&decide(&src, &cfg, &x)), "{:?}", x);
        }
    }
}

#[test]
fn dfa_exhaustive_to_length_12_over_three_letters() {
    let n = 4;
    let src = mock(3, n, 2024, true);
    let v = vocab(3);
    let alphabet: Vec<TokenId> = (0..3).map(TokenId).collect();
    let sim = TransducerSim::new(&src, n, Mode::Decide).unwrap();
    let dfa = transducer_to_dfa(&sim, &alphabet, 1_000_000).unwrap();
    let cfg = summarizer(&v, n, Mode::Decide, (configuration_bound(v.len(), n) + 14) as u64);
    let words = all_words(&alphabet, 12);
    let bad = par_map(&words, |x| dfa.run(x) != DfaLabel::of_decision(&decide(&src, &cfg, x)));
    assert_eq!(bad.iter().position(|&b| b).map(|i| &words[i]), None);
}

#[test]
fn lag_runs_preserve_length() {
    for m in [builtin::anbn(), builtin::palindrome()] {
        let lag = lba_to_lag(&m).unwrap();
        let inputs: Vec<Vec<usize>> = ["", "a", "ab", "aabb", "abba", "abab", "aaabbb"]
            .iter()
            .map(|w| m.parse_input(w).unwrap())
            .collect();
        for x in inputs {
            let mut s = ManagerState::new(lag.encode(&x).unwrap());
            let len = x.len().max(1) + 2;
            assert_eq!(s.r.len(), len);
            while !s.is_halted() {
                s = lag_step(&s, lag.rule()).unwrap();
                assert_eq!(s.r.len(), len);
            }
        }
    }
}
