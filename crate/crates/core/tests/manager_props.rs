use ctxlab::construct::{compile_binary_fn, BinaryFnTable};
use ctxlab::managers::{
    lag_step, AppendingManager, LagRule, Manager, ManagerState, Prompt, SummarizationManager, TwoCallManager,
};
use ctxlab::system::{run_system, MockTable, Mode, NextTokenSource, SystemConfig};
use ctxlab::{NumericFormat, TokenId, Vocabulary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn summary_vocab() -> Vocabulary {
    Vocabulary::new(["a", "b", "<s>", "<EOS>"]).unwrap()
}

fn append_vocab() -> Vocabulary {
    Vocabulary::new(["a", "b", "ε", "<EOS>"]).unwrap()
}

fn word(max: usize) -> impl Strategy<Value = Vec<TokenId>> {
    proptest::collection::vec((0usize..2).prop_map(TokenId), 0..=max)
}

/// Steps a manager against a source until it halts or `cap` steps pass,
/// returning every visited state and the window issued from it.
fn walk(m: &Manager, src: &dyn NextTokenSource, input: Vec<TokenId>, cap: usize) -> Vec<(ManagerState, Option<Vec<TokenId>>)> {
    let mut s = ManagerState::new(input);
    let mut out = Vec::new();
    for _ in 0..cap {
        match m.window(&s) {
            Prompt::Halt => {
                out.push((s.clone(), None));
                break;
            }
            Prompt::Window(w) => {
                out.push((s.clone(), Some(w.clone())));
                let x = src.next_token(&w).unwrap();
                s = m.update(&s, x);
                if s.is_halted() {
                    out.push((s.clone(), None));
                    break;
                }
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn summarization_window_and_length_bounds(
        seed in any::<u64>(),
        n in 4usize..=7,
        budget in 1usize..=2,
        x in word(12),
    ) {
        let v = summary_vocab();
        let outs = v.parse_tokens("a b a b <EOS>").unwrap();
        let src = MockTable::random(v.clone(), n, &outs, &mut ChaCha8Rng::seed_from_u64(seed));
        let m = Manager::Summarization(SummarizationManager::new(n, budget, &v).unwrap());
        let len = x.len();
        for (s, w) in walk(&m, &src, x, 300) {
            if let Some(w) = w {
                prop_assert!(w.len() <= n);
            }
            prop_assert!(s.r.len() <= len + n);
        }
    }

    #[test]
    fn appending_length_law(seed in any::<u64>(), n in 1usize..=4, x in word(10)) {
        let v = append_vocab();
        let outs = v.parse_tokens("a b ε a b <EOS>").unwrap();
        let src = MockTable::random(v.clone(), n, &outs, &mut ChaCha8Rng::seed_from_u64(seed));
        let m = Manager::Appending(AppendingManager::new(n, ["<EOS>"], &v).unwrap());
        let eps = v.id("ε").unwrap();
        let mut s = ManagerState::new(x);
        for _ in 0..100 {
            let Prompt::Window(w) = m.window(&s) else { break };
            prop_assert_eq!(w.len(), s.r.len().min(n));
            let t = src.next_token(&w).unwrap();
            let next = m.update(&s, t);
            if next.is_halted() {
                prop_assert_eq!(&next.r, &s.r);
                break;
            }
            let want = if t == eps { s.r.len() - 1 } else { s.r.len() };
            prop_assert_eq!(next.r.len(), want);
            s = next;
        }
    }

    #[test]
    fn halted_states_absorb(x in word(6), t in 0usize..4, style in 0usize..3) {
        let v = Vocabulary::new(["a", "b", "<s>", "<EOS>", "<1>", "<2>"]).unwrap();
        let m = match style {
            0 => Manager::Summarization(SummarizationManager::new(4, 1, &v).unwrap()),
            1 => Manager::Appending(AppendingManager::new(2, ["<EOS>"], &v).unwrap()),
            _ => Manager::TwoCall(TwoCallManager::new(["<EOS>"], &v).unwrap()),
        };
        let halted = m.halt(&ManagerState::new(x));
        prop_assert!(halted.is_halted());
        prop_assert_eq!(m.window(&halted), Prompt::Halt);
        let after = m.update(&halted, TokenId(t));
        prop_assert_eq!(&after.r, &halted.r);
        prop_assert!(after.is_halted());
        prop_assert_eq!(m.halt(&halted).r, halted.r);
    }

    #[test]
    fn compiled_rule_tracks_lag_steps(
        sigma in 2usize..=4,
        outputs in proptest::collection::vec(0usize..4, 16),
        x in proptest::collection::vec(0usize..4, 2..=8),
    ) {
        let names: Vec<String> = (0..sigma - 1).map(|i| format!("s{i}")).chain(["h".to_string()]).collect();
        let v = Vocabulary::new(&names).unwrap();
        let h = TokenId(sigma - 1);
        let f = |a: TokenId, b: TokenId| TokenId(outputs[a.0 * 4 + b.0] % sigma);
        let table = BinaryFnTable::from_fn(v.clone(), f).unwrap();
        let model = compile_binary_fn(&table, NumericFormat::Float53).unwrap();
        let rule = LagRule::from_fn(v.clone(), 2, 1, vec![h], |w| vec![f(w[0], w[1])]).unwrap();
        let m = Manager::Appending(AppendingManager::new(2, ["h"], &v).unwrap());
        let input: Vec<TokenId> = x.iter().map(|&t| TokenId(t % sigma)).collect();
        let mut sys = ManagerState::new(input.clone());
        let mut lag = ManagerState::new(input);
        for _ in 0..40 {
            if lag.is_halted() {
                break;
            }
            let Prompt::Window(w) = m.window(&sys) else { panic!("appending manager stopped early") };
            sys = m.update(&sys, model.next_token(&w).unwrap());
            lag = lag_step(&lag, &rule).unwrap();
            prop_assert_eq!(&sys.r, &lag.r);
            prop_assert_eq!(sys.is_halted(), lag.is_halted());
        }
    }

    #[test]
    fn traces_replay_and_stay_legal(seed in any::<u64>(), n in 4usize..=6, x in word(10)) {
        let v = summary_vocab();
        let outs = v.parse_tokens("a b <EOS>").unwrap();
        let src = MockTable::random(v.clone(), n, &outs, &mut ChaCha8Rng::seed_from_u64(seed));
        let m = Manager::Summarization(SummarizationManager::new(n, 1, &v).unwrap());
        let cfg = SystemConfig::new(m.clone(), Mode::Transduce).with_max_steps(150);
        let trace = run_system(&src, &cfg, &x).unwrap();
        let mut s = ManagerState::new(x.clone());
        for row in &trace.rows {
            prop_assert!(row.window.len() <= n);
            prop_assert_eq!(&m.window(&s), &Prompt::Window(row.window.clone()));
            s = m.update(&s, row.decoded);
            prop_assert_eq!(s.r.len(), row.r_len);
            prop_assert_eq!(s.phase, row.phase);
        }
        prop_assert_eq!(run_system(&src, &cfg, &x).unwrap(), trace);
    }
}

#[test]
fn traces_identical_across_threads() {
    let v = summary_vocab();
    let outs = v.parse_tokens("a b <EOS>").unwrap();
    let src = MockTable::random(v.clone(), 5, &outs, &mut ChaCha8Rng::seed_from_u64(9));
    let cfg = SystemConfig::new(Manager::Summarization(SummarizationManager::new(5, 1, &v).unwrap()), Mode::Transduce)
        .with_max_steps(200);
    let inputs: Vec<Vec<TokenId>> = (0..64u64)
        .map(|i| (0..(i % 11)).map(|j| TokenId(((i >> j) & 1) as usize)).collect())
        .collect();
    let serial: Vec<_> = inputs.iter().map(|x| run_system(&src, &cfg, x).unwrap()).collect();
    for threads in [2, 4, 8] {
        let chunk = inputs.len().div_ceil(threads);
        let parallel: Vec<_> = std::thread::scope(|s| {
            let hs: Vec<_> = inputs
                .chunks(chunk)
                .map(|c| s.spawn(|| c.iter().map(|x| run_system(&src, &cfg, x).unwrap()).collect::<Vec<_>>()))
                .collect();
            hs.into_iter().flat_map(|h| h.join().unwrap()).collect()
        });
        assert_eq!(parallel, serial);
    }
}
