use super::{all_words, par_map, Check, CriterionReport, VerifyOptions};
use crate::machines::{configuration_bound, transducer_to_dfa, DfaLabel, TransducerSim};
use crate::managers::{Manager, SummarizationManager};
use crate::system::{decide, run_system, HaltReason, MockTable, Mode, NextTokenSource, SystemConfig};
use crate::vocab::{TokenId, Vocabulary};

const MOCKS: usize = 10;

fn summarizer(v: &Vocabulary, n: usize, mode: Mode, cap: u64) -> SystemConfig {
    let m = SummarizationManager::new(n, 1, v).expect("valid window");
    SystemConfig::new(Manager::Summarization(m), mode).with_max_steps(cap)
}

fn render_reason(v: &Vocabulary, r: &HaltReason) -> String {
    match r {
        HaltReason::Token(t) => format!("token {}", v.name(*t)),
        HaltReason::Exhausted => "exhausted".into(),
        HaltReason::Cap => "cap".into(),
    }
}

/// Compares the three-tape transducer with the live summarization system.
fn first_mismatch(
    mock: &MockTable,
    n: usize,
    words: &[Vec<TokenId>],
    opts: &VerifyOptions,
) -> Option<(Vec<TokenId>, String)> {
    let v = mock.vocab();
    let cfg = summarizer(v, n, Mode::Transduce, opts.cap);
    let mut sim = TransducerSim::new(mock, n, Mode::Transduce).expect("valid simulator");
    if let Some(f) = opts.fault {
        sim = sim.with_fault(f);
    }
    for x in words {
        let live = run_system(mock, &cfg, x);
        let tm = sim.run(x, opts.cap);
        let problem = match (live, tm) {
            (Ok(l), Ok(t)) => {
                if l.reason != t.reason || l.output != t.output {
                    Some(format!(
                        "system {} output [{}], transducer {} output [{}]",
                        render_reason(v, &l.reason),
                        v.render(&l.output),
                        render_reason(v, &t.reason),
                        v.render(&t.output)
                    ))
                } else if !t.head_monotone() {
                    Some("input head moved left".into())
                } else if t.peak_cell > sim.work_tape_len() {
                    Some(format!("wrote cell {} beyond {}", t.peak_cell, sim.work_tape_len()))
                } else {
                    None
                }
            }
            (l, t) => Some(format!("system {:?}, transducer {:?}", l.err(), t.err())),
        };
        if let Some(p) = problem {
            return Some((x.clone(), p));
        }
    }
    None
}

/// The single-work-tape transducer reproduces the summarization system on
/// every short input for seeded mock models.
pub fn transducer_equivalence(opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(4, "transducer-equivalence");
    let v = Vocabulary::new(["a", "b", "<s>", "<EOS>"]).expect("distinct names");
    let ids = |s: &str| v.parse_tokens(s).expect("known tokens");
    let outputs = ids("a b <EOS>");
    let alphabet = ids("a b");
    let words = all_words(&alphabet, 10);
    let mut rng = opts.rng(4);
    let cases: Vec<(usize, usize, MockTable)> = [4usize, 6]
        .iter()
        .flat_map(|&n| (0..MOCKS).map(move |i| (n, i)))
        .map(|(n, i)| (n, i, MockTable::random(v.clone(), n, &outputs, &mut rng)))
        .collect();
    let found = par_map(&cases, |(n, i, mock)| {
        first_mismatch(mock, *n, &words, opts).map(|(x, p)| (x, *n, *i, p))
    });
    let detail = format!(
        "N in {{4,6}}, {} mocks each, {} inputs of length <= 10, cap {}",
        MOCKS,
        words.len(),
        opts.cap
    );
    match found.into_iter().flatten().min_by_key(|(x, ..)| x.len()) {
        None => check.pass(detail),
        Some((x, n, i, p)) => check.fail(
            detail,
            format!("N={n} mock {i} input [{}]: {p}", v.render(&x)),
        ),
    }
}

/// Extracted automata agree with the live system on every input of length
/// at most 12 and stay within the configuration bound.
pub fn regularity_witness(opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(5, "regularity-witness");
    let n = 4;
    let max_len = 12;
    let v = Vocabulary::new(["a", "b", "<s>", "<EOS>", "accept", "reject"]).expect("distinct names");
    let ids = |s: &str| v.parse_tokens(s).expect("known tokens");
    let outputs = ids("a b a b accept reject");
    let alphabet = ids("a b");
    let words = all_words(&alphabet, max_len);
    let bound = configuration_bound(v.len(), n);
    let cap = (bound + max_len + 2) as u64;
    let mut rng = opts.rng(5);
    let mocks: Vec<MockTable> = (0..5)
        .map(|_| MockTable::random(v.clone(), n, &outputs, &mut rng))
        .collect();
    let cfg = summarizer(&v, n, Mode::Decide, cap);
    let results = par_map(&mocks, |mock| -> Result<(usize, usize), String> {
        let sim = TransducerSim::new(mock, n, Mode::Decide).map_err(|e| e.to_string())?;
        let dfa = transducer_to_dfa(&sim, &alphabet, opts.dfa_bound).map_err(|e| e.to_string())?;
        if dfa.explored > bound {
            return Err(format!("{} configurations exceed the bound {bound}", dfa.explored));
        }
        for x in &words {
            let live = DfaLabel::of_decision(&decide(mock, &cfg, x));
            let got = dfa.run(x);
            if live != got {
                return Err(format!("input [{}]: system {live:?}, automaton {got:?}", v.render(x)));
            }
        }
        Ok((dfa.len(), dfa.explored))
    });
    let mut sizes = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => sizes.push(s),
            Err(e) => return check.fail(format!("mock {i}"), e),
        }
    }
    let states: Vec<String> = sizes.iter().map(|(m, e)| format!("{m}/{e}")).collect();
    check.pass(format!(
        "5 mocks, N={n}, {} inputs; minimized/explored states {} (bound {bound})",
        words.len(),
        states.join(" ")
    ))
}
