use rand::Rng;

use super::{Check, CriterionReport, VerifyOptions};
use crate::construct::{compile_pair_fn, PairFnTable};
use crate::managers::{lag_step, LagRule, Manager, ManagerState, Prompt, TwoCallManager};
use crate::numerics::NumericFormat;
use crate::vocab::{TokenId, CONTROL_1, CONTROL_2};

const TABLES_PER_K: usize = 5;
const MACRO_STEPS: u64 = 100;

/// The compiled pair model under the two-call manager follows the (2,2)
/// rewriting trace exactly.
pub fn two_call_protocol(opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(8, "two-call-protocol");
    let mut rng = opts.rng(8);
    let mut runs = 0;
    for k in [2usize, 3] {
        for i in 0..TABLES_PER_K {
            let table = PairFnTable::random(k, &mut rng).expect("k ≥ 2");
            let model = match compile_pair_fn(&table, NumericFormat::Float53) {
                Ok(m) => m,
                Err(e) => return check.fail(format!("K={k} table {i}"), e.to_string()),
            };
            let v = model.vocab().clone();
            let (c1, c2) = (v.id(CONTROL_1).expect("<1>"), v.id(CONTROL_2).expect("<2>"));
            for (a, b, (o1, o2)) in table.entries() {
                for (c, want) in [(c1, o1), (c2, o2)] {
                    let got = model.next_token(&[c, a, b]).expect("forward");
                    if got != want {
                        return check.fail(
                            format!("K={k} table {i}"),
                            format!("window ({}, {}, {}) decodes {}", v.name(c), v.name(a), v.name(b), v.name(got)),
                        );
                    }
                }
            }
            let rule = LagRule::from_fn(v.clone(), 2, 2, vec![], |w| {
                if w.iter().all(|t| t.0 < k) {
                    let (o1, o2) = table.get(w[0], w[1]);
                    vec![o1, o2]
                } else {
                    Vec::new()
                }
            })
            .expect("valid rule");
            let manager = Manager::TwoCall(TwoCallManager::new(Vec::<&str>::new(), &v).expect("controls present"));
            let len = rng.gen_range(2..=6);
            let input: Vec<TokenId> = (0..len).map(|_| TokenId(rng.gen_range(0..k))).collect();
            let mut sys = ManagerState::new(input.clone());
            let mut lag = ManagerState::new(input);
            for step in 1..=MACRO_STEPS {
                for _ in 0..2 {
                    let Prompt::Window(w) = manager.window(&sys) else {
                        return check.fail(format!("K={k} table {i}"), format!("manager stopped at macro-step {step}"));
                    };
                    let x = model.next_token(&w).expect("forward");
                    sys = manager.update(&sys, x);
                }
                lag = lag_step(&lag, &rule).expect("rule applies");
                if sys.r != lag.r {
                    return check.fail(
                        format!("K={k} table {i}"),
                        format!("macro-step {step}: system [{}], lag [{}]", v.render(&sys.r), v.render(&lag.r)),
                    );
                }
            }
            runs += 1;
        }
    }
    check.pass(format!(
        "{runs} compiled tables over K in {{2,3}} correct on all pairs; {MACRO_STEPS} macro-steps each match the (2,2) trace"
    ))
}
