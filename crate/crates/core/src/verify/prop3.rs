use std::collections::HashMap;
use std::sync::Mutex;

use super::{par_map, Check, CriterionReport, VerifyOptions};
use crate::construct::{compile_binary_fn, BinaryFnTable};
use crate::machines::builtin::{anbn, palindrome};
use crate::machines::{lba_to_lag, machine_run, Caps, LbaLag, MachineError, MachineSpec, Verdict};
use crate::managers::{lag_run, AppendingManager, Manager};
use crate::numerics::NumericFormat;
use crate::system::{decide, NextTokenSource, Mode, Outcome, SystemConfig, SystemError};
use crate::transformer::Transformer;
use crate::vocab::{TokenId, Vocabulary, ACCEPT, REJECT};

/// An LBA compiled down to a fixed system: its lag rule, the model
/// computing that rule and an appending manager with window 2.
pub struct Pipeline {
    pub lag: LbaLag,
    pub model: Transformer,
    pub config: SystemConfig,
}

impl Pipeline {
    pub fn decide(&self, input: &[usize]) -> Result<Outcome, SystemError> {
        let x = self.lag.encode(input).map_err(|e| SystemError::Config(e.to_string()))?;
        decide(&self.model, &self.config, &x)
    }
}

pub fn pipeline_system(
    machine: &MachineSpec,
    format: NumericFormat,
    max_steps: u64,
) -> Result<Pipeline, MachineError> {
    let invalid = |e: &dyn std::fmt::Display| MachineError::Invalid(e.to_string());
    let lag = lba_to_lag(machine)?;
    let rule = lag.rule();
    let table = BinaryFnTable::from_fn(lag.vocab().clone(), |a, b| {
        rule.apply_token(&[a, b]).expect("lag rule writes one token")
    })
    .map_err(|e| invalid(&e))?;
    let model = compile_binary_fn(&table, format).map_err(|e| invalid(&e))?;
    let manager = AppendingManager::new(2, [ACCEPT, REJECT], lag.vocab()).map_err(|e| invalid(&e))?;
    let config = SystemConfig::new(Manager::Appending(manager), Mode::Decide).with_max_steps(max_steps);
    Ok(Pipeline { lag, model, config })
}

/// Remembers every window the wrapped source has answered.
pub(crate) struct Memo<'a> {
    inner: &'a (dyn NextTokenSource + Sync),
    seen: Mutex<HashMap<Vec<TokenId>, TokenId>>,
}

impl<'a> Memo<'a> {
    pub(crate) fn new(inner: &'a (dyn NextTokenSource + Sync)) -> Self {
        Self {
            inner,
            seen: Mutex::new(HashMap::new()),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.seen.lock().expect("memo lock").len()
    }
}

impl NextTokenSource for Memo<'_> {
    fn vocab(&self) -> &Vocabulary {
        self.inner.vocab()
    }

    fn window(&self) -> usize {
        self.inner.window()
    }

    fn next_token(&self, window: &[TokenId]) -> Result<TokenId, SystemError> {
        if let Some(&t) = self.seen.lock().expect("memo lock").get(window) {
            return Ok(t);
        }
        let t = self.inner.next_token(window)?;
        self.seen.lock().expect("memo lock").insert(window.to_vec(), t);
        Ok(t)
    }

    fn scratch_cells(&self) -> usize {
        self.inner.scratch_cells()
    }
}

fn words(alphabet: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max {
        frontier = frontier
            .iter()
            .flat_map(|w: &Vec<usize>| {
                alphabet.iter().map(move |&a| {
                    let mut x = w.clone();
                    x.push(a);
                    x
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

fn check_machine(name: &str, m: &MachineSpec, max_len: usize) -> Result<String, String> {
    let max_steps = 10_000_000;
    let p = pipeline_system(m, NumericFormat::Float53, max_steps).map_err(|e| e.to_string())?;
    let memo = Memo::new(&p.model);
    let inputs = words(&m.input, max_len);
    let render = |x: &[usize]| x.iter().map(|&s| m.tape[s].as_str()).collect::<String>();
    let results = par_map(&inputs, |x| -> Result<bool, String> {
        let tm = machine_run(m, x, Caps::default()).map_err(|e| e.to_string())?.verdict;
        let encoded = p.lag.encode(x).map_err(|e| e.to_string())?;
        let lag_verdict = p.lag.verdict(&lag_run(p.lag.rule(), encoded.clone(), max_steps));
        let sys = match decide(&memo, &p.config, &encoded) {
            Ok(Outcome::Accept) => Verdict::Accept,
            Ok(Outcome::Reject) => Verdict::Reject,
            Ok(Outcome::Diverged) => Verdict::Cap,
            Err(e) => return Err(format!("{name} input `{}`: {e}", render(x))),
        };
        if tm != lag_verdict || tm != sys || tm == Verdict::Cap {
            return Err(format!(
                "{name} input `{}`: machine {tm:?}, lag {lag_verdict:?}, system {sys:?}",
                render(x)
            ));
        }
        Ok(tm == Verdict::Accept)
    });
    let mut accepted = 0;
    for r in results {
        accepted += usize::from(r?);
    }
    Ok(format!(
        "{name}: {} inputs, {accepted} accepted, K={}, {} distinct windows decoded",
        inputs.len(),
        p.lag.vocab().len(),
        memo.len()
    ))
}

/// Machine, lag interpreter and compiled fixed system agree on every short
/// input for two non-regular languages.
pub fn lba_pipeline(_opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(7, "lba-pipeline");
    let mut parts = Vec::new();
    for (name, m) in [("anbn", anbn()), ("palindrome", palindrome())] {
        match check_machine(name, &m, 8) {
            Ok(s) => parts.push(s),
            Err(e) => return check.fail(parts.join("; "), e),
        }
    }
    check.pass(parts.join("; "))
}
