//! Verification suites: each criterion runs a construction against an
//! independent oracle and reports pass or fail with a witness.

mod causal;
mod lemma;
mod pair;
mod prop1;
mod prop2;
mod prop3;

pub use causal::causality;
pub use lemma::{closed_form_attention, binary_compile_soundness, precision_probe};
pub use pair::two_call_protocol;
pub use prop1::{transducer_equivalence, regularity_witness};
pub use prop2::space_law;
pub use prop3::{lba_pipeline, pipeline_system, Pipeline};

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::machines::{Fault, DEFAULT_DFA_BOUND};
use crate::vocab::TokenId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown suite `{0}`; expected one of lemma1, appendixC, prop1, prop2, prop3, causal")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub cap: u64,
    pub dfa_bound: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            cap: 200,
            dfa_bound: DEFAULT_DFA_BOUND,
            fault: None,
        }
    }
}

impl VerifyOptions {
    pub(crate) fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// First failing case, smallest first.
    pub counterexample: Option<String>,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )?;
        if let Some(c) = &self.counterexample {
            write!(f, "; counterexample: {c}")?;
        }
        Ok(())
    }
}

pub(crate) struct Check {
    id: u8,
    name: &'static str,
    start: Instant,
}

impl Check {
    pub(crate) fn new(id: u8, name: &'static str) -> Self {
        Self {
            id,
            name,
            start: Instant::now(),
        }
    }

    pub(crate) fn pass(self, detail: String) -> CriterionReport {
        self.report(true, detail, None)
    }

    pub(crate) fn fail(self, detail: String, counterexample: String) -> CriterionReport {
        self.report(false, detail, Some(counterexample))
    }

    pub(crate) fn report(
        self,
        passed: bool,
        detail: String,
        counterexample: Option<String>,
    ) -> CriterionReport {
        CriterionReport {
            id: self.id,
            name: self.name,
            passed,
            detail,
            counterexample,
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// Suite names with the criteria each runs.
pub const SUITES: &[(&str, &[u8])] = &[
    ("lemma1", &[1, 2, 3]),
    ("appendixC", &[8]),
    ("prop1", &[4, 5]),
    ("prop2", &[6]),
    ("prop3", &[7]),
    ("causal", &[9]),
];

pub fn run_criterion(id: u8, opts: &VerifyOptions) -> Option<CriterionReport> {
    Some(match id {
        1 => binary_compile_soundness(opts),
        2 => closed_form_attention(opts),
        3 => precision_probe(opts),
        4 => transducer_equivalence(opts),
        5 => regularity_witness(opts),
        6 => space_law(opts),
        7 => lba_pipeline(opts),
        8 => two_call_protocol(opts),
        9 => causality(opts),
        _ => return None,
    })
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<Vec<CriterionReport>, VerifyError> {
    let (_, ids) = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| VerifyError::UnknownSuite(name.to_string()))?;
    Ok(ids
        .iter()
        .map(|&id| run_criterion(id, opts).expect("known criterion"))
        .collect())
}

/// Every word over `alphabet` of length `0..=max`, shortest first.
pub fn all_words(alphabet: &[TokenId], max: usize) -> Vec<Vec<TokenId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max {
        frontier = frontier
            .iter()
            .flat_map(|w: &Vec<TokenId>| {
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

/// Order-preserving parallel map over scoped threads.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}
