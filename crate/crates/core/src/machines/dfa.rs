use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use super::transducer::{Step, TransducerSim};
use super::MachineError;
use crate::system::{Mode, Outcome, SystemError};
use crate::vocab::{TokenId, ACCEPT, EOS};

pub const DEFAULT_DFA_BOUND: usize = 1_000_000;

/// Decision class of an input word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DfaLabel {
    Accept,
    Reject,
    /// Halted on a token other than accept or reject.
    NoVerdict,
    Diverged,
}

impl DfaLabel {
    /// Class of a live system decision.
    pub fn of_decision(d: &Result<Outcome, SystemError>) -> Option<Self> {
        match d {
            Ok(Outcome::Accept) => Some(DfaLabel::Accept),
            Ok(Outcome::Reject) => Some(DfaLabel::Reject),
            Ok(Outcome::Diverged) => Some(DfaLabel::Diverged),
            Err(SystemError::NoVerdict(_)) => Some(DfaLabel::NoVerdict),
            Err(_) => None,
        }
    }
}

/// A complete Moore automaton over input tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedDfa {
    pub alphabet: Vec<TokenId>,
    pub labels: Vec<DfaLabel>,
    /// `trans[s][i]` is the successor of `s` on `alphabet[i]`.
    pub trans: Vec<Vec<usize>>,
    pub start: usize,
    /// Reachable transducer configurations before minimization.
    pub explored: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Config {
    /// Work-tape string while input is still wanted.
    Work(Vec<TokenId>),
    /// A verdict was emitted; later input is never read.
    Sink(TokenId),
}

/// Number of configurations extraction can possibly visit.
pub fn configuration_bound(vocab_size: usize, n: usize) -> usize {
    (0..n - 1).map(|l| vocab_size.saturating_pow(l as u32)).fold(2usize, usize::saturating_add)
}

struct Extractor<'s, 'a> {
    sim: &'s TransducerSim<'a>,
    finish: HashMap<Vec<TokenId>, DfaLabel>,
    accept: TokenId,
    eos: TokenId,
}

impl Extractor<'_, '_> {
    fn verdict(&self, x: TokenId) -> DfaLabel {
        if x == self.accept {
            DfaLabel::Accept
        } else if x == self.eos || !self.sim.is_verdict(x) {
            DfaLabel::NoVerdict
        } else {
            DfaLabel::Reject
        }
    }

    fn successor(&self, c: &Config, a: TokenId) -> Result<Config, MachineError> {
        let Config::Work(w) = c else {
            return Ok(c.clone());
        };
        let mut w = w.clone();
        w.push(a);
        if w.len() + 1 < self.sim.n() {
            return Ok(Config::Work(w));
        }
        Ok(match self.sim.step(&w)?.0 {
            Step::Halt(x) => Config::Sink(x),
            Step::Continue(next) => Config::Work(next),
        })
    }

    /// Outcome of running out of input in configuration `w`.
    fn finish(&mut self, w: &[TokenId]) -> Result<DfaLabel, MachineError> {
        if w.is_empty() {
            return Ok(DfaLabel::Reject);
        }
        let mut path: Vec<Vec<TokenId>> = Vec::new();
        let mut on_path: HashSet<Vec<TokenId>> = HashSet::new();
        let mut cur = w.to_vec();
        let label = loop {
            if let Some(&l) = self.finish.get(&cur) {
                break l;
            }
            if !on_path.insert(cur.clone()) {
                break DfaLabel::Diverged;
            }
            path.push(cur.clone());
            match self.sim.step(&cur)?.0 {
                Step::Halt(x) => break self.verdict(x),
                Step::Continue(next) => cur = next,
            }
        };
        for p in path {
            self.finish.insert(p, label);
        }
        Ok(label)
    }

    fn label(&mut self, c: &Config) -> Result<DfaLabel, MachineError> {
        match c {
            Config::Work(w) => self.finish(w),
            Config::Sink(x) => Ok(self.verdict(*x)),
        }
    }
}

/// Enumerates the reachable configurations of a decide-mode transducer
/// breadth first, labels each with the decision on end of input, and
/// returns the minimized automaton. Fails once more than `bound`
/// configurations are seen.
pub fn transducer_to_dfa(
    sim: &TransducerSim<'_>,
    alphabet: &[TokenId],
    bound: usize,
) -> Result<ExtractedDfa, MachineError> {
    if sim.mode() != Mode::Decide {
        return Err(MachineError::Invalid("DFA extraction needs decide mode".into()));
    }
    let v = sim.source().vocab();
    let mut ex = Extractor {
        sim,
        finish: HashMap::new(),
        accept: v.id(ACCEPT).map_err(|e| MachineError::Invalid(e.to_string()))?,
        eos: v.id(EOS).map_err(|e| MachineError::Invalid(e.to_string()))?,
    };
    let mut ids: HashMap<Config, usize> = HashMap::new();
    let mut configs: Vec<Config> = Vec::new();
    let mut queue = VecDeque::new();
    let start = Config::Work(Vec::new());
    ids.insert(start.clone(), 0);
    configs.push(start);
    queue.push_back(0);
    let mut trans: Vec<Vec<usize>> = Vec::new();
    while let Some(s) = queue.pop_front() {
        let mut row = Vec::with_capacity(alphabet.len());
        for &a in alphabet {
            let next = ex.successor(&configs[s], a)?;
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    if configs.len() >= bound {
                        return Err(MachineError::Bound(bound));
                    }
                    let id = configs.len();
                    ids.insert(next.clone(), id);
                    configs.push(next);
                    queue.push_back(id);
                    id
                }
            };
            row.push(id);
        }
        if trans.len() <= s {
            trans.resize(s + 1, Vec::new());
        }
        trans[s] = row;
    }
    let labels = configs
        .iter()
        .map(|c| ex.label(c))
        .collect::<Result<Vec<_>, _>>()?;
    let dfa = ExtractedDfa {
        alphabet: alphabet.to_vec(),
        labels,
        trans,
        start: 0,
        explored: configs.len(),
    };
    Ok(dfa.minimize())
}

impl ExtractedDfa {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn run(&self, input: &[TokenId]) -> Option<DfaLabel> {
        let mut s = self.start;
        for t in input {
            let i = self.alphabet.iter().position(|a| a == t)?;
            s = self.trans[s][i];
        }
        Some(self.labels[s])
    }

    /// Merges behaviourally equivalent states (Moore refinement); states are
    /// renumbered in breadth-first order from the start.
    pub fn minimize(&self) -> Self {
        let n = self.len();
        let mut block: Vec<usize> = self.labels.iter().map(|&l| l as usize).collect();
        loop {
            let mut sig_ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let sig = (block[s], self.trans[s].iter().map(|&t| block[t]).collect());
                    let k = sig_ids.len();
                    *sig_ids.entry(sig).or_insert(k)
                })
                .collect();
            let stable = sig_ids.len() == block.iter().collect::<HashSet<_>>().len();
            block = next;
            if stable {
                break;
            }
        }
        let mut order: HashMap<usize, usize> = HashMap::new();
        let mut reps: Vec<usize> = Vec::new();
        let mut queue = VecDeque::from([self.start]);
        order.insert(block[self.start], 0);
        reps.push(self.start);
        while let Some(s) = queue.pop_front() {
            for &t in &self.trans[s] {
                if let std::collections::hash_map::Entry::Vacant(e) = order.entry(block[t]) {
                    e.insert(reps.len());
                    reps.push(t);
                    queue.push_back(t);
                }
            }
        }
        Self {
            alphabet: self.alphabet.clone(),
            labels: reps.iter().map(|&s| self.labels[s]).collect(),
            trans: reps
                .iter()
                .map(|&s| self.trans[s].iter().map(|&t| order[&block[t]]).collect())
                .collect(),
            start: 0,
            explored: self.explored,
        }
    }

    /// Graphviz rendering; accepting states are double circles.
    pub fn to_dot(&self, names: impl Fn(TokenId) -> String) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  init [shape=point];\n");
        let _ = writeln!(out, "  init -> s{};", self.start);
        for (s, l) in self.labels.iter().enumerate() {
            let shape = if *l == DfaLabel::Accept { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  s{s} [shape={shape}, label=\"s{s}\\n{l:?}\"];");
        }
        for (s, row) in self.trans.iter().enumerate() {
            let mut by_target: Vec<(usize, Vec<String>)> = Vec::new();
            for (i, &t) in row.iter().enumerate() {
                let name = names(self.alphabet[i]).replace('"', "\\\"");
                match by_target.iter_mut().find(|(x, _)| *x == t) {
                    Some((_, v)) => v.push(name),
                    None => by_target.push((t, vec![name])),
                }
            }
            for (t, labels) in by_target {
                let _ = writeln!(out, "  s{s} -> s{t} [label=\"{}\"];", labels.join(","));
            }
        }
        out.push_str("}\n");
        out
    }
}
