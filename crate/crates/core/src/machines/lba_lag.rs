use std::collections::HashMap;

use super::{MachineError, MachineSpec, Move, Verdict};
use crate::managers::{LagOutcome, LagRule, LagRun};
use crate::vocab::{TokenId, Vocabulary, ACCEPT, REJECT};

/// Cell symbols of the lag encoding of an LBA configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellSymbol {
    Plain(usize),
    /// The head in state `q` over a symbol.
    Head(usize, usize),
    /// The head mid right-move, holding its new symbol until the shift
    /// wave comes round.
    Wait(usize, usize),
    /// A cell of the shift wave: `(new content, content carried left)`.
    Wave(usize, usize),
    Accept,
    Reject,
}

/// A (2,1) lag rule simulating an LBA, with its symbol table.
///
/// The tape `▷ x ◁` is held as a cycle. A left move hands the head to the
/// left neighbour in one update. A right move instead rotates the whole
/// cycle one cell left: a wave travels leftward around the cycle, each cell
/// taking its right neighbour's content, while the head waits in place for
/// the wave to arrive from its right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbaLag {
    machine: MachineSpec,
    rule: LagRule,
    symbols: Vec<CellSymbol>,
    index: HashMap<CellSymbol, TokenId>,
}

impl LbaLag {
    pub fn rule(&self) -> &LagRule {
        &self.rule
    }

    pub fn machine(&self) -> &MachineSpec {
        &self.machine
    }

    pub fn vocab(&self) -> &Vocabulary {
        self.rule.vocab()
    }

    pub fn symbol(&self, t: TokenId) -> CellSymbol {
        self.symbols[t.0]
    }

    pub fn token(&self, s: CellSymbol) -> TokenId {
        self.index[&s]
    }

    /// `▷ (q₀, x₁) x₂ … x_n ◁`; empty input becomes `▷ (q₀, ␣) ◁`.
    pub fn encode(&self, input: &[usize]) -> Result<Vec<TokenId>, MachineError> {
        let m = &self.machine;
        for &s in input {
            if !m.input.contains(&s) {
                return Err(MachineError::Input(m.tape[s].clone()));
            }
        }
        let (tape, head) = m.initial_tape(input);
        Ok(tape
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                self.token(if i == head {
                    CellSymbol::Head(m.start, s)
                } else {
                    CellSymbol::Plain(s)
                })
            })
            .collect())
    }

    /// Recovers `(tape, head, state)` from a string holding a settled
    /// configuration, applying a pending halting write. `None` while a
    /// right move is in flight.
    pub fn decode(&self, r: &[TokenId]) -> Option<(Vec<usize>, usize, usize)> {
        let m = &self.machine;
        let left = CellSymbol::Plain(m.left_end()?);
        let start = r.iter().position(|&t| self.symbol(t) == left)?;
        let mut tape = Vec::with_capacity(r.len());
        let mut head = None;
        for i in 0..r.len() {
            match self.symbol(r[(start + i) % r.len()]) {
                CellSymbol::Plain(s) => tape.push(s),
                CellSymbol::Head(q, s) => {
                    head = Some((i, q));
                    tape.push(s);
                }
                _ => return None,
            }
        }
        let (h, mut q) = head?;
        if let Some(t) = m.delta(q, tape[h]) {
            if m.is_halting(t.next) {
                tape[h] = t.write;
                q = t.next;
            }
        }
        Some((tape, h, q))
    }

    /// Machine verdict of a lag run.
    pub fn verdict(&self, run: &LagRun) -> Verdict {
        match run.outcome {
            LagOutcome::Halted(t) if self.symbol(t) == CellSymbol::Accept => Verdict::Accept,
            LagOutcome::Halted(_) => Verdict::Reject,
            LagOutcome::Cap | LagOutcome::TooShort => Verdict::Cap,
        }
    }
}

fn symbol_name(m: &MachineSpec, s: CellSymbol) -> String {
    match s {
        CellSymbol::Plain(x) => m.tape[x].clone(),
        CellSymbol::Head(q, x) => format!("({},{})", m.states[q], m.tape[x]),
        CellSymbol::Wait(q, x) => format!("({},{})'", m.states[q], m.tape[x]),
        CellSymbol::Wave(c, a) => format!("[{}/{}]", m.tape[c], m.tape[a]),
        CellSymbol::Accept => ACCEPT.to_string(),
        CellSymbol::Reject => REJECT.to_string(),
    }
}

fn content(s: CellSymbol, blank: usize) -> usize {
    match s {
        CellSymbol::Plain(c) | CellSymbol::Head(_, c) | CellSymbol::Wait(_, c) | CellSymbol::Wave(c, _) => c,
        CellSymbol::Accept | CellSymbol::Reject => blank,
    }
}

fn rewrite(m: &MachineSpec, x: CellSymbol, y: CellSymbol) -> CellSymbol {
    use CellSymbol::*;
    let verdict = |q: usize| if q == m.accept { Accept } else { Reject };
    let c = |s| content(s, m.blank);
    match (x, y) {
        (Accept | Reject, _) => x,
        (Head(q, s), _) => {
            let t = m.delta(q, s).expect("non-halting state is total");
            match t.mv {
                _ if m.is_halting(t.next) => verdict(t.next),
                Move::L => Plain(t.write),
                Move::R => Wait(t.next, c(y)),
            }
        }
        (_, Head(q, s)) => {
            let t = m.delta(q, s).expect("non-halting state is total");
            match t.mv {
                _ if m.is_halting(t.next) => verdict(t.next),
                Move::L => Head(t.next, c(x)),
                Move::R => Wave(t.write, c(x)),
            }
        }
        (Wait(q, s), Wave(..)) => Head(q, s),
        (Wait(..), _) => x,
        (Wave(nc, _), _) => Plain(nc),
        (_, Wave(_, a)) => Wave(a, c(x)),
        _ => x,
    }
}

/// Compiles an LBA into a (2,1) lag rule over cell symbols whose run on
/// [`LbaLag::encode`] emits `accept` or `reject` exactly when the machine
/// halts that way.
pub fn lba_to_lag(m: &MachineSpec) -> Result<LbaLag, MachineError> {
    if !m.lba {
        return Err(MachineError::NotLba);
    }
    for name in [ACCEPT, REJECT] {
        if m.symbol(name).is_some() {
            return Err(MachineError::Invalid(format!("tape symbol `{name}` is reserved")));
        }
    }
    let gamma = m.tape.len();
    let live: Vec<usize> = (0..m.states.len()).filter(|&q| !m.is_halting(q)).collect();
    let mut symbols: Vec<CellSymbol> = (0..gamma).map(CellSymbol::Plain).collect();
    for &q in &live {
        symbols.extend((0..gamma).map(|x| CellSymbol::Head(q, x)));
    }
    for &q in &live {
        symbols.extend((0..gamma).map(|x| CellSymbol::Wait(q, x)));
    }
    for c in 0..gamma {
        symbols.extend((0..gamma).map(|a| CellSymbol::Wave(c, a)));
    }
    symbols.push(CellSymbol::Accept);
    symbols.push(CellSymbol::Reject);
    let names: Vec<String> = symbols.iter().map(|&s| symbol_name(m, s)).collect();
    let vocab = Vocabulary::new(&names).map_err(|e| MachineError::Invalid(e.to_string()))?;
    let index: HashMap<CellSymbol, TokenId> = symbols
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, TokenId(i)))
        .collect();
    let halting = vec![index[&CellSymbol::Accept], index[&CellSymbol::Reject]];
    let rule = LagRule::from_fn(vocab, 2, 1, halting, |w| {
        vec![index[&rewrite(m, symbols[w[0].0], symbols[w[1].0])]]
    })
    .map_err(|e| MachineError::Invalid(e.to_string()))?;
    Ok(LbaLag {
        machine: m.clone(),
        rule,
        symbols,
        index,
    })
}
