use super::MachineError;
use crate::system::{HaltReason, Mode, NextTokenSource};
use crate::vocab::{TokenId, ACCEPT, EOS, REJECT, SUMMARY};

/// Deliberate defects for checking that the verification suites notice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The summarization prompt overwrites cell 1 with `<s>` instead of
    /// shifting the tape right first.
    BrokenShift,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransducerRun {
    pub reason: HaltReason,
    /// Written to the output tape at halt: `r` without control tokens.
    pub output: Vec<TokenId>,
    /// Decoding calls made.
    pub steps: u64,
    /// Highest work-tape cell ever written (1-based).
    pub peak_cell: usize,
    /// Input-head position before each step.
    pub head_positions: Vec<usize>,
}

impl TransducerRun {
    pub fn head_monotone(&self) -> bool {
        self.head_positions.windows(2).all(|p| p[0] <= p[1])
    }
}

/// Three-tape machine simulating a summarization system with budget 1:
/// a one-way read-only input tape, a work tape holding at most `N` string
/// cells, the marker `#` in cell `N+1` and then a fixed workspace, and a
/// write-only output tape.
///
/// The maintained string is the work-tape prefix followed by the unread
/// input. Each step first copies input in until `N−1` cells are filled or
/// the input is exhausted. With `N−1` cells filled it shifts them right,
/// writes `<s>` in cell 1, decodes, and keeps only the decoded token in
/// cell 1. Otherwise it decodes on the cells as they are and writes the
/// token after them.
pub struct TransducerSim<'a> {
    source: &'a dyn NextTokenSource,
    n: usize,
    mode: Mode,
    summary: TokenId,
    eos: TokenId,
    verdicts: Option<(TokenId, TokenId)>,
    fault: Option<Fault>,
}

/// Result of one simulated decoding step on a work string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Step {
    Continue(Vec<TokenId>),
    Halt(TokenId),
}

impl<'a> TransducerSim<'a> {
    pub fn new(source: &'a dyn NextTokenSource, n: usize, mode: Mode) -> Result<Self, MachineError> {
        let v = source.vocab();
        let need = |name: &str| {
            v.get(name)
                .ok_or_else(|| MachineError::Invalid(format!("vocabulary lacks `{name}`")))
        };
        if n < 3 || n > source.window() {
            return Err(MachineError::Invalid(format!(
                "window N = {n} must be at least 3 and fit the source window {}",
                source.window()
            )));
        }
        let verdicts = match mode {
            Mode::Decide => Some((need(ACCEPT)?, need(REJECT)?)),
            Mode::Transduce => None,
        };
        Ok(Self {
            source,
            n,
            mode,
            summary: need(SUMMARY)?,
            eos: need(EOS)?,
            verdicts,
            fault: None,
        })
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn source(&self) -> &dyn NextTokenSource {
        self.source
    }

    /// Cells reserved after the marker: a window copy plus the source's
    /// scratch.
    pub fn workspace_size(&self) -> usize {
        self.n + self.source.scratch_cells()
    }

    /// Total work-tape length: string cells, marker, workspace.
    pub fn work_tape_len(&self) -> usize {
        self.n + 1 + self.workspace_size()
    }

    pub(crate) fn is_verdict(&self, t: TokenId) -> bool {
        self.verdicts.is_some_and(|(a, r)| t == a || t == r)
    }

    /// Decodes on a window copied into the workspace; returns the token and
    /// the highest cell touched.
    fn decode(&self, window: &[TokenId]) -> Result<(TokenId, usize), MachineError> {
        let t = self
            .source
            .next_token(window)
            .map_err(|e| MachineError::Source(e.to_string()))?;
        Ok((t, self.n + 1 + window.len() + self.source.scratch_cells()))
    }

    /// One decoding step on a work string `w` after copy-in.
    pub(crate) fn step(&self, w: &[TokenId]) -> Result<(Step, usize), MachineError> {
        if w.len() + 1 >= self.n {
            let mut cells = Vec::with_capacity(self.n);
            match self.fault {
                Some(Fault::BrokenShift) => {
                    cells.extend_from_slice(w);
                    cells[0] = self.summary;
                }
                None => {
                    cells.push(self.summary);
                    cells.extend_from_slice(w);
                }
            }
            let (x, peak) = self.decode(&cells)?;
            if self.is_verdict(x) {
                return Ok((Step::Halt(x), peak));
            }
            Ok((Step::Continue(vec![x]), peak.max(cells.len())))
        } else {
            let (x, peak) = self.decode(w)?;
            if x == self.eos || self.is_verdict(x) {
                return Ok((Step::Halt(x), peak));
            }
            let mut next = w.to_vec();
            next.push(x);
            Ok((Step::Continue(next), peak))
        }
    }

    pub fn run(&self, input: &[TokenId], cap: u64) -> Result<TransducerRun, MachineError> {
        let v = self.source.vocab();
        let mut head = 0;
        let mut w: Vec<TokenId> = Vec::with_capacity(self.n);
        let mut peak = 0;
        let mut steps = 0;
        let mut head_positions = Vec::new();
        let reason = loop {
            while w.len() + 1 < self.n && head < input.len() {
                w.push(input[head]);
                head += 1;
                peak = peak.max(w.len());
            }
            if w.is_empty() {
                break HaltReason::Exhausted;
            }
            if steps >= cap {
                break HaltReason::Cap;
            }
            head_positions.push(head);
            let (step, p) = self.step(&w)?;
            steps += 1;
            peak = peak.max(p);
            match step {
                Step::Halt(x) => break HaltReason::Token(x),
                Step::Continue(next) => {
                    peak = peak.max(next.len());
                    w = next;
                }
            }
        };
        let mut r = w;
        r.extend_from_slice(&input[head..]);
        Ok(TransducerRun {
            reason,
            output: r.into_iter().filter(|&t| !v.is_control(t)).collect(),
            steps,
            peak_cell: peak,
            head_positions,
        })
    }
}
