use super::{MachineError, MachineSpec, Move};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub steps: u64,
    pub cells: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            steps: 1_000_000,
            cells: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
    /// A step or cell cap was hit before halting.
    Cap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineRun {
    pub verdict: Verdict,
    pub tape: Vec<usize>,
    pub head: usize,
    pub state: usize,
    pub steps: u64,
    pub peak_cells: usize,
}

impl MachineSpec {
    /// Tape symbol indices of an input word, either whitespace-separated or,
    /// when it contains no whitespace and every input symbol is a single
    /// character, one symbol per character.
    pub fn parse_input(&self, text: &str) -> Result<Vec<usize>, MachineError> {
        let single = self.input.iter().all(|&s| self.tape[s].chars().count() == 1);
        let words: Vec<String> = if single && !text.trim().contains(char::is_whitespace) {
            text.trim().chars().map(String::from).collect()
        } else {
            text.split_whitespace().map(String::from).collect()
        };
        words
            .iter()
            .map(|w| {
                self.symbol(w)
                    .filter(|s| self.input.contains(s))
                    .ok_or_else(|| MachineError::Input(w.to_string()))
            })
            .collect()
    }

    /// Initial tape and head position: `▷ x ◁` with the head on `x₁` for an
    /// LBA (a lone blank stands in for empty input), otherwise `x` itself.
    pub fn initial_tape(&self, input: &[usize]) -> (Vec<usize>, usize) {
        let body: Vec<usize> = if input.is_empty() {
            vec![self.blank]
        } else {
            input.to_vec()
        };
        if self.lba {
            let mut tape = Vec::with_capacity(body.len() + 2);
            tape.push(self.left_end().expect("validated"));
            tape.extend(body);
            tape.push(self.right_end().expect("validated"));
            (tape, 1)
        } else {
            (body, 0)
        }
    }
}

/// Runs `m` on `input`. Entering a halting state writes and stops without
/// moving. Off the left end the head stays put; off the right end the tape
/// grows by a blank.
pub fn machine_run(m: &MachineSpec, input: &[usize], caps: Caps) -> Result<MachineRun, MachineError> {
    for &s in input {
        if !m.input.contains(&s) {
            return Err(MachineError::Input(
                m.tape.get(s).cloned().unwrap_or_else(|| format!("#{s}")),
            ));
        }
    }
    let (mut tape, mut head) = m.initial_tape(input);
    let mut state = m.start;
    let mut steps = 0;
    let mut peak = tape.len();
    let verdict = loop {
        if state == m.accept {
            break Verdict::Accept;
        }
        if state == m.reject {
            break Verdict::Reject;
        }
        if steps >= caps.steps || tape.len() > caps.cells {
            break Verdict::Cap;
        }
        let t = m.delta(state, tape[head]).expect("validated total");
        tape[head] = t.write;
        state = t.next;
        steps += 1;
        if m.is_halting(state) {
            continue;
        }
        match t.mv {
            Move::L => head = head.saturating_sub(1),
            Move::R => {
                head += 1;
                if head == tape.len() {
                    tape.push(m.blank);
                    peak = peak.max(tape.len());
                }
            }
        }
    };
    Ok(MachineRun {
        verdict,
        tape,
        head,
        state,
        steps,
        peak_cells: peak,
    })
}
