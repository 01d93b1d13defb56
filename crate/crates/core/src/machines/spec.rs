use std::collections::HashMap;
use std::fmt::Write as _;

use super::MachineError;
use crate::vocab::{canonical_name, LEFT_END, RIGHT_END};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    pub next: usize,
    pub write: usize,
    pub mv: Move,
}

/// A deterministic single-tape machine. States and tape symbols are
/// indices into `states` and `tape`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    pub states: Vec<String>,
    pub tape: Vec<String>,
    /// Indices into `tape` of the input symbols.
    pub input: Vec<usize>,
    pub blank: usize,
    pub start: usize,
    pub accept: usize,
    pub reject: usize,
    /// Head confined to the input span between `▷` and `◁`.
    pub lba: bool,
    delta: Vec<Option<Transition>>,
}

impl MachineSpec {
    /// Builds and validates a machine; `delta` maps `(state, symbol)` names
    /// to `(state, write, move)` names.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        states: &[&str],
        tape: &[&str],
        input: &[&str],
        blank: &str,
        start: &str,
        accept: &str,
        reject: &str,
        lba: bool,
        delta: &[(&str, &str, &str, &str, Move)],
    ) -> Result<Self, MachineError> {
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let tape: Vec<String> = tape.iter().map(|s| canonical_name(s).to_string()).collect();
        let st = |n: &str| find(&states, n, "state");
        let sy = |n: &str| find(&tape, canonical_name(n), "tape symbol");
        let mut m = Self {
            input: input.iter().map(|s| sy(s)).collect::<Result<_, _>>()?,
            blank: sy(blank)?,
            start: st(start)?,
            accept: st(accept)?,
            reject: st(reject)?,
            lba,
            delta: vec![None; states.len() * tape.len()],
            states: states.clone(),
            tape: tape.clone(),
        };
        for &(q, a, q2, w, mv) in delta {
            let key = m.key(st(q)?, sy(a)?);
            if m.delta[key].is_some() {
                return Err(MachineError::Invalid(format!("transition for ({q}, {a}) given twice")));
            }
            m.delta[key] = Some(Transition {
                next: st(q2)?,
                write: sy(w)?,
                mv,
            });
        }
        m.validate()?;
        Ok(m)
    }

    fn key(&self, q: usize, a: usize) -> usize {
        q * self.tape.len() + a
    }

    pub fn is_halting(&self, q: usize) -> bool {
        q == self.accept || q == self.reject
    }

    pub fn delta(&self, q: usize, a: usize) -> Option<Transition> {
        self.delta[self.key(q, a)]
    }

    pub fn symbol(&self, name: &str) -> Option<usize> {
        self.tape.iter().position(|s| s == canonical_name(name))
    }

    pub fn left_end(&self) -> Option<usize> {
        self.symbol(LEFT_END)
    }

    pub fn right_end(&self) -> Option<usize> {
        self.symbol(RIGHT_END)
    }

    fn validate(&self) -> Result<(), MachineError> {
        let bad = |m: String| Err(MachineError::Invalid(m));
        if self.accept == self.reject {
            return bad("accept and reject states coincide".into());
        }
        if self.input.contains(&self.blank) {
            return bad("the blank is an input symbol".into());
        }
        let markers = (self.left_end(), self.right_end());
        if self.lba && (markers.0.is_none() || markers.1.is_none()) {
            return bad("an LBA needs the end markers ▷ and ◁ in its tape alphabet".into());
        }
        for q in 0..self.states.len() {
            if self.is_halting(q) {
                continue;
            }
            for a in 0..self.tape.len() {
                let Some(t) = self.delta(q, a) else {
                    return bad(format!(
                        "no transition for ({}, {})",
                        self.states[q], self.tape[a]
                    ));
                };
                if !self.lba {
                    continue;
                }
                for (marker, away) in [(markers.0, Move::R), (markers.1, Move::L)] {
                    let marker = marker.expect("checked above");
                    if (a == marker) != (t.write == marker) {
                        return bad(format!(
                            "({}, {}) must keep end markers in place",
                            self.states[q], self.tape[a]
                        ));
                    }
                    if a == marker && !self.is_halting(t.next) && t.mv != away {
                        return bad(format!(
                            "({}, {}) moves past an end marker",
                            self.states[q], self.tape[a]
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn find(names: &[String], name: &str, what: &str) -> Result<usize, MachineError> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| MachineError::Invalid(format!("unknown {what} `{name}`")))
}

/// Parses a machine file:
///
/// ```text
/// states q0 qa qr
/// input a b
/// tape a b ␣ ▷ ◁
/// blank ␣
/// start q0
/// accept qa
/// reject qr
/// lba true
/// q0,a -> qa,a,R
/// ```
pub fn parse_machine(text: &str) -> Result<MachineSpec, MachineError> {
    let mut fields: HashMap<&str, (usize, Vec<&str>)> = HashMap::new();
    let mut rules: Vec<(usize, &str, &str, &str, &str, Move)> = Vec::new();
    let perr = |line: usize, msg: &str| MachineError::Parse {
        line,
        msg: msg.to_string(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some((lhs, rhs)) = l.split_once("->") {
            let lhs: Vec<&str> = lhs.split(',').map(str::trim).collect();
            let rhs: Vec<&str> = rhs.split(',').map(str::trim).collect();
            let (&[q, a], &[q2, w, mv]) = (lhs.as_slice(), rhs.as_slice()) else {
                return Err(perr(line, "expected `q,a -> q',a',L|R`"));
            };
            let mv = match mv {
                "L" => Move::L,
                "R" => Move::R,
                _ => return Err(perr(line, "move must be L or R")),
            };
            rules.push((line, q, a, q2, w, mv));
            continue;
        }
        let mut words = l.split_whitespace();
        let key = words.next().expect("nonempty line");
        if !matches!(
            key,
            "states" | "input" | "tape" | "blank" | "start" | "accept" | "reject" | "lba"
        ) {
            return Err(perr(line, &format!("unknown field `{key}`")));
        }
        if fields.insert(key, (line, words.collect())).is_some() {
            return Err(perr(line, &format!("duplicate field `{key}`")));
        }
    }
    let one = |key: &str| -> Result<&str, MachineError> {
        match fields.get(key) {
            Some((_, v)) if v.len() == 1 => Ok(v[0]),
            Some((line, _)) => Err(perr(*line, &format!("`{key}` takes one value"))),
            None => Err(MachineError::Invalid(format!("missing `{key}`"))),
        }
    };
    let many = |key: &str| -> Result<Vec<&str>, MachineError> {
        fields
            .get(key)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| MachineError::Invalid(format!("missing `{key}`")))
    };
    let lba = match fields.get("lba") {
        None => false,
        Some((_, v)) if v.as_slice() == ["true"] => true,
        Some((_, v)) if v.as_slice() == ["false"] => false,
        Some((line, _)) => return Err(perr(*line, "`lba` must be true or false")),
    };
    let delta: Vec<_> = rules.iter().map(|&(_, q, a, q2, w, mv)| (q, a, q2, w, mv)).collect();
    MachineSpec::new(
        &many("states")?,
        &many("tape")?,
        &many("input")?,
        one("blank")?,
        one("start")?,
        one("accept")?,
        one("reject")?,
        lba,
        &delta,
    )
}

pub fn write_machine(m: &MachineSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states {}", m.states.join(" "));
    let input: Vec<&str> = m.input.iter().map(|&i| m.tape[i].as_str()).collect();
    let _ = writeln!(out, "input {}", input.join(" "));
    let _ = writeln!(out, "tape {}", m.tape.join(" "));
    let _ = writeln!(out, "blank {}", m.tape[m.blank]);
    let _ = writeln!(out, "start {}", m.states[m.start]);
    let _ = writeln!(out, "accept {}", m.states[m.accept]);
    let _ = writeln!(out, "reject {}", m.states[m.reject]);
    let _ = writeln!(out, "lba {}", m.lba);
    for q in 0..m.states.len() {
        for a in 0..m.tape.len() {
            if let Some(t) = m.delta(q, a) {
                let _ = writeln!(
                    out,
                    "{},{} -> {},{},{:?}",
                    m.states[q], m.tape[a], m.states[t.next], m.tape[t.write], t.mv
                );
            }
        }
    }
    out
}
