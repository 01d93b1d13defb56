use std::fmt::Write as _;

use super::{ManagerError, ManagerState, Phase};
use crate::vocab::{TokenId, Vocabulary, EPSILON};

const MAX_TABLE: usize = 1 << 24;

/// An (N, K)-restricted rewriting rule: reads `r_{1:N}`, drops `r₁`,
/// appends `M(r_{1:N})` (at most `K` tokens, `ε` contributing nothing).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagRule {
    vocab: Vocabulary,
    n: usize,
    k: usize,
    table: Vec<Vec<TokenId>>,
    halting: Vec<TokenId>,
    epsilon: Option<TokenId>,
}

fn table_size(sigma: usize, n: usize) -> Option<usize> {
    (0..n).try_fold(1usize, |acc, _| acc.checked_mul(sigma)).filter(|&s| s <= MAX_TABLE)
}

impl LagRule {
    /// Tabulates `f` over all of `Σ^N`.
    pub fn from_fn(
        vocab: Vocabulary,
        n: usize,
        k: usize,
        halting: Vec<TokenId>,
        mut f: impl FnMut(&[TokenId]) -> Vec<TokenId>,
    ) -> Result<Self, ManagerError> {
        let mut rule = Self::empty(vocab, n, k, halting)?;
        let sigma = rule.vocab.len();
        let mut window = vec![TokenId(0); n];
        for idx in 0..rule.table.len() {
            let mut rest = idx;
            for slot in window.iter_mut().rev() {
                *slot = TokenId(rest % sigma);
                rest /= sigma;
            }
            let out = f(&window);
            rule.set(&window, out)?;
        }
        Ok(rule)
    }

    fn empty(vocab: Vocabulary, n: usize, k: usize, halting: Vec<TokenId>) -> Result<Self, ManagerError> {
        if n < 1 {
            return Err(ManagerError::Config("rule window N must be at least 1".into()));
        }
        for &h in &halting {
            vocab.check(h)?;
        }
        let size = table_size(vocab.len(), n)
            .ok_or_else(|| ManagerError::Config("rule table too large".into()))?;
        let epsilon = vocab.get(EPSILON);
        Ok(Self {
            vocab,
            n,
            k,
            table: vec![Vec::new(); size],
            halting,
            epsilon,
        })
    }

    fn index(&self, window: &[TokenId]) -> usize {
        window.iter().fold(0, |acc, t| acc * self.vocab.len() + t.0)
    }

    fn set(&mut self, window: &[TokenId], out: Vec<TokenId>) -> Result<(), ManagerError> {
        if out.len() > self.k {
            return Err(ManagerError::Config(format!(
                "rule output of length {} exceeds K = {}",
                out.len(),
                self.k
            )));
        }
        for &t in &out {
            self.vocab.check(t)?;
        }
        let i = self.index(window);
        self.table[i] = out;
        Ok(())
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn halting(&self) -> &[TokenId] {
        &self.halting
    }

    pub fn apply(&self, window: &[TokenId]) -> &[TokenId] {
        &self.table[self.index(window)]
    }

    /// The single output token of a `K = 1` rule, with empty output read as ε.
    pub fn apply_token(&self, window: &[TokenId]) -> Option<TokenId> {
        self.apply(window).first().copied().or(self.epsilon)
    }

    pub fn is_halting(&self, t: TokenId) -> bool {
        self.halting.contains(&t)
    }
}

/// One rewriting step. Output containing a halting token halts with `r` kept.
pub fn lag_step(state: &ManagerState, rule: &LagRule) -> Result<ManagerState, ManagerError> {
    if state.is_halted() {
        return Err(ManagerError::Halted);
    }
    if state.r.len() < rule.n {
        return Err(ManagerError::TooShort {
            len: state.r.len(),
            needed: rule.n,
        });
    }
    let out = rule.apply(&state.r[..rule.n]);
    let mut next = state.clone();
    next.step += 1;
    if out.iter().any(|&t| rule.is_halting(t)) {
        next.phase = Phase::Halted;
        return Ok(next);
    }
    next.r.remove(0);
    next.r.extend(out.iter().copied().filter(|&t| Some(t) != rule.epsilon));
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagOutcome {
    /// The first halting token in the output that stopped the run.
    Halted(TokenId),
    Cap,
    /// `|r|` fell below `N`.
    TooShort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagRun {
    pub outcome: LagOutcome,
    pub r: Vec<TokenId>,
    pub steps: u64,
}

pub fn lag_run(rule: &LagRule, input: Vec<TokenId>, cap: u64) -> LagRun {
    let mut state = ManagerState::new(input);
    while state.step < cap {
        let window_out = if state.r.len() >= rule.n {
            rule.apply(&state.r[..rule.n]).to_vec()
        } else {
            Vec::new()
        };
        match lag_step(&state, rule) {
            Ok(next) if next.is_halted() => {
                let h = window_out
                    .into_iter()
                    .find(|&t| rule.is_halting(t))
                    .expect("halting token present");
                return LagRun {
                    outcome: LagOutcome::Halted(h),
                    r: next.r,
                    steps: next.step,
                };
            }
            Ok(next) => state = next,
            Err(_) => {
                return LagRun {
                    outcome: LagOutcome::TooShort,
                    r: state.r,
                    steps: state.step,
                }
            }
        }
    }
    LagRun {
        outcome: LagOutcome::Cap,
        r: state.r,
        steps: state.step,
    }
}

/// Parses a rule file:
///
/// ```text
/// lag 2 1
/// tokens a b accept
/// halt accept
/// a a -> b
/// a b ->            # empty output
/// ```
pub fn parse_lag_rule(text: &str) -> Result<LagRule, ManagerError> {
    let err = |line: usize, msg: String| ManagerError::Parse { line, msg };
    let mut header: Option<(usize, usize)> = None;
    let mut vocab: Option<Vocabulary> = None;
    let mut halting_names: Vec<String> = Vec::new();
    let mut rule: Option<LagRule> = None;
    let mut seen: Vec<bool> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let words: Vec<&str> = l.split_whitespace().collect();
        match words[0] {
            "lag" => {
                let nums: Option<Vec<usize>> = words[1..].iter().map(|w| w.parse().ok()).collect();
                match nums.as_deref() {
                    Some([n, k]) => header = Some((*n, *k)),
                    _ => return Err(err(line, "expected `lag N K`".into())),
                }
            }
            "tokens" => {
                vocab = Some(Vocabulary::new(&words[1..]).map_err(|e| err(line, e.to_string()))?);
            }
            "halt" => halting_names = words[1..].iter().map(|s| s.to_string()).collect(),
            _ => {
                if rule.is_none() {
                    let (n, k) = header.ok_or_else(|| err(line, "rule line before `lag N K`".into()))?;
                    let v = vocab.clone().ok_or_else(|| err(line, "rule line before `tokens`".into()))?;
                    let halting = halting_names
                        .iter()
                        .map(|h| v.id(h))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| err(line, e.to_string()))?;
                    let r = LagRule::empty(v, n, k, halting).map_err(|e| err(line, e.to_string()))?;
                    seen = vec![false; r.table.len()];
                    rule = Some(r);
                }
                let r = rule.as_mut().expect("initialised above");
                let arrow = words
                    .iter()
                    .position(|w| *w == "->")
                    .filter(|&p| p == r.n)
                    .ok_or_else(|| err(line, format!("expected {} tokens then `->`", r.n)))?;
                let ids = |ws: &[&str]| {
                    ws.iter()
                        .map(|w| r.vocab.id(w))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| err(line, e.to_string()))
                };
                let window = ids(&words[..arrow])?;
                let out = ids(&words[arrow + 1..])?;
                let idx = r.index(&window);
                if seen[idx] {
                    return Err(err(line, "duplicate rule".into()));
                }
                seen[idx] = true;
                r.set(&window, out).map_err(|e| err(line, e.to_string()))?;
            }
        }
    }
    let rule = rule.ok_or_else(|| err(text.lines().count().max(1), "no rule lines".into()))?;
    if let Some(idx) = seen.iter().position(|s| !s) {
        let sigma = rule.vocab.len();
        let mut window = vec![TokenId(0); rule.n];
        let mut rest = idx;
        for slot in window.iter_mut().rev() {
            *slot = TokenId(rest % sigma);
            rest /= sigma;
        }
        return Err(ManagerError::Config(format!(
            "rule is not total: no entry for `{}`",
            rule.vocab.render(&window)
        )));
    }
    Ok(rule)
}

pub fn write_lag_rule(rule: &LagRule) -> String {
    let mut out = String::new();
    let v = &rule.vocab;
    let _ = writeln!(out, "lag {} {}", rule.n, rule.k);
    let _ = writeln!(out, "tokens {}", v.names().join(" "));
    let _ = writeln!(out, "halt {}", v.render(&rule.halting));
    let sigma = v.len();
    let mut window = vec![TokenId(0); rule.n];
    for (idx, o) in rule.table.iter().enumerate() {
        let mut rest = idx;
        for slot in window.iter_mut().rev() {
            *slot = TokenId(rest % sigma);
            rest /= sigma;
        }
        let rhs = v.render(o);
        if rhs.is_empty() {
            let _ = writeln!(out, "{} ->", v.render(&window));
        } else {
            let _ = writeln!(out, "{} -> {rhs}", v.render(&window));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copy_rule_step() {
        let v = Vocabulary::new(["a", "b", "c"]).unwrap();
        let rule = LagRule::from_fn(v.clone(), 2, 1, vec![], |w| vec![w[1]]).unwrap();
        let s = ManagerState::new(v.parse_tokens("a b c").unwrap());
        assert_eq!(v.render(&lag_step(&s, &rule).unwrap().r), "b c b");
    }

    #[test]
    fn two_token_rule_grows() {
        let v = Vocabulary::new(["a", "b"]).unwrap();
        let rule = LagRule::from_fn(v.clone(), 2, 2, vec![], |w| w.to_vec()).unwrap();
        let s = ManagerState::new(v.parse_tokens("a b").unwrap());
        let s1 = lag_step(&s, &rule).unwrap();
        assert_eq!(s1.r.len(), 3);
    }

    #[test]
    fn short_string_errors() {
        let v = Vocabulary::new(["a"]).unwrap();
        let rule = LagRule::from_fn(v.clone(), 2, 1, vec![], |w| vec![w[0]]).unwrap();
        assert!(matches!(
            lag_step(&ManagerState::new(vec![TokenId(0)]), &rule),
            Err(ManagerError::TooShort { .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let v = Vocabulary::new(["a", "b", "ε", "accept"]).unwrap();
        let rule = LagRule::from_fn(v, 2, 1, vec![TokenId(3)], |w| {
            if w[0] == w[1] {
                vec![TokenId(3)]
            } else if w[0].0 == 2 {
                vec![]
            } else {
                vec![w[0]]
            }
        })
        .unwrap();
        let text = write_lag_rule(&rule);
        assert_eq!(parse_lag_rule(&text).unwrap(), rule);
        let run = lag_run(&rule, rule.vocab().parse_tokens("a b a a").unwrap(), 100);
        assert_eq!(run.outcome, LagOutcome::Halted(TokenId(3)));
    }

    #[test]
    fn parse_reports_line() {
        let text = "lag 2 1\ntokens a b\nhalt\na a -> a\na -> b\n";
        assert!(matches!(parse_lag_rule(text), Err(ManagerError::Parse { line: 5, .. })));
    }
}
