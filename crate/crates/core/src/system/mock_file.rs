use std::fmt::Write as _;

use rand::Rng;

use super::{MockTable, SystemError};
use crate::vocab::{TokenId, Vocabulary};

const MAX_FILL: usize = 1 << 22;

enum Fill {
    None,
    Default(TokenId),
    Random(Vec<TokenId>),
}

/// Parses a mock next-token table:
///
/// ```text
/// mock 4
/// tokens a b <s> <EOS> accept reject
/// random a b accept reject   # or `default <EOS>`; fills unlisted windows
/// a b -> accept
/// ```
///
/// Explicit lines override the fill. Without a fill, unlisted windows are
/// lookup misses. `random` draws from `rng` in lexicographic window order.
pub fn parse_mock(text: &str, rng: &mut impl Rng) -> Result<MockTable, SystemError> {
    let err = |line: usize, msg: String| SystemError::Parse { line, msg };
    let mut window: Option<usize> = None;
    let mut vocab: Option<Vocabulary> = None;
    let mut fill = Fill::None;
    let mut entries: Vec<(usize, Vec<TokenId>, TokenId)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let words: Vec<&str> = l.split_whitespace().collect();
        let ids = |ws: &[&str]| -> Result<Vec<TokenId>, SystemError> {
            let v = vocab.as_ref().ok_or_else(|| err(line, "`tokens` line missing".into()))?;
            ws.iter()
                .map(|w| v.id(w))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(line, e.to_string()))
        };
        match words[0] {
            "mock" => match words[1..] {
                [n] => {
                    let n: usize = n.parse().map_err(|_| err(line, "expected `mock N`".into()))?;
                    if n == 0 {
                        return Err(err(line, "window must be at least 1".into()));
                    }
                    window = Some(n);
                }
                _ => return Err(err(line, "expected `mock N`".into())),
            },
            "tokens" => {
                vocab = Some(Vocabulary::new(&words[1..]).map_err(|e| err(line, e.to_string()))?);
            }
            "default" => match ids(&words[1..])?[..] {
                [t] => fill = Fill::Default(t),
                _ => return Err(err(line, "expected `default TOKEN`".into())),
            },
            "random" => {
                let pool = ids(&words[1..])?;
                if pool.is_empty() {
                    return Err(err(line, "`random` needs at least one token".into()));
                }
                fill = Fill::Random(pool);
            }
            _ => {
                let n = window.ok_or_else(|| err(line, "entry before `mock N`".into()))?;
                let arrow = words
                    .iter()
                    .position(|w| *w == "->")
                    .filter(|&p| (1..=n).contains(&p) && p + 2 == words.len())
                    .ok_or_else(|| err(line, format!("expected 1 to {n} tokens, `->`, one token")))?;
                let w = ids(&words[..arrow])?;
                let out = ids(&words[arrow + 1..])?[0];
                entries.push((line, w, out));
            }
        }
    }
    let n = window.ok_or_else(|| err(1, "missing `mock N` header".into()))?;
    let v = vocab.ok_or_else(|| err(1, "missing `tokens` line".into()))?;
    let total: Option<usize> = (1..=n).try_fold(0usize, |acc, l| {
        v.len().checked_pow(l as u32).and_then(|c| acc.checked_add(c))
    });
    let fill_ok = total.is_some_and(|t| t <= MAX_FILL);
    let mut mock = match fill {
        Fill::None => MockTable::new(v, n),
        _ if !fill_ok => return Err(err(1, format!("filling every window would exceed {MAX_FILL} entries"))),
        Fill::Default(t) => MockTable::from_fn(v, n, |_| t),
        Fill::Random(pool) => MockTable::random(v, n, &pool, rng),
    };
    let mut seen = std::collections::HashSet::new();
    for (line, w, out) in entries {
        if !seen.insert(w.clone()) {
            return Err(err(line, "duplicate entry".into()));
        }
        mock.insert(w, out);
    }
    Ok(mock)
}

/// Writes every entry explicitly, sorted by window length then token ids.
pub fn write_mock(mock: &MockTable) -> String {
    let v = super::NextTokenSource::vocab(mock);
    let mut out = format!("mock {}\ntokens {}\n", super::NextTokenSource::window(mock), v.names().join(" "));
    let mut rows: Vec<(&Vec<TokenId>, &TokenId)> = mock.entries().collect();
    rows.sort_by(|a, b| (a.0.len(), a.0).cmp(&(b.0.len(), b.0)));
    for (w, t) in rows {
        let _ = writeln!(out, "{} -> {}", v.render(w), v.name(*t));
    }
    out
}
