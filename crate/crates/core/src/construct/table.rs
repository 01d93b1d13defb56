use std::fmt::Write as _;

use rand::Rng;

use super::ConstructError;
use crate::vocab::{TokenId, Vocabulary, CONTROL_1, CONTROL_2};

/// Total map `Σ² → Σ` over an alphabet of `K` named tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFnTable {
    vocab: Vocabulary,
    table: Vec<TokenId>,
}

/// Total map `Σ² → Σ²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairFnTable {
    vocab: Vocabulary,
    table: Vec<(TokenId, TokenId)>,
}

fn default_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| i.to_string()).collect()
}

impl BinaryFnTable {
    /// Builds a table from a function on 0-based token ids.
    pub fn from_fn(
        vocab: Vocabulary,
        mut f: impl FnMut(TokenId, TokenId) -> TokenId,
    ) -> Result<Self, ConstructError> {
        let k = vocab.len();
        if k < 2 {
            return Err(ConstructError::AlphabetTooSmall(k));
        }
        let mut table = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                let c = f(TokenId(a), TokenId(b));
                vocab.check(c)?;
                table.push(c);
            }
        }
        Ok(Self { vocab, table })
    }

    /// Alphabet `1..=k` with entries drawn uniformly.
    pub fn random(k: usize, rng: &mut impl Rng) -> Result<Self, ConstructError> {
        let vocab = Vocabulary::new(default_names(k))?;
        Self::from_fn(vocab, |_, _| TokenId(rng.gen_range(0..k)))
    }

    pub fn k(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn get(&self, a: TokenId, b: TokenId) -> TokenId {
        self.table[a.0 * self.k() + b.0]
    }

    /// Every `(a, b)` pair with its image.
    pub fn entries(&self) -> impl Iterator<Item = (TokenId, TokenId, TokenId)> + '_ {
        let k = self.k();
        (0..k * k).map(move |p| (TokenId(p / k), TokenId(p % k), self.table[p]))
    }
}

impl PairFnTable {
    pub fn from_fn(
        vocab: Vocabulary,
        mut f: impl FnMut(TokenId, TokenId) -> (TokenId, TokenId),
    ) -> Result<Self, ConstructError> {
        let k = vocab.len();
        if k < 2 {
            return Err(ConstructError::AlphabetTooSmall(k));
        }
        for name in [CONTROL_1, CONTROL_2] {
            if vocab.get(name).is_some() {
                return Err(ConstructError::ControlCollision(name.to_string()));
            }
        }
        let mut table = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                let (c1, c2) = f(TokenId(a), TokenId(b));
                vocab.check(c1)?;
                vocab.check(c2)?;
                table.push((c1, c2));
            }
        }
        Ok(Self { vocab, table })
    }

    pub fn random(k: usize, rng: &mut impl Rng) -> Result<Self, ConstructError> {
        let vocab = Vocabulary::new(default_names(k))?;
        Self::from_fn(vocab, |_, _| (TokenId(rng.gen_range(0..k)), TokenId(rng.gen_range(0..k))))
    }

    pub fn k(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn get(&self, a: TokenId, b: TokenId) -> (TokenId, TokenId) {
        self.table[a.0 * self.k() + b.0]
    }

    pub fn entries(&self) -> impl Iterator<Item = (TokenId, TokenId, (TokenId, TokenId))> + '_ {
        let k = self.k();
        (0..k * k).map(move |p| (TokenId(p / k), TokenId(p % k), self.table[p]))
    }
}

/// A parsed table file: one output token per pair or two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FnTable {
    Binary(BinaryFnTable),
    Pair(PairFnTable),
}

/// Parses a table file:
///
/// ```text
/// K 2
/// tokens a b        # optional; defaults to 1..K
/// a a -> b
/// a b -> a b        # two outputs make a pair table
/// ```
pub fn parse_fn_table(text: &str) -> Result<FnTable, ConstructError> {
    let err = |line: usize, msg: &str| ConstructError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut k: Option<usize> = None;
    let mut vocab: Option<Vocabulary> = None;
    let mut rows: Vec<(usize, TokenId, TokenId, Vec<TokenId>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let words: Vec<&str> = l.split_whitespace().collect();
        match words[0] {
            "K" => {
                if k.is_some() {
                    return Err(err(line, "duplicate K header"));
                }
                let n = words
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .filter(|_| words.len() == 2)
                    .ok_or_else(|| err(line, "expected `K <size>`"))?;
                k = Some(n);
            }
            "tokens" => {
                let n = k.ok_or_else(|| err(line, "`tokens` before `K`"))?;
                if words.len() - 1 != n {
                    return Err(err(line, &format!("expected {n} token names")));
                }
                for name in &words[1..] {
                    if matches!(
                        crate::vocab::canonical_name(name),
                        CONTROL_1 | CONTROL_2
                    ) {
                        return Err(err(
                            line,
                            &format!("token `{name}` collides with a control token"),
                        ));
                    }
                }
                vocab = Some(Vocabulary::new(&words[1..]).map_err(|e| err(line, &e.to_string()))?);
            }
            _ => {
                let n = k.ok_or_else(|| err(line, "table entry before `K` header"))?;
                if vocab.is_none() {
                    vocab = Some(Vocabulary::new(default_names(n))?);
                }
                let v = vocab.as_ref().expect("set above");
                let arrow = words
                    .iter()
                    .position(|w| *w == "->")
                    .ok_or_else(|| err(line, "expected `a b -> c`"))?;
                if arrow != 2 || !(1..=2).contains(&(words.len() - 3)) {
                    return Err(err(line, "expected `a b -> c` or `a b -> c1 c2`"));
                }
                let tok = |w: &str| v.id(w).map_err(|e| err(line, &e.to_string()));
                let outs = words[3..].iter().map(|w| tok(w)).collect::<Result<Vec<_>, _>>()?;
                rows.push((line, tok(words[0])?, tok(words[1])?, outs));
            }
        }
    }
    let n = k.ok_or_else(|| err(1, "missing `K` header"))?;
    let vocab = match vocab {
        Some(v) => v,
        None => Vocabulary::new(default_names(n))?,
    };
    if n < 2 {
        return Err(ConstructError::AlphabetTooSmall(n));
    }
    let arity = rows.first().map_or(1, |r| r.3.len());
    let mut cells: Vec<Option<Vec<TokenId>>> = vec![None; n * n];
    for (line, a, b, outs) in rows {
        if outs.len() != arity {
            return Err(err(line, "mixed single and pair outputs"));
        }
        let slot = &mut cells[a.0 * n + b.0];
        if slot.is_some() {
            return Err(ConstructError::DuplicateEntry(
                vocab.name(a).to_string(),
                vocab.name(b).to_string(),
            ));
        }
        *slot = Some(outs);
    }
    if let Some(p) = cells.iter().position(Option::is_none) {
        return Err(ConstructError::NotTotal(
            vocab.name(TokenId(p / n)).to_string(),
            vocab.name(TokenId(p % n)).to_string(),
        ));
    }
    let get = |a: TokenId, b: TokenId| cells[a.0 * n + b.0].clone().expect("total");
    if arity == 1 {
        Ok(FnTable::Binary(BinaryFnTable::from_fn(vocab.clone(), |a, b| get(a, b)[0])?))
    } else {
        Ok(FnTable::Pair(PairFnTable::from_fn(vocab.clone(), |a, b| {
            let o = get(a, b);
            (o[0], o[1])
        })?))
    }
}

pub fn write_fn_table(table: &FnTable) -> String {
    let mut out = String::new();
    let vocab = match table {
        FnTable::Binary(t) => t.vocab(),
        FnTable::Pair(t) => t.vocab(),
    };
    let _ = writeln!(out, "K {}", vocab.len());
    let _ = writeln!(out, "tokens {}", vocab.names().join(" "));
    match table {
        FnTable::Binary(t) => {
            for (a, b, c) in t.entries() {
                let _ = writeln!(out, "{} {} -> {}", vocab.name(a), vocab.name(b), vocab.name(c));
            }
        }
        FnTable::Pair(t) => {
            for (a, b, (c1, c2)) in t.entries() {
                let _ = writeln!(
                    out,
                    "{} {} -> {} {}",
                    vocab.name(a),
                    vocab.name(b),
                    vocab.name(c1),
                    vocab.name(c2)
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const XOR: &str = "K 2\n1 1 -> 1\n1 2 -> 2\n2 1 -> 2\n2 2 -> 1\n";

    #[test]
    fn parses_binary_table() {
        let FnTable::Binary(t) = parse_fn_table(XOR).unwrap() else {
            panic!("expected a binary table")
        };
        assert_eq!(t.get(TokenId(0), TokenId(1)), TokenId(1));
        assert_eq!(t.get(TokenId(1), TokenId(1)), TokenId(0));
        assert_eq!(parse_fn_table(&write_fn_table(&FnTable::Binary(t.clone()))).unwrap(), FnTable::Binary(t));
    }

    #[test]
    fn parses_pair_table_with_names() {
        let text = "K 2\ntokens x y\nx x -> x x\nx y -> y x\ny x -> x y\ny y -> y y\n";
        let FnTable::Pair(t) = parse_fn_table(text).unwrap() else {
            panic!("expected a pair table")
        };
        assert_eq!(t.get(TokenId(0), TokenId(1)), (TokenId(1), TokenId(0)));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "K 2\n1 1 -> 1\n1 2 => 2\n";
        match parse_fn_table(text) {
            Err(ConstructError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_entry_is_not_total() {
        let text = "K 2\n1 1 -> 1\n1 2 -> 2\n2 1 -> 2\n";
        assert!(matches!(parse_fn_table(text), Err(ConstructError::NotTotal(..))));
    }

    #[test]
    fn control_name_collision() {
        let text = "K 2\ntokens a c1!\na a -> a a\n";
        assert!(matches!(parse_fn_table(text), Err(ConstructError::Parse { line: 2, .. })));
    }

    #[test]
    fn small_alphabet_rejected() {
        assert!(matches!(
            parse_fn_table("K 1\n1 1 -> 1\n"),
            Err(ConstructError::AlphabetTooSmall(1))
        ));
    }
}
