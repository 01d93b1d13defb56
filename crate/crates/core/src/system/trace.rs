use std::fmt::Write as _;

use crate::managers::Phase;
use crate::vocab::{TokenId, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    /// 1-based step index.
    pub t: u64,
    pub window: Vec<TokenId>,
    pub decoded: TokenId,
    /// `|r|` after the update.
    pub r_len: usize,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    /// The manager halted after decoding this token.
    Token(TokenId),
    /// The maintained string ran out before a window could be formed.
    Exhausted,
    /// Step cap reached.
    Cap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemTrace {
    pub rows: Vec<TraceRow>,
    pub reason: HaltReason,
    /// Maintained string at halt.
    pub r: Vec<TokenId>,
    /// `r` with control tokens removed.
    pub output: Vec<TokenId>,
}

impl SystemTrace {
    pub fn steps(&self) -> u64 {
        self.rows.len() as u64
    }

    /// One line per step followed by a summary line:
    ///
    /// ```text
    /// step 1 window=[a b] decoded=b r_len=2 phase=normal
    /// halt reason=token:accept steps=1 output=[a b]
    /// ```
    pub fn render(&self, vocab: &Vocabulary) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(
                out,
                "step {} window=[{}] decoded={} r_len={} phase={}",
                row.t,
                vocab.render(&row.window),
                vocab.name(row.decoded),
                row.r_len,
                row.phase
            );
        }
        let reason = match self.reason {
            HaltReason::Token(t) => format!("token:{}", vocab.name(t)),
            HaltReason::Exhausted => "exhausted".to_string(),
            HaltReason::Cap => "cap".to_string(),
        };
        let _ = writeln!(
            out,
            "halt reason={reason} steps={} output=[{}]",
            self.steps(),
            vocab.render(&self.output)
        );
        out
    }
}
