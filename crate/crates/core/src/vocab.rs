//! Token vocabularies and reserved token names.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Index of a token in a [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenId(pub usize);

impl TokenId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub const PAD: &str = "<pad>";
pub const EOS: &str = "<EOS>";
pub const SUMMARY: &str = "<s>";
pub const CONTROL_1: &str = "<1>";
pub const CONTROL_2: &str = "<2>";
pub const ACCEPT: &str = "accept";
pub const REJECT: &str = "reject";
pub const EPSILON: &str = "ε";
pub const LEFT_END: &str = "▷";
pub const RIGHT_END: &str = "◁";
pub const BLANK: &str = "␣";

/// Shell-safe spellings accepted wherever a token name is parsed.
const ALIASES: &[(&str, &str)] = &[
    ("s!", SUMMARY),
    ("eos!", EOS),
    ("c1!", CONTROL_1),
    ("c2!", CONTROL_2),
    ("lb!", LEFT_END),
    ("rb!", RIGHT_END),
    ("eps!", EPSILON),
    ("blank!", BLANK),
    ("pad!", PAD),
];

/// Maps an alias to its canonical token name.
pub fn canonical_name(name: &str) -> &str {
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map_or(name, |(_, canon)| canon)
}

/// Tokens removed when a maintained string is read out as a final answer.
pub fn is_control_name(name: &str) -> bool {
    matches!(
        name,
        PAD | EOS | SUMMARY | CONTROL_1 | CONTROL_2 | EPSILON | LEFT_END | RIGHT_END
    )
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VocabError {
    #[error("unknown token `{0}`")]
    Unknown(String),
    #[error("duplicate token `{0}`")]
    Duplicate(String),
    #[error("token id {0} out of range for vocabulary of size {1}")]
    OutOfRange(usize, usize),
}

/// Ordered set of token names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self, VocabError> {
        let mut v = Self::default();
        for n in names {
            v.push(n.as_ref())?;
        }
        Ok(v)
    }

    /// Appends a token; fails if the (canonical) name is already present.
    pub fn push(&mut self, name: &str) -> Result<TokenId, VocabError> {
        let name = canonical_name(name).to_string();
        if self.index.contains_key(&name) {
            return Err(VocabError::Duplicate(name));
        }
        let id = TokenId(self.names.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        Ok(id)
    }

    /// Returns the id of `name`, appending it if absent.
    pub fn intern(&mut self, name: &str) -> TokenId {
        match self.get(name) {
            Some(id) => id,
            None => self.push(name).expect("absent name"),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<TokenId> {
        self.index.get(canonical_name(name)).copied()
    }

    pub fn id(&self, name: &str) -> Result<TokenId, VocabError> {
        self.get(name).ok_or_else(|| VocabError::Unknown(name.to_string()))
    }

    pub fn name(&self, id: TokenId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> impl Iterator<Item = TokenId> {
        (0..self.names.len()).map(TokenId)
    }

    pub fn check(&self, id: TokenId) -> Result<(), VocabError> {
        if id.0 < self.len() {
            Ok(())
        } else {
            Err(VocabError::OutOfRange(id.0, self.len()))
        }
    }

    pub fn is_control(&self, id: TokenId) -> bool {
        is_control_name(self.name(id))
    }

    /// Parses whitespace-separated token names.
    pub fn parse_tokens(&self, text: &str) -> Result<Vec<TokenId>, VocabError> {
        text.split_whitespace().map(|t| self.id(t)).collect()
    }

    pub fn render(&self, tokens: &[TokenId]) -> String {
        tokens
            .iter()
            .map(|&t| self.name(t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}
