use serde::{Deserialize, Serialize};

use super::{AppendingManager, Manager, ManagerError, SummarizationManager, TwoCallManager};
use crate::vocab::{Vocabulary, EOS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManagerStyle {
    Summarization,
    Appending,
    TwoCall,
}

/// Manager configuration by token name, as read from a TOML file:
///
/// ```toml
/// style = "appending"
/// n = 2
/// halting = ["accept", "reject"]
/// rule = "pal.lag"     # optional next-token rule used in place of weights
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManagerConfig {
    pub style: ManagerStyle,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_halting")]
    pub halting: Vec<String>,
    #[serde(default)]
    pub rule: Option<String>,
}

fn default_budget() -> usize {
    1
}

fn default_halting() -> Vec<String> {
    vec![EOS.to_string()]
}

impl ManagerConfig {
    pub fn from_toml(text: &str) -> Result<Self, ManagerError> {
        toml::from_str(text).map_err(|e| ManagerError::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Resolves token names against the model vocabulary. `model_window`
    /// is the window of the model the manager will drive.
    pub fn resolve(&self, vocab: &Vocabulary, model_window: usize) -> Result<Manager, ManagerError> {
        let n = self.n.unwrap_or(model_window);
        match self.style {
            ManagerStyle::Summarization => {
                check_window(n, model_window)?;
                Ok(Manager::Summarization(SummarizationManager::new(n, self.budget, vocab)?))
            }
            ManagerStyle::Appending => {
                check_window(n, model_window)?;
                Ok(Manager::Appending(AppendingManager::new(n, &self.halting, vocab)?))
            }
            ManagerStyle::TwoCall => {
                if model_window != 3 || self.n.is_some_and(|n| n != 3) {
                    return Err(ManagerError::Config(
                        "the two-call manager needs a window-3 model".into(),
                    ));
                }
                Ok(Manager::TwoCall(TwoCallManager::new(&self.halting, vocab)?))
            }
        }
    }
}

fn check_window(n: usize, model_window: usize) -> Result<(), ManagerError> {
    if n > model_window {
        return Err(ManagerError::Config(format!(
            "manager window {n} exceeds the model window {model_window}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves() {
        let cfg = ManagerConfig::from_toml("style = \"appending\"\nn = 2\nhalting = [\"accept\", \"reject\"]\n").unwrap();
        let v = Vocabulary::new(["a", "accept", "reject"]).unwrap();
        let m = cfg.resolve(&v, 2).unwrap();
        assert_eq!(m.window_len(), 2);
        assert_eq!(ManagerConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn two_call_rejects_other_windows() {
        let cfg = ManagerConfig::from_toml("style = \"two-call\"").unwrap();
        let v = Vocabulary::new(["a", "<1>", "<2>", "<EOS>"]).unwrap();
        assert!(cfg.resolve(&v, 2).is_err());
        assert!(cfg.resolve(&v, 3).is_ok());
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(ManagerConfig::from_toml("style = \"appending\"\nwidth = 3").is_err());
    }
}
