use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Task;
use crate::retrieval::Ablation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StrategyKind {
    ZeroShot,
    FewShot,
    Minimal,
    KgFlat,
    KgGraph,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::ZeroShot,
        StrategyKind::FewShot,
        StrategyKind::Minimal,
        StrategyKind::KgFlat,
        StrategyKind::KgGraph,
    ];

    /// Registry name of the built-in strategy of this kind.
    pub fn builtin_name(self) -> &'static str {
        match self {
            StrategyKind::ZeroShot => "zero_shot",
            StrategyKind::FewShot => "few_shot",
            StrategyKind::Minimal => "minimal",
            StrategyKind::KgFlat => "kg_flat",
            StrategyKind::KgGraph => "kg_graph",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::ZeroShot => "ZERO_SHOT",
            StrategyKind::FewShot => "FEW_SHOT",
            StrategyKind::Minimal => "MINIMAL",
            StrategyKind::KgFlat => "KG_FLAT",
            StrategyKind::KgGraph => "KG_GRAPH",
        })
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let folded = s.trim().to_ascii_lowercase().replace('-', "_");
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.builtin_name() == folded)
            .ok_or_else(|| Error::UnknownValue {
                what: "strategy kind",
                value: s.to_string(),
            })
    }
}

/// A named prompt setup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub name: String,
    pub kind: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablation: Option<Ablation>,
    /// Replacement instruction templates keyed by task.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub instructions: BTreeMap<Task, String>,
}

impl Strategy {
    pub fn new(name: impl Into<String>, kind: StrategyKind, ablation: Option<Ablation>) -> Result<Self> {
        let s = Strategy {
            name: name.into(),
            kind,
            ablation,
            instructions: BTreeMap::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn builtin(kind: StrategyKind) -> Self {
        Strategy {
            name: kind.builtin_name().to_string(),
            kind,
            ablation: None,
            instructions: BTreeMap::new(),
        }
    }

    pub fn with_instruction(mut self, task: Task, template: impl Into<String>) -> Self {
        self.instructions.insert(task, template.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.contains("__") {
            return Err(Error::InvalidArgument(format!(
                "strategy name `{}` must be non-empty and free of `/`, `\\` and `__`",
                self.name
            )));
        }
        match self.ablation {
            Some(a) if a != Ablation::LexOnly && self.kind != StrategyKind::KgGraph => {
                Err(Error::InvalidArgument(format!(
                    "strategy `{}`: ablation `{a}` requires kind KG_GRAPH, got {}",
                    self.name, self.kind
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn needs_graph(&self) -> bool {
        matches!(self.kind, StrategyKind::KgFlat | StrategyKind::KgGraph) || self.ablation.is_some()
    }

    pub fn needs_demos(&self) -> bool {
        self.kind == StrategyKind::FewShot
    }
}

/// Name → strategy. Starts with the five built-ins; further setups are
/// registered from configuration.
#[derive(Debug, Clone)]
pub struct StrategyRegistry {
    strategies: BTreeMap<String, Strategy>,
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        StrategyRegistry {
            strategies: StrategyKind::ALL
                .into_iter()
                .map(|k| (k.builtin_name().to_string(), Strategy::builtin(k)))
                .collect(),
        }
    }
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry {
            strategies: BTreeMap::new(),
        }
    }

    /// Adds or replaces a strategy after validation.
    pub fn register(&mut self, strategy: Strategy) -> Result<()> {
        strategy.validate()?;
        self.strategies.insert(strategy.name.clone(), strategy);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Strategy> {
        self.strategies.get(name).ok_or_else(|| Error::UnknownValue {
            what: "strategy",
            value: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.strategies.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }
}
