//! TOML run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gateway::{ChatBackend, Gateway, HttpBackend, MockBackend, ModelSpec, RetryPolicy, DEFAULT_IN_FLIGHT};
use crate::label::Task;
use crate::parse::NormalizationTable;
use crate::prompt::{Strategy, StrategyRegistry};
use crate::runner::{grid, RunCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Http,
    /// Answers every prompt with `mock_default`.
    Mock,
    /// Answers every prompt with its gold label.
    GoldOracle,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatewayConfig {
    #[serde(default = "default_backend")]
    pub backend: BackendKind,
    #[serde(default)]
    pub endpoint: String,
    /// Environment variable with the API key.
    #[serde(default)]
    pub auth: Option<String>,
    #[serde(default = "default_in_flight")]
    pub in_flight: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_mock_text")]
    pub mock_default: String,
}

fn default_backend() -> BackendKind {
    BackendKind::Http
}

fn default_in_flight() -> usize {
    DEFAULT_IN_FLIGHT
}

fn default_timeout() -> u64 {
    120
}

fn default_mock_text() -> String {
    "NATIVE".into()
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            backend: default_backend(),
            endpoint: String::new(),
            auth: None,
            in_flight: default_in_flight(),
            timeout_secs: default_timeout(),
            mock_default: default_mock_text(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub bench: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    /// Extra `alias<TAB>canonical` lines for the parser.
    pub normalization: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunLimits {
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    4
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            workers: default_workers(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub gateway: GatewayConfig,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default)]
    pub run: RunLimits,
    pub models: Vec<ModelSpec>,
    /// Setups beyond the five built-ins.
    #[serde(default)]
    pub strategies: Vec<Strategy>,
    /// Strategy names enabled per task.
    pub tasks: BTreeMap<Task, Vec<String>>,
}

impl RunConfig {
    /// Parse, resolve relative paths against the file's directory, and
    /// validate.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.check_paths()?;
        Ok(cfg)
    }

    /// Parse and validate everything except file existence.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for m in &mut cfg.models {
            if m.endpoint.is_empty() {
                m.endpoint = cfg.gateway.endpoint.clone();
            }
            if m.auth.is_none() {
                m.auth = cfg.gateway.auth.clone();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let p = &mut self.paths;
        for path in [&mut p.bench, &mut p.graph, &mut p.normalization, &mut p.out].into_iter().flatten() {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    fn check_paths(&self) -> Result<()> {
        let p = &self.paths;
        for path in [&p.bench, &p.graph, &p.normalization].into_iter().flatten() {
            if !path.exists() {
                return Err(Error::Config(format!("path does not exist: {}", path.display())));
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("no models configured".into()));
        }
        if self.gateway.backend == BackendKind::Http {
            if let Some(m) = self.models.iter().find(|m| m.endpoint.is_empty()) {
                return Err(Error::Config(format!("model {} has no endpoint", m.model_id)));
            }
        }
        let registry = self.registry()?;
        for (task, names) in &self.tasks {
            for n in names {
                registry
                    .get(n)
                    .map_err(|_| Error::Config(format!("{task}: strategy `{n}` is not registered")))?;
            }
        }
        Ok(())
    }

    pub fn registry(&self) -> Result<StrategyRegistry> {
        let mut reg = StrategyRegistry::default();
        for s in &self.strategies {
            reg.register(s.clone())?;
        }
        Ok(reg)
    }

    pub fn cells(&self) -> Vec<RunCell> {
        grid(&self.models, &self.tasks)
    }

    pub fn normalization_table(&self) -> Result<NormalizationTable> {
        match &self.paths.normalization {
            Some(p) => NormalizationTable::load_extended(p),
            None => Ok(NormalizationTable::default()),
        }
    }

    /// A gateway for the configured backend. `oracle_script` is required for
    /// the gold-oracle backend.
    pub fn gateway(&self, oracle_script: Option<std::collections::HashMap<String, String>>) -> Result<Gateway> {
        let backend: Arc<dyn ChatBackend> = match self.gateway.backend {
            BackendKind::Http => Arc::new(
                HttpBackend::new(Duration::from_secs(self.gateway.timeout_secs))
                    .map_err(|e| Error::Config(e.to_string()))?,
            ),
            BackendKind::Mock => Arc::new(MockBackend::new(self.gateway.mock_default.clone())),
            BackendKind::GoldOracle => {
                let script = oracle_script
                    .ok_or_else(|| Error::Config("gold-oracle backend needs a benchmark".into()))?;
                Arc::new(MockBackend::with_script(script, self.gateway.mock_default.clone()))
            }
        };
        Ok(Gateway::new(backend)
            .with_retry(self.retry)
            .with_in_flight(self.gateway.in_flight))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::StrategyKind;
    use crate::retrieval::Ablation;

    const SAMPLE: &str = r#"
seed = 7

[gateway]
backend = "http"
endpoint = "https://openrouter.ai/api/v1"
auth = "OPENROUTER_API_KEY"

[retry]
max_attempts = 3
base_delay = 0.5

[[models]]
model_id = "google/gemma-3-12b-it"

[[models]]
model_id = "meta-llama/llama-3.3-70b-instruct"
max_in_flight = 2

[[strategies]]
name = "kg_graph_no_synonyms"
kind = "KG_GRAPH"
ablation = "no_synonyms"

[[strategies]]
name = "terse"
kind = "ZERO_SHOT"
[strategies.instructions]
classify = "One of {{labels}}."

[tasks]
classify = ["zero_shot", "kg_graph", "kg_graph_no_synonyms", "terse"]
neology = ["zero_shot", "kg_graph"]
"#;

    #[test]
    fn parses_and_resolves() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.models[0].temperature, 0.0);
        assert_eq!(cfg.models[0].max_output_tokens, 1024);
        assert_eq!(cfg.models[1].endpoint, "https://openrouter.ai/api/v1");
        assert_eq!(cfg.models[1].auth.as_deref(), Some("OPENROUTER_API_KEY"));
        assert_eq!(cfg.retry.max_attempts, 3);
        assert_eq!(cfg.retry.base_delay, Duration::from_millis(500));
        assert_eq!(cfg.retry.max_delay, Duration::from_secs(30));
        assert_eq!(cfg.cells().len(), 12);
        let reg = cfg.registry().unwrap();
        let s = reg.get("kg_graph_no_synonyms").unwrap();
        assert_eq!((s.kind, s.ablation), (StrategyKind::KgGraph, Some(Ablation::NoSynonyms)));
        assert!(reg.get("terse").unwrap().instructions.contains_key(&Task::Classify));
    }

    #[test]
    fn unknown_strategy_rejected() {
        let bad = SAMPLE.replace("\"terse\"]", "\"nonexistent\"]");
        assert!(matches!(RunConfig::from_toml(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_ablation_combination_rejected() {
        let bad = SAMPLE.replace("kind = \"KG_GRAPH\"", "kind = \"FEW_SHOT\"");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn missing_paths_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, SAMPLE.replace("seed = 7\n", "seed = 7\n[paths]\ngraph = \"missing.json\"\n")).unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Config(m)) if m.contains("missing.json")));
        fs::write(dir.path().join("missing.json"), "{}").unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.paths.graph.unwrap(), dir.path().join("missing.json"));
    }

    #[test]
    fn http_backend_needs_endpoint() {
        let bad = SAMPLE.replace("endpoint = \"https://openrouter.ai/api/v1\"\n", "");
        assert!(RunConfig::from_toml(&bad).is_err());
        let mock = bad.replace("backend = \"http\"", "backend = \"mock\"");
        assert!(RunConfig::from_toml(&mock).is_ok());
    }
}
