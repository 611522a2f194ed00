//! Service and CLI configuration: a TOML file, then `PROMODEL_*` environment
//! overrides, then command-line flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use promodel::orchestrator::{HttpChatProvider, LlmProvider, LoopConfig, ProviderSettings, ReplayProvider};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Http,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    /// Fold the system message into the first user message.
    pub merge_system: bool,
    /// Directory of recorded responses when `kind = "replay"`.
    pub replay_dir: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        let settings = ProviderSettings::default();
        ProviderConfig {
            kind: ProviderKind::Http,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            model: settings.model,
            temperature: settings.temperature,
            timeout_secs: settings.timeout.as_secs(),
            merge_system: false,
            replay_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopSection {
    pub max_critical: usize,
    pub max_adjustable: usize,
    pub state_cap: usize,
}

impl Default for LoopSection {
    fn default() -> Self {
        let l = LoopConfig::default();
        LoopSection {
            max_critical: l.max_critical_attempts,
            max_adjustable: l.max_adjustable_attempts,
            state_cap: l.state_cap,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoreSection {
    /// Append-only JSON lines file. Without one, conversations live in memory.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ListenSection {
    pub address: String,
}

impl Default for ListenSection {
    fn default() -> Self {
        ListenSection { address: "127.0.0.1:8080".into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemplateSection {
    /// Directory with role.txt, knowledge.txt and so on; reloaded on change.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub provider: ProviderConfig,
    #[serde(rename = "loop")]
    pub loop_: LoopSection,
    pub store: StoreSection,
    pub listen: ListenSection,
    pub templates: TemplateSection,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Invalid { key: key.into(), message: e.to_string() })
}

impl Config {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text, path)
    }

    /// Applies `PROMODEL_<SECTION>_<KEY>` variables, e.g.
    /// `PROMODEL_PROVIDER_MODEL` or `PROMODEL_LOOP_MAX_CRITICAL`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        let get = |key: &str| lookup(&format!("PROMODEL_{}", key.replace('.', "_").to_uppercase()));
        if let Some(v) = get("provider.kind") {
            self.provider.kind = match v.as_str() {
                "http" => ProviderKind::Http,
                "replay" => ProviderKind::Replay,
                _ => return Err(ConfigError::Invalid { key: "provider.kind".into(), message: format!("unknown kind '{v}'") }),
            };
        }
        if let Some(v) = get("provider.endpoint") {
            self.provider.endpoint = v;
        }
        if let Some(v) = get("provider.api_key_env") {
            self.provider.api_key_env = v;
        }
        if let Some(v) = get("provider.model") {
            self.provider.model = v;
        }
        if let Some(v) = get("provider.replay_dir") {
            self.provider.replay_dir = Some(v.into());
        }
        if let Some(v) = get("loop.max_critical") {
            self.loop_.max_critical = parse("loop.max_critical", &v)?;
        }
        if let Some(v) = get("loop.max_adjustable") {
            self.loop_.max_adjustable = parse("loop.max_adjustable", &v)?;
        }
        if let Some(v) = get("store.path") {
            self.store.path = Some(v.into());
        }
        if let Some(v) = get("listen.address") {
            self.listen.address = v;
        }
        if let Some(v) = get("templates.dir") {
            self.templates.dir = Some(v.into());
        }
        Ok(())
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            max_adjustable_attempts: self.loop_.max_adjustable,
            max_critical_attempts: self.loop_.max_critical,
            settings: ProviderSettings {
                model: self.provider.model.clone(),
                temperature: self.provider.temperature,
                timeout: Duration::from_secs(self.provider.timeout_secs),
                ..ProviderSettings::default()
            },
            state_cap: self.loop_.state_cap,
        }
    }

    /// The configured provider. The API key is read from the environment
    /// here and never stored in the configuration.
    pub fn provider(&self, lookup: impl Fn(&str) -> Option<String>) -> Result<Arc<dyn LlmProvider>, ConfigError> {
        match self.provider.kind {
            ProviderKind::Replay => {
                let dir = self.provider.replay_dir.as_ref().ok_or_else(|| ConfigError::Invalid {
                    key: "provider.replay_dir".into(),
                    message: "required for the replay provider".into(),
                })?;
                let p = ReplayProvider::new(dir).map_err(|source| ConfigError::Read { path: dir.clone(), source })?;
                Ok(Arc::new(p))
            }
            ProviderKind::Http => {
                let key = lookup(&self.provider.api_key_env);
                let mut p = HttpChatProvider::new(self.provider.endpoint.clone(), key);
                if self.provider.merge_system {
                    p = p.without_system_role();
                }
                Ok(Arc::new(p))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    #[test]
    fn file_then_environment() {
        let text = r#"
            [provider]
            kind = "replay"
            replay_dir = "fixtures/replay/hotel"
            model = "gpt-4o"

            [loop]
            max_critical = 3

            [listen]
            address = "0.0.0.0:9000"
        "#;
        let mut c = Config::from_toml(text, Path::new("promodel.toml")).unwrap();
        assert_eq!(c.provider.kind, ProviderKind::Replay);
        assert_eq!(c.loop_.max_critical, 3);
        assert_eq!(c.loop_.max_adjustable, 2);
        let env: HashMap<&str, &str> =
            HashMap::from([("PROMODEL_PROVIDER_MODEL", "gemini-pro"), ("PROMODEL_LOOP_MAX_ADJUSTABLE", "4")]);
        c.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(c.provider.model, "gemini-pro");
        let l = c.loop_config();
        assert_eq!((l.max_critical_attempts, l.max_adjustable_attempts), (3, 4));
        assert_eq!(l.settings.model, "gemini-pro");
        assert_eq!(c.listen.address, "0.0.0.0:9000");
    }

    #[test]
    fn bad_values_are_reported() {
        let mut c = Config::default();
        let err = c.apply_env(|k| (k == "PROMODEL_LOOP_MAX_CRITICAL").then(|| "many".to_string())).unwrap_err();
        assert!(err.to_string().starts_with("loop.max_critical"));
        assert!(Config::from_toml("[provider]\ncolour = 1", Path::new("x.toml")).is_err());
    }

    #[test]
    fn replay_needs_a_directory() {
        let c = Config { provider: ProviderConfig { kind: ProviderKind::Replay, ..Default::default() }, ..Default::default() };
        assert!(c.provider(|_| None).is_err());
    }
}
