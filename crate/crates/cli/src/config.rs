//! Application configuration: which concepts and syncs make up an app, and
//! where it logs and listens.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use synchro_core::concepts::builtin;
use synchro_core::demo;
use synchro_core::engine::ActionLog;
use synchro_core::synclang::SyncDef;
use synchro_core::{parse_concept_spec, parse_sync, ConceptSpec, Engine, EngineConfig, Iri};

/// Overrides `log`.
pub const ENV_LOG: &str = "SYNCHRO_LOG";
/// Overrides `listen`.
pub const ENV_LISTEN: &str = "SYNCHRO_LISTEN";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptEntry {
    /// The registered name syncs refer to.
    pub name: String,
    /// The bundled spec (and built-in implementation) to use; defaults to
    /// `name`.
    pub spec: Option<String>,
    /// A spec source file to use instead of the bundled text.
    pub file: Option<PathBuf>,
}

impl ConceptEntry {
    pub fn spec_name(&self) -> &str {
        self.spec.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    pub prefix: String,
    pub version: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_step_limit")]
    pub step_limit: usize,
    #[serde(default = "default_log")]
    pub log: PathBuf,
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Bundled sync suites, loaded first.
    #[serde(default)]
    pub suites: Vec<String>,
    /// Sync source files, loaded after the suites.
    #[serde(default)]
    pub syncs: Vec<PathBuf>,
    #[serde(default)]
    pub concepts: Vec<ConceptEntry>,
    #[serde(skip)]
    base: PathBuf,
}

fn default_step_limit() -> usize {
    EngineConfig::DEFAULT_STEP_LIMIT
}

fn default_log() -> PathBuf {
    PathBuf::from("synchro.log")
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_timeout_ms() -> u64 {
    5000
}

/// Everything a configuration refers to, parsed.
pub struct Assembly {
    /// Registered name, spec and the built-in implementation name.
    pub concepts: Vec<(String, ConceptSpec, String)>,
    pub syncs: Vec<SyncDef>,
}

impl Assembly {
    pub fn specs(&self) -> BTreeMap<String, ConceptSpec> {
        self.concepts.iter().map(|(name, spec, _)| (name.clone(), spec.clone())).collect()
    }
}

impl AppConfig {
    /// Parses TOML; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: impl Into<PathBuf>) -> Result<Self> {
        let mut config: AppConfig = toml::from_str(text).context("invalid configuration")?;
        config.base = base.into();
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    /// The bundled demo application.
    pub fn bundled() -> Self {
        Self::from_toml(demo::APP_TOML, ".").expect("bundled configuration parses")
    }

    /// Applies environment overrides for the log path and bind address.
    pub fn with_env(mut self) -> Self {
        if let Ok(log) = std::env::var(ENV_LOG) {
            let log = PathBuf::from(log);
            self.log = std::env::current_dir().map(|cwd| cwd.join(&log)).unwrap_or(log);
        }
        if let Ok(listen) = std::env::var(ENV_LISTEN) {
            self.listen = listen;
        }
        self
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    pub fn log_path(&self) -> PathBuf {
        self.resolve(&self.log)
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn engine_config(&self) -> Result<EngineConfig> {
        if self.version.trim().is_empty() {
            bail!("version must not be empty");
        }
        let prefix = Iri::new(self.prefix.clone())?;
        let mut config = EngineConfig::new(prefix, self.version.clone());
        config.step_limit = self.step_limit;
        config.seed = self.seed;
        Ok(config)
    }

    /// Reads and parses every referenced spec and sync source.
    pub fn assemble(&self) -> Result<Assembly> {
        let mut concepts = Vec::new();
        for entry in &self.concepts {
            let spec = match &entry.file {
                Some(file) => {
                    let path = self.resolve(file);
                    let src = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    parse_concept_spec(&src).with_context(|| format!("in {}", path.display()))?
                }
                None => demo::concept_spec(entry.spec_name()).with_context(|| format!("concept {}", entry.name))?,
            };
            concepts.push((entry.name.clone(), spec, entry.spec_name().to_string()));
        }
        let mut syncs = Vec::new();
        for suite in &self.suites {
            let src = demo::suite_source(suite).with_context(|| format!("unknown suite {suite}"))?;
            syncs.extend(parse_sync(src).with_context(|| format!("in suite {suite}"))?);
        }
        for file in &self.syncs {
            let path = self.resolve(file);
            let src = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            syncs.extend(parse_sync(&src).with_context(|| format!("in {}", path.display()))?);
        }
        Ok(Assembly { concepts, syncs })
    }

    /// An engine with every concept registered and the ruleset loaded.
    /// Fails with the lint diagnostics when the ruleset does not check.
    pub fn engine(&self, log: Box<dyn ActionLog>) -> Result<Engine> {
        let assembly = self.assemble()?;
        let mut engine = Engine::new(self.engine_config()?, log);
        for (name, spec, imp) in assembly.concepts {
            let imp = builtin(&imp).with_context(|| format!("no built-in implementation for {imp}"))?;
            engine.register_concept(&name, spec, imp)?;
        }
        engine.load_syncs(assembly.syncs)?;
        Ok(engine)
    }
}
