//! The shipped concept specifications and sync suites of the demo blogging
//! application.

use std::collections::BTreeMap;

use crate::concepts::Concept;
use crate::engine::{ActionLog, Engine, EngineConfig, EngineError};
use crate::model::Iri;
use crate::speclang::{parse_concept_spec, ConceptSpec, SpecError};
use crate::synclang::{parse_sync, SyncDef, SyncError};

macro_rules! asset {
    ($dir:literal, $name:literal, $ext:literal) => {
        ($name, include_str!(concat!("../../assets/", $dir, "/", $name, ".", $ext)))
    };
}

/// Concept specification sources keyed by spec name.
pub const CONCEPT_SOURCES: &[(&str, &str)] = &[
    asset!("concepts", "Web", "concept"),
    asset!("concepts", "User", "concept"),
    asset!("concepts", "Password", "concept"),
    asset!("concepts", "Profile", "concept"),
    asset!("concepts", "Token", "concept"),
    asset!("concepts", "Article", "concept"),
    asset!("concepts", "Comment", "concept"),
    asset!("concepts", "Tag", "concept"),
    asset!("concepts", "Favorite", "concept"),
];

/// Sync suite sources keyed by suite name.
pub const SUITE_SOURCES: &[(&str, &str)] = &[
    asset!("syncs", "registration_basic", "sync"),
    asset!("syncs", "registration_validated", "sync"),
    asset!("syncs", "registration_core", "sync"),
    asset!("syncs", "errors", "sync"),
    asset!("syncs", "articles", "sync"),
    asset!("syncs", "formatting", "sync"),
    asset!("syncs", "moderation", "sync"),
];

/// Default application configuration.
pub const APP_TOML: &str = include_str!("../../assets/app.toml");

/// Registered concept name and the spec it instantiates.
pub const REGISTRY: &[(&str, &str)] = &[
    ("Web", "Web"),
    ("User", "User"),
    ("Password", "Password"),
    ("Profile", "Profile"),
    ("JWT", "Token"),
    ("Article", "Article"),
    ("Comment", "Comment"),
    ("Tag", "Tag"),
    ("Favorite", "Favorite"),
];

/// Registration validated by `Password/validate` before the user exists.
pub const VALIDATED: &[&str] = &["registration_validated", "registration_core", "errors", "articles", "formatting", "moderation"];

/// Registration that creates the user first.
pub const BASIC: &[&str] = &["registration_basic", "registration_core", "errors", "articles", "formatting", "moderation"];

pub fn concept_source(name: &str) -> Option<&'static str> {
    CONCEPT_SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn suite_source(name: &str) -> Option<&'static str> {
    SUITE_SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn concept_spec(name: &str) -> Result<ConceptSpec, SpecError> {
    let src = concept_source(name).ok_or(SpecError::MissingSection("concept"))?;
    parse_concept_spec(src)
}

/// Specs keyed by their registered names.
pub fn registered_specs() -> BTreeMap<String, ConceptSpec> {
    REGISTRY
        .iter()
        .map(|(name, spec)| ((*name).to_string(), concept_spec(spec).expect("shipped spec parses")))
        .collect()
}

/// Parses the named suites in order and concatenates their syncs.
pub fn suites(names: &[&str]) -> Result<Vec<SyncDef>, SyncError> {
    let mut out = Vec::new();
    for name in names {
        let src = suite_source(name).unwrap_or_default();
        out.extend(parse_sync(src)?);
    }
    Ok(out)
}

/// The prefix used by the demo application.
pub fn prefix() -> Iri {
    Iri::new("https://example.org/conduit").expect("valid prefix")
}

pub fn config() -> EngineConfig {
    EngineConfig::new(prefix(), "1")
}

/// An engine with every registered concept and the named suites loaded.
/// `overrides` replaces the built-in implementation of a registered name.
pub fn engine_with(
    config: EngineConfig,
    suite_names: &[&str],
    log: Box<dyn ActionLog>,
    overrides: Vec<(&str, Box<dyn Concept>)>,
) -> Result<Engine, EngineError> {
    let mut engine = Engine::new(config, log);
    let mut overrides: BTreeMap<&str, Box<dyn Concept>> = overrides.into_iter().collect();
    for (name, spec_name) in REGISTRY {
        let spec = concept_spec(spec_name)?;
        match overrides.remove(name) {
            Some(imp) => engine.register_concept(name, spec, imp)?,
            None => engine.register_builtin(name, spec)?,
        }
    }
    engine.load_syncs(suites(suite_names)?)?;
    Ok(engine)
}

pub fn engine(config: EngineConfig, suite_names: &[&str], log: Box<dyn ActionLog>) -> Result<Engine, EngineError> {
    engine_with(config, suite_names, log, Vec::new())
}
