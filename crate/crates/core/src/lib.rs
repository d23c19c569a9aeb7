//! Runtime for applications built from independent *concepts* composed by
//! declarative *synchronizations*.
//!
//! Concepts are services with their own relational state and named actions.
//! Synchronizations are `when`/`where`/`then` rules: when a set of action
//! completions occur in the same flow, and the state of one or more concepts
//! matches the `where` query, the `then` invocations are issued. Every action
//! occurrence is recorded as data, every emitted invocation carries an edge
//! back to the completions that caused it, and the append-only log of records
//! and edges is enough to rebuild the whole runtime after a crash.
//!
//! The crate is organised as:
//!
//! - [`model`]: names, values, action records and their quad encoding
//! - [`store`]: the in-memory quad store and the `where` query evaluator
//! - [`speclang`]: parser/validator for `.concept` specifications
//! - [`synclang`]: parser/checker for `.sync` rulesets
//! - [`engine`]: the synchronization engine, its log and crash recovery
//! - [`concepts`]: the concept runtime interface and built-in concepts
//! - [`demo`]: the shipped concept specs and sync suites

pub mod concepts;
pub mod demo;
pub mod engine;
pub mod model;
pub mod speclang;
pub mod store;
pub mod synclang;

pub use concepts::{ActionContext, Concept, ConceptError, StateGraph};
pub use engine::{Engine, EngineConfig, EngineError, FiringKey, FlowTrace};
pub use model::{qualify, ActionRecord, EdgeTarget, FlowToken, Iri, NamingError, Record, SyncEdge, Value};
pub use speclang::{parse_concept_spec, ConceptSpec};
pub use store::{Frame, QueryAst, Quad, Store};
pub use synclang::{check_syncs, parse_sync, SyncDef};
