use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use synchro_core::demo;
use synchro_core::engine::{Engine, LogEntry, MemoryLog};
use synchro_core::synclang::SyncDef;
use synchro_core::{ActionRecord, Iri, Record, SyncEdge, Value};

use super::register_input;

/// Every shipped sync that can coexist in one ruleset.
pub fn pool() -> Vec<SyncDef> {
    let mut defs = demo::suites(demo::BASIC).unwrap();
    let validated = demo::suites(&["registration_validated"]).unwrap();
    defs.extend(validated.into_iter().filter(|d| d.name != "Registration"));
    defs
}

pub fn engine_for(syncs: Vec<SyncDef>, log: MemoryLog) -> Engine {
    let mut engine = Engine::new(demo::config(), Box::new(log));
    for (name, spec) in demo::REGISTRY {
        engine.register_builtin(name, demo::concept_spec(spec).unwrap()).unwrap();
    }
    engine.load_syncs(syncs).expect("a subset of a clean ruleset is clean");
    engine
}

#[derive(Debug, Clone)]
pub enum Op {
    Register { user: usize, good: bool },
    Create { user: usize, title: usize, tags: usize },
    Comment { user: usize, title: usize },
    Delete { user: usize, title: usize },
    Favorite { user: usize, title: usize },
    Get { title: usize },
    Unknown,
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0..3usize, any::<bool>()).prop_map(|(user, good)| Op::Register { user, good }),
        3 => (0..3usize, 0..2usize, 0..3usize).prop_map(|(user, title, tags)| Op::Create { user, title, tags }),
        2 => (0..3usize, 0..2usize).prop_map(|(user, title)| Op::Comment { user, title }),
        1 => (0..3usize, 0..2usize).prop_map(|(user, title)| Op::Delete { user, title }),
        1 => (0..3usize, 0..2usize).prop_map(|(user, title)| Op::Favorite { user, title }),
        1 => (0..2usize).prop_map(|title| Op::Get { title }),
        1 => Just(Op::Unknown),
    ]
}

pub fn ruleset() -> impl Strategy<Value = Vec<SyncDef>> {
    let defs = pool();
    let n = defs.len();
    (proptest::collection::vec(any::<bool>(), n), Just(defs).prop_shuffle())
        .prop_map(|(keep, defs)| defs.into_iter().zip(keep).filter(|(_, k)| *k).map(|(d, _)| d).collect())
}

const NAMES: [&str; 3] = ["ada", "bob", "cy"];
const TITLES: [&str; 2] = ["First", "Second"];

/// Drives `ops` through `engine`, deriving tokens from earlier responses.
/// Returns the root input of every flow.
pub fn drive(engine: &mut Engine, ops: &[Op]) -> Vec<Record> {
    let mut tokens: BTreeMap<usize, String> = BTreeMap::new();
    let mut roots = Vec::new();
    for op in ops {
        let token = |u: &usize| tokens.get(u).cloned().unwrap_or_else(|| "tok-forged".into());
        let input = match op {
            Op::Register { user, good } => {
                let name = NAMES[*user];
                register_input(name, &format!("{name}@x.io"), if *good { "password1" } else { "pw" })
            }
            Op::Create { user, title, tags } => {
                let mut r = Record::new()
                    .with("method", "create_article")
                    .with("title", TITLES[*title])
                    .with("description", "d")
                    .with("body", "b")
                    .with("token", &*token(user));
                if *tags > 0 {
                    r.insert("tagList", Value::List((0..*tags).map(|i| Value::text(format!("t{i}"))).collect()));
                }
                r
            }
            Op::Comment { user, title } => Record::new()
                .with("method", "add_comment")
                .with("token", &*token(user))
                .with("slug", TITLES[*title].to_lowercase())
                .with("body", "c"),
            Op::Delete { user, title } => Record::new()
                .with("method", "delete_article")
                .with("token", &*token(user))
                .with("slug", TITLES[*title].to_lowercase()),
            Op::Favorite { user, title } => Record::new()
                .with("method", "favorite_article")
                .with("token", &*token(user))
                .with("slug", TITLES[*title].to_lowercase()),
            Op::Get { title } => Record::new().with("method", "get_article").with("slug", TITLES[*title].to_lowercase()),
            Op::Unknown => Record::new().with("method", "teapot"),
        };
        let flow = engine.request("Web", "request", input.clone()).expect("flow runs");
        if let Op::Register { user, .. } = op {
            let token = engine
                .response(&flow)
                .and_then(|r| r.body.get("user").and_then(Value::as_record).and_then(|u| u.text("token")).map(str::to_string));
            if let Some(t) = token {
                tokens.insert(*user, t);
            }
        }
        roots.push(input);
    }
    roots
}

pub fn record_set(engine: &Engine) -> BTreeMap<Iri, ActionRecord> {
    engine.records().map(|r| (r.id.clone(), r.clone())).collect()
}

pub fn edge_set(engine: &Engine) -> BTreeSet<SyncEdge> {
    engine.edges().iter().cloned().collect()
}

/// Invariants any complete log satisfies.
pub fn check_log(engine: &Engine, log: &MemoryLog) -> Result<(), TestCaseError> {
    let mut invoked: BTreeMap<Iri, usize> = BTreeMap::new();
    let mut completed: BTreeMap<Iri, usize> = BTreeMap::new();
    for e in log.entries() {
        if let LogEntry::Record(r) = e {
            *if r.is_invocation() { &mut invoked } else { &mut completed }.entry(r.id).or_default() += 1;
        }
    }
    prop_assert!(invoked.values().all(|n| *n == 1), "an invocation was logged twice");
    prop_assert!(completed.values().all(|n| *n == 1), "a completion was logged twice");
    let targets: BTreeSet<&Iri> = engine.edges().iter().filter_map(|e| e.to.as_action()).collect();
    for id in invoked.keys() {
        prop_assert!(targets.contains(id), "invocation {id} has no cause");
        prop_assert!(completed.contains_key(id), "invocation {id} never completed");
    }
    for e in engine.edges() {
        let from = engine.record(&e.from).expect("edge source is a record");
        prop_assert!(from.is_completion());
        if let Some(to) = e.to.as_action() {
            prop_assert_eq!(&engine.record(to).unwrap().flow, &from.flow, "edge crosses flows");
        }
    }
    Ok(())
}
