//! Workloads shared by the benchmarks.

use synchro_core::demo;
use synchro_core::engine::{LogEntry, MemoryLog};
use synchro_core::{Engine, Record, Value};

pub fn register_input(i: usize) -> Record {
    Record::new()
        .with("method", "register")
        .with("username", format!("user{i}"))
        .with("email", format!("user{i}@bench.test"))
        .with("password", "password1")
}

/// The demo app with `users` already registered, logging in memory.
pub fn engine_with_users(users: usize) -> (Engine, MemoryLog) {
    let log = MemoryLog::new();
    let mut engine = demo::engine(demo::config(), demo::BASIC, Box::new(log.clone())).expect("demo engine");
    for i in 0..users {
        engine.request("Web", "request", register_input(i)).expect("registration");
    }
    (engine, log)
}

fn token(engine: &Engine, flow: &synchro_core::FlowToken) -> String {
    let r = engine.response(flow).expect("response");
    r.body.get("user").and_then(Value::as_record).and_then(|u| u.text("token")).expect("token").to_string()
}

/// An engine holding one article with `comments` comments, and the
/// author's token.
pub fn engine_with_comments(comments: usize) -> (Engine, String) {
    let mut engine = demo::engine(demo::config(), demo::BASIC, Box::new(MemoryLog::new())).expect("demo engine");
    let flow = engine.request("Web", "request", register_input(0)).expect("registration");
    let token = token(&engine, &flow);
    let article = Record::new()
        .with("method", "create_article")
        .with("title", "Bench")
        .with("description", "d")
        .with("body", "b")
        .with("token", &*token);
    engine.request("Web", "request", article).expect("article");
    for i in 0..comments {
        let c = Record::new().with("method", "add_comment").with("token", &*token).with("slug", "bench").with("body", format!("c{i}"));
        engine.request("Web", "request", c).expect("comment");
    }
    (engine, token)
}

pub fn delete_input(token: &str) -> Record {
    Record::new().with("method", "delete_article").with("token", token).with("slug", "bench")
}

/// The log of `flows` registrations.
pub fn session_log(flows: usize) -> Vec<LogEntry> {
    engine_with_users(flows).1.entries()
}

/// Every bundled sync source, concatenated.
pub fn all_sync_sources() -> String {
    demo::SUITE_SOURCES.iter().map(|(_, src)| *src).collect::<Vec<_>>().join("\n")
}
