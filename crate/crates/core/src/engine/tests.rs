use super::*;
use crate::demo;
use crate::synclang::parse_sync;

fn register_input(name: &str, email: &str, password: &str) -> Record {
    Record::new().with("method", "register").with("username", name).with("email", email).with("password", password)
}

fn basic() -> (Engine, MemoryLog) {
    let log = MemoryLog::new();
    let engine = demo::engine(demo::config(), demo::BASIC, Box::new(log.clone())).unwrap();
    (engine, log)
}

fn bare(syncs: &str) -> Engine {
    let mut engine = Engine::new(demo::config(), Box::new(MemoryLog::new()));
    for (name, spec) in demo::REGISTRY {
        engine.register_builtin(name, demo::concept_spec(spec).unwrap()).unwrap();
    }
    engine.load_syncs_unchecked(parse_sync(syncs).unwrap());
    engine
}

fn completion_of(engine: &Engine, flow: &FlowToken, concept: &str, action: &str) -> Iri {
    engine.records().find(|r| r.flow == *flow && r.concept_name() == concept && r.name == action).unwrap().id.clone()
}

#[test]
fn registration_reaches_a_response() {
    let (mut engine, _) = basic();
    let flow = engine.request("Web", "request", register_input("alice", "a@x.io", "secret123")).unwrap();
    let response = engine.response(&flow).unwrap();
    assert_eq!(response.code, 200);
    let user = response.body.get("user").and_then(Value::as_record).unwrap();
    let fields: Vec<&str> = user.fields().collect();
    assert_eq!(fields, ["bio", "email", "image", "token", "username"]);
    assert_eq!(user.text("username"), Some("alice"));
    assert_eq!(user.text("bio"), Some(""));
    assert!(engine.is_quiescent());
    assert!(!engine.step().unwrap());
}

#[test]
fn duplicate_concept_names_are_rejected() {
    let mut engine = Engine::new(demo::config(), Box::new(MemoryLog::new()));
    let spec = demo::concept_spec("Password").unwrap();
    engine.register_builtin("Password", spec.clone()).unwrap();
    assert!(matches!(engine.register_builtin("Password", spec), Err(EngineError::DuplicateConcept(_))));
}

#[test]
fn a_concept_with_no_actions_registers() {
    let mut engine = Engine::new(demo::config(), Box::new(MemoryLog::new()));
    let spec = crate::speclang::parse_concept_spec("concept Empty\npurpose\n    nothing\nstate\nactions\n").unwrap();
    engine.register_concept("Empty", spec, Box::new(crate::concepts::Web)).unwrap();
    assert!(engine.concept("Empty").is_some());
}

#[test]
fn only_bootstrap_actions_can_be_submitted() {
    let (mut engine, _) = basic();
    let err = engine.submit_external("User", "register", Record::new()).unwrap_err();
    assert!(matches!(err, EngineError::NotBootstrap { .. }));
    assert!(engine.submit_external("Web", "respond", Record::new()).is_err());
    let a = engine.submit_external("Web", "request", Record::new().with("method", "x")).unwrap();
    let b = engine.submit_external("Web", "request", Record::new().with("method", "x")).unwrap();
    assert_ne!(a, b);
    let root = engine.record(&completion_of(&engine, &a, "Web", "request")).unwrap();
    assert_eq!(root.output.as_ref().unwrap().reference("request"), Some(&root.id));
}

#[test]
fn new_password_matches_within_one_flow_only() {
    let src = demo::suite_source("registration_core").unwrap();
    let mut engine = bare(src);
    engine.load_syncs_unchecked(parse_sync(demo::suite_source("registration_basic").unwrap()).unwrap());
    let flow = engine.submit_external("Web", "request", register_input("bob", "b@x.io", "hunter22")).unwrap();
    // Process the request only: Registration fires and User/register completes.
    engine.step().unwrap();
    let register = completion_of(&engine, &flow, "User", "register");
    let matches = engine.match_when("NewPassword", &register);
    assert_eq!(matches.len(), 1);
    let frame = &matches[0].frame;
    assert_eq!(frame.get("password"), Some(&Value::text("hunter22")));
    assert_eq!(frame.get("user"), engine.record(&register).unwrap().output.as_ref().unwrap().get("user"));

    let other = engine.submit_external("Web", "request", Record::new().with("method", "register").with("password", "zzz")).unwrap();
    assert_ne!(other, flow);
    let m = engine.match_when("NewPassword", &register);
    assert_eq!(m.len(), 1, "a request in another flow must not match");
}

#[test]
fn error_patterns_discriminate_on_output() {
    let mut engine = bare(&[demo::suite_source("registration_basic").unwrap(), demo::suite_source("errors").unwrap()].concat());
    let ok = engine.request("Web", "request", register_input("carol", "c@x.io", "pw1234")).unwrap();
    let ok_register = completion_of(&engine, &ok, "User", "register");
    let dup = engine.request("Web", "request", register_input("carol", "c@x.io", "pw1234")).unwrap();
    let dup_register = completion_of(&engine, &dup, "User", "register");
    assert!(engine.records().any(|r| r.flow == ok && r.name == "register" && r.output.as_ref().unwrap().contains("user")));
    let fired: Vec<&FiringKey> = engine.fired().iter().filter(|k| k.sync == "RegistrationError").collect();
    assert_eq!(fired.len(), 1);
    assert!(fired[0].completions.contains(&dup_register));
    assert!(!fired[0].completions.contains(&ok_register));
    assert_eq!(engine.response(&dup).unwrap().code, 422);
    assert!(engine.response(&ok).is_none());
}

#[test]
fn registration_mints_a_user_entity() {
    let mut engine = bare(demo::suite_source("registration_basic").unwrap());
    let flow = engine.request("Web", "request", register_input("dan", "d@x.io", "pw1234")).unwrap();
    let trace = engine.trace_flow(&flow);
    let register = &trace.actions("User", "register")[0];
    let user = register.input.reference("user").unwrap();
    assert!(user.as_str().starts_with("https://example.org/conduit/entity/"));
    assert_eq!(trace.responsible(&register.id).into_iter().collect::<Vec<_>>(), ["Registration"]);
}

#[test]
fn empty_where_records_a_noop_firing_once() {
    let src = r#"
sync Lookup
when { Web/request: [ method: "find" ; name: ?name ] => [] }
where { User: { ?user name: ?name } }
then { Web/format: [ type: "user" ; user: ?user ] }
"#;
    let mut engine = bare(src);
    let flow = engine.request("Web", "request", Record::new().with("method", "find").with("name", "nobody")).unwrap();
    let trace = engine.trace_flow(&flow);
    assert_eq!(trace.records.len(), 1);
    assert_eq!(trace.noop_syncs(), ["Lookup"]);
    assert_eq!(trace.edges.len(), 1);
    let before = engine.records().count();
    assert_eq!(engine.rescan().unwrap(), 0);
    assert_eq!(engine.records().count(), before);
    assert_eq!(engine.edges().len(), 1);
}

#[test]
fn unregistered_concepts_complete_with_an_error() {
    let src = r#"
sync Mail
when { Web/request: [ method: "mail" ] => [] }
then { Mailer/send: [ to: "x" ] }
"#;
    let mut engine = bare(src);
    let flow = engine.request("Web", "request", Record::new().with("method", "mail")).unwrap();
    let send = engine.records().find(|r| r.flow == flow && r.name == "send").unwrap();
    assert!(send.output.as_ref().unwrap().text("error").unwrap().contains("Mailer"));
    assert_eq!(engine.faults().len(), 1);
}

#[test]
fn a_definite_unbound_variable_is_an_engine_error() {
    let src = r#"
sync Broken
when { Web/request: [ method: "go" ] => [] }
then { Web/format: [ type: "t" ; value: ?missing ] }
"#;
    let mut engine = bare(src);
    let err = engine.request("Web", "request", Record::new().with("method", "go")).unwrap_err();
    assert!(matches!(err, EngineError::Unbound { ref var, .. } if var == "missing"), "{err}");
}

#[test]
fn lint_rejects_bad_rulesets() {
    let (mut engine, _) = basic();
    let src = "sync Bad when { Web/request: [] => [] } then { Nope/x: [] }";
    assert!(matches!(engine.load_syncs(parse_sync(src).unwrap()), Err(EngineError::Lint(d)) if d.len() == 1));
}

#[test]
fn rule_loops_hit_the_step_limit() {
    let src = r#"
sync Loop
when { Web/format: [ type: "loop" ] => [] }
then { Web/format: [ type: "loop" ] }

sync Start
when { Web/request: [ method: "loop" ] => [] }
then { Web/format: [ type: "loop" ] }
"#;
    let mut engine = bare(src);
    engine.config.step_limit = 25;
    let err = engine.request("Web", "request", Record::new().with("method", "loop")).unwrap_err();
    assert!(matches!(err, EngineError::StepLimit(25)));
}

#[test]
fn every_record_is_logged_with_a_header_first() {
    let (mut engine, log) = basic();
    engine.request("Web", "request", register_input("erin", "e@x.io", "pw1234")).unwrap();
    let entries = log.entries();
    assert!(matches!(&entries[0], LogEntry::Header { version } if version == "1"));
    let text = log.to_text();
    assert_eq!(read_log(&text).unwrap(), entries);
    let logged: BTreeSet<&Iri> = entries
        .iter()
        .filter_map(|e| match e {
            LogEntry::Record(r) => Some(&r.id),
            _ => None,
        })
        .collect();
    assert_eq!(logged.len(), engine.records().count());
}

#[test]
fn store_holds_records_as_quads() {
    let (mut engine, _) = basic();
    let flow = engine.request("Web", "request", register_input("fay", "f@x.io", "pw1234")).unwrap();
    let id = completion_of(&engine, &flow, "User", "register");
    let schema = ActionSchema::for_prefix(&engine.config.prefix);
    let quads: Vec<_> = engine.store().describe(engine.action_graph(), &id).map(|(p, o)| (p.clone(), o.clone())).collect();
    assert!(quads.contains(&(schema.name.clone(), Value::text("register"))));
    assert!(quads.contains(&(schema.flow.clone(), Value::text(flow.as_str()))));
    let rec = crate::model::quads_to_record(engine.store().graph_quads(engine.action_graph()).collect::<Vec<_>>().iter(), &id, &schema);
    assert_eq!(rec.as_ref(), engine.record(&id));
}

#[test]
fn recovery_of_an_empty_log_is_an_empty_engine() {
    let (mut engine, _) = basic();
    let report = engine.recover(Vec::new()).unwrap();
    assert_eq!(report, RecoveryReport::default());
    assert_eq!(engine.records().count(), 0);
    assert!(!engine.step().unwrap());
}

#[test]
fn recovery_rejects_a_foreign_version() {
    let (mut engine, _) = basic();
    let entries = vec![LogEntry::Header { version: "0".into() }];
    assert!(matches!(engine.recover(entries), Err(EngineError::VersionMismatch { .. })));
}

#[test]
fn recovery_after_completion_matches_the_uninterrupted_run() {
    let (mut oracle, oracle_log) = basic();
    let flow = oracle.request("Web", "request", register_input("gus", "g@x.io", "pw1234")).unwrap();

    let (mut engine, _) = basic();
    engine.recover(oracle_log.entries()).unwrap();
    assert!(engine.is_quiescent());
    assert_eq!(engine.normalized_history(), oracle.normalized_history());
    assert_eq!(engine.response(&flow), oracle.response(&flow));
    assert_eq!(engine.store().dump(), oracle.store().dump());
}
