use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use synchro_core::demo;
use synchro_core::store::{Clause, Expr};
use synchro_core::synclang::{check_syncs, parse_sync, print_syncs, SyncDef, TemplateValue};

fn listings() -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/listings");
    let mut out: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn parse_all() -> Vec<SyncDef> {
    listings().iter().flat_map(|(name, src)| parse_sync(src).unwrap_or_else(|e| panic!("{name}: {e}"))).collect()
}

fn find<'a>(defs: &'a [SyncDef], name: &str) -> &'a SyncDef {
    defs.iter().find(|d| d.name == name).unwrap()
}

fn depth(v: &TemplateValue) -> usize {
    match v {
        TemplateValue::Term(_) => 0,
        TemplateValue::Record(fields) => 1 + fields.iter().map(|(_, v)| depth(v)).max().unwrap_or(0),
    }
}

#[test]
fn every_listing_parses() {
    let defs = parse_all();
    assert_eq!(defs.len(), 17);
    let names: BTreeSet<&str> = defs.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names.len(), 15);
    let mut distinct: Vec<&SyncDef> = Vec::new();
    for d in &defs {
        if !distinct.contains(&d) {
            distinct.push(d);
        }
    }
    assert_eq!(distinct.len(), 16);
}

#[test]
fn listings_round_trip_through_the_printer() {
    for (name, src) in listings() {
        let defs = parse_sync(&src).unwrap();
        let printed = print_syncs(&defs);
        let again = parse_sync(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(again, defs, "{name}");
        assert_eq!(print_syncs(&again), printed, "{name}");
    }
}

#[test]
fn registration_structure() {
    let defs = parse_all();
    let r = find(&defs, "Registration");
    assert_eq!(r.when.len(), 1);
    assert_eq!(r.when[0].input.len(), 3);
    assert!(r.when[0].output.is_empty());
    let q = r.where_.as_ref().unwrap();
    assert!(matches!(q.clauses.as_slice(), [Clause::Bind { expr: Expr::Uuid, target }] if target == "user"));
    assert_eq!(r.then.len(), 1);
    assert_eq!(r.then[0].args.len(), 3);
}

#[test]
fn registration_response_structure() {
    let defs = parse_all();
    let r = find(&defs, "RegistrationResponse");
    assert_eq!(r.when.len(), 5);
    assert_eq!(r.where_.as_ref().unwrap().graph_patterns().len(), 3);
    let body = &r.then[0].args.iter().find(|(k, _)| k == "body").unwrap().1;
    assert_eq!(depth(body), 2);
}

#[test]
fn format_article_groups_and_uses_optionals() {
    let defs = parse_all();
    let f = find(&defs, "FormatArticle");
    let q = f.where_.as_ref().unwrap();
    assert!(q.binds("_eachthen"));
    let optionals = q.clauses.iter().filter(|c| matches!(c, Clause::Optional(_))).count();
    assert_eq!(optionals, 2);
    assert!(!f.definite_vars().contains("tag"));
    assert!(f.definite_vars().contains("_eachthen"));
}

#[test]
fn listings_check_clean_against_shipped_specs() {
    let specs = demo::registered_specs();
    for (name, src) in listings() {
        let defs = parse_sync(&src).unwrap();
        let diags = check_syncs(&defs, &specs);
        assert!(diags.is_empty(), "{name}: {diags:#?}");
    }
}

#[test]
fn shipped_suites_round_trip() {
    for (name, src) in demo::SUITE_SOURCES {
        let defs = parse_sync(src).unwrap();
        assert_eq!(parse_sync(&print_syncs(&defs)).unwrap(), defs, "{name}");
    }
}

#[test]
fn unbound_then_variable_is_one_diagnostic() {
    let src = r#"
sync Broken
when { Web/request: [ method: "register" ; username: ?username ] => [] }
where { bind ( uuid() as ?user ) }
then { User/register: [ user: ?user ; name: ?username ; email: ?email ] }
"#;
    let diags = check_syncs(&parse_sync(src).unwrap(), &demo::registered_specs());
    assert_eq!(diags.len(), 1, "{diags:#?}");
    assert!(diags[0].message.contains("?email"), "{}", diags[0]);
}

#[test]
fn unknown_state_field_is_one_diagnostic() {
    let src = r#"
sync Nick
when { Profile/register: [] => [ profile: ?profile ] }
where { Profile: { ?profile nickname: ?nick } }
then { Web/format: [ type: "nick" ; nick: ?nick ] }
"#;
    let diags = check_syncs(&parse_sync(src).unwrap(), &demo::registered_specs());
    assert_eq!(diags.len(), 1, "{diags:#?}");
    assert!(diags[0].message.contains("nickname"));
}

#[test]
fn unknown_concepts_actions_and_fields_are_reported() {
    let src = r#"
sync Odd
when { Mail/sent: [] => [] User/frobnicate: [] => [] User/register: [ colour: ?c ] => [] }
then { User/register: [ user: ?c ; name: ?c ; email: ?c ; extra: ?c ] }
"#;
    let diags = check_syncs(&parse_sync(src).unwrap(), &demo::registered_specs());
    let text: Vec<String> = diags.iter().map(ToString::to_string).collect();
    assert!(text.iter().any(|d| d.contains("unknown concept `Mail`")), "{text:?}");
    assert!(text.iter().any(|d| d.contains("no action `frobnicate`")), "{text:?}");
    assert!(text.iter().any(|d| d.contains("input field `colour`")), "{text:?}");
    assert!(text.iter().any(|d| d.contains("input field `extra`")), "{text:?}");
}

#[test]
fn duplicate_names_are_reported() {
    let src = "sync A when { JWT/generate: [] => [] } then { JWT/generate: [ user: <https://x.test/u> ] }\n";
    let twice = format!("{src}{src}");
    let diags = check_syncs(&parse_sync(&twice).unwrap(), &demo::registered_specs());
    assert_eq!(diags.len(), 1);
    assert!(diags[0].message.contains("duplicate"));
}

#[test]
fn syntax_errors_carry_positions() {
    let cases = [
        ("sync A when { Web/request: [] => [] } then { }", "then"),
        ("sync A when { Web/request: [] } then { Web/respond: [] }", "=>"),
        ("sync A when { Web/request: [ body: [ x: 1 ] ] => [] } then { Web/respond: [] }", "nested"),
        ("sync A when { Web/request: [] => [] } then { Web/respond: [] => [] }", "output"),
        ("sync A when { Web/request: [ a: 1 ; a: 2 ] => [] } then { Web/respond: [] }", "duplicate"),
        ("sync A when { } then { Web/respond: [] }", "when"),
    ];
    for (src, needle) in cases {
        let err = parse_sync(src).unwrap_err().to_string();
        assert!(err.starts_with("1:"), "{err}");
        assert!(err.contains(needle), "{src}: {err}");
    }
    let err = parse_sync("sync A\nwhen {\n  Web/request: [ method: \"x\" ]\n}").unwrap_err().to_string();
    assert!(err.starts_with("4:"), "{err}");
}
