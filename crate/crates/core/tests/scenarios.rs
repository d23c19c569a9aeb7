mod common;

use std::time::Instant;

use common::*;
use synchro_core::Value;

const REGISTRATION_SYNCS: [&str; 5] = ["Registration", "NewPassword", "DefaultProfile", "NewUserToken", "RegistrationResponse"];

#[test]
fn registration_happy_path() {
    let mut app = App::basic();
    let start = Instant::now();
    let flow = app.register("alice", "a@x.io", "secret123");
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let r = app.response(&flow);
    assert_eq!(r.code, 200);
    let user = user_of(&r);
    assert_eq!(field_names(user), ["bio", "email", "image", "token", "username"]);
    assert_eq!(user.text("username"), Some("alice"));
    assert_eq!(user.text("email"), Some("a@x.io"));
    assert_eq!(user.text("bio"), Some(""));
    assert_eq!(user.text("image"), Some(""));
    assert!(user.text("token").unwrap().starts_with("tok-"));
    let trace = app.engine.trace_flow(&flow);
    for sync in REGISTRATION_SYNCS {
        assert!(trace.syncs().contains(&sync), "{sync} missing from {:?}", trace.syncs());
    }
}

#[test]
fn response_waits_for_every_when_pattern() {
    let mut app = App::basic();
    let flow = app.register("alice", "a@x.io", "secret123");
    let trace = app.engine.trace_flow(&flow);
    let respond = trace.actions("Web", "respond")[0];
    let causes: Vec<_> = trace.causes(&respond.id).into_iter().map(|e| trace.record(&e.from).unwrap().name.clone()).collect();
    assert_eq!(causes.len(), 5);
    let pos = |id: &synchro_core::Iri| trace.records.iter().position(|r| r.id == *id).unwrap();
    for name in [("User", "register"), ("Password", "set"), ("Profile", "register"), ("JWT", "generate")] {
        let rec = trace.actions(name.0, name.1)[0];
        assert!(pos(&rec.id) < pos(&respond.id));
    }
}

#[test]
fn duplicate_email_is_a_422_without_profile_or_token() {
    let mut app = App::basic();
    app.register("alice", "a@x.io", "secret123");
    let flow = app.register("alicia", "a@x.io", "secret456");
    let r = app.response(&flow);
    assert_eq!(r.code, 422);
    assert_eq!(r.error(), Some("email has already been taken"));
    let trace = app.engine.trace_flow(&flow);
    assert!(trace.records.iter().all(|rec| rec.concept_name() != "Profile" && rec.concept_name() != "JWT"));
    assert!(trace.syncs().contains(&"RegistrationError"));
}

#[test]
fn unknown_method_yields_only_the_root() {
    let mut app = App::basic();
    let flow = app.request(synchro_core::Record::new().with("method", "teleport"));
    let trace = app.engine.trace_flow(&flow);
    assert_eq!(trace.records.len(), 1);
    assert!(trace.edges.is_empty());
    assert!(app.engine.response(&flow).is_none());
}

#[test]
fn bad_password_under_the_original_rules_leaves_a_user_behind() {
    let mut app = App::basic();
    let bad = app.register("bob", "b@x.io", "abc");
    let r = app.response(&bad);
    assert_eq!(r.code, 422);
    assert!(r.error().unwrap().contains("at least"));

    let trace = app.engine.trace_flow(&bad);
    let register = trace.actions("User", "register")[0];
    let set = trace.actions("Password", "set")[0];
    assert!(register.output.as_ref().unwrap().contains("user"));
    assert!(set.output.as_ref().unwrap().contains("error"));
    let pos = |id: &synchro_core::Iri| trace.records.iter().position(|r| r.id == *id).unwrap();
    assert!(pos(&register.id) < pos(&set.id));

    let retry = app.register("bob", "b@x.io", "goodpassword");
    let r = app.response(&retry);
    assert_eq!(r.code, 422);
    assert!(r.error().unwrap().contains("already been taken"));
}

#[test]
fn validated_rules_fix_the_retry() {
    let mut baseline = App::basic();
    let ok = baseline.register("alice", "a@x.io", "secret123");
    let baseline_fields = field_names(user_of(&baseline.response(&ok)));

    let mut app = App::validated();
    let bad = app.register("bob", "b@x.io", "abc");
    let r = app.response(&bad);
    assert_eq!(r.code, 422);
    assert_eq!(r.error(), Some("password does not meet requirements"));
    assert!(app.engine.trace_flow(&bad).actions("User", "register").is_empty());

    let retry = app.register("bob", "b@x.io", "goodpassword");
    let r = app.response(&retry);
    assert_eq!(r.code, 200);
    assert_eq!(field_names(user_of(&r)), baseline_fields);
    let syncs = app.engine.trace_flow(&retry).syncs().into_iter().map(str::to_string).collect::<Vec<_>>();
    for s in ["ValidateRegistrationPassword", "Registration", "DefaultProfile", "NewUserToken", "RegistrationResponse"] {
        assert!(syncs.iter().any(|x| x == s), "{s} in {syncs:?}");
    }
}

fn cascade(n: usize) -> (App, synchro_core::FlowToken) {
    let mut app = App::basic();
    let token = app.user("author");
    let slug = app.article(&token, "Hello World", &[]);
    for i in 0..n {
        let flow = app.add_comment(&token, &slug, &format!("comment {i}"));
        assert_eq!(app.response(&flow).code, 200);
    }
    let flow = app.delete_article(&token, &slug);
    (app, flow)
}

#[test]
fn deleting_an_article_deletes_its_comments() {
    let (app, flow) = cascade(3);
    let trace = app.engine.trace_flow(&flow);
    let deletes = trace.actions("Comment", "delete");
    assert_eq!(deletes.len(), 3);
    assert!(deletes.iter().all(|d| d.output.as_ref().unwrap().contains("comment")));
    assert!(deletes.iter().all(|d| trace.responsible(&d.id).contains("CascadeDeleteComments")));
    assert_eq!(app.response(&flow).body.get("deleted"), Some(&Value::Bool(true)));
    let rendered = trace.to_string();
    assert_eq!(rendered.matches("[CascadeDeleteComments] Comment/delete").count(), 3, "{rendered}");
}

#[test]
fn deleting_an_uncommented_article_records_a_noop() {
    let (app, flow) = cascade(0);
    let trace = app.engine.trace_flow(&flow);
    assert!(trace.actions("Comment", "delete").is_empty());
    assert!(trace.noop_syncs().contains(&"CascadeDeleteComments"), "{:?}", trace.noop_syncs());
    assert_eq!(app.response(&flow).code, 200);
}

#[test]
fn only_the_author_may_delete() {
    let mut app = App::basic();
    let author = app.user("author");
    let other = app.user("other");
    let slug = app.article(&author, "Mine", &[]);
    let flow = app.delete_article(&other, &slug);
    assert_eq!(app.response(&flow).code, 403);
    let flow = app.get_article(&slug);
    assert_eq!(app.response(&flow).code, 200);
    let flow = app.delete_article("forged", &slug);
    assert_eq!(app.response(&flow).code, 401);
}

#[test]
fn article_with_two_tags_lists_both() {
    let mut app = App::basic();
    let token = app.user("writer");
    let flow = app.create_article(&token, "Tagged", &["rust", "sync"]);
    let r = app.response(&flow);
    let article = article_of(&r);
    assert_eq!(article.get("tagList"), Some(&Value::List(vec![Value::text("rust"), Value::text("sync")])));
    assert_eq!(article.get("favoritesCount"), Some(&Value::Int(0)));
    assert_eq!(article.get("favorited"), Some(&Value::Bool(false)));
    let author = article.get("author").and_then(Value::as_record).unwrap();
    assert_eq!(author.text("username"), Some("writer"));
}

#[test]
fn article_without_tags_has_an_empty_list() {
    let mut app = App::basic();
    let token = app.user("writer");
    let flow = app.create_article(&token, "Plain", &[]);
    let article = article_of(&app.response(&flow)).clone();
    assert_eq!(article.get("tagList"), Some(&Value::Nil));
    let json = synchro_core::model::json::record_to_plain_json(&article);
    assert_eq!(json["tagList"], serde_json::json!([]));
}

#[test]
fn favorites_are_counted() {
    let mut app = App::basic();
    let writer = app.user("writer");
    let fan = app.user("fan");
    let slug = app.article(&writer, "Popular", &[]);
    let flow = app.request(synchro_core::Record::new().with("method", "favorite_article").with("slug", &*slug).with("token", &*fan));
    assert_eq!(article_of(&app.response(&flow)).get("favoritesCount"), Some(&Value::Int(1)));
    let flow = app.get_article(&slug);
    assert_eq!(article_of(&app.response(&flow)).get("favoritesCount"), Some(&Value::Int(1)));
}

#[test]
fn duplicate_titles_get_distinct_slugs() {
    let mut app = App::basic();
    let token = app.user("writer");
    assert_eq!(app.article(&token, "Hello World", &[]), "hello-world");
    assert_eq!(app.article(&token, "Hello World", &[]), "hello-world-2");
    let flow = app.get_article("missing");
    assert_eq!(app.response(&flow).code, 404);
}
