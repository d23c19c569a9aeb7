//! Concept runtime interface and the built-in concepts.
//!
//! A concept sees only its own state graph through [`StateGraph`]; every
//! predicate it writes is qualified under its own namespace.

mod article;
mod comment;
mod favorite;
mod mutants;
mod password;
mod profile;
mod tag;
mod token;
mod user;
mod web;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{FlowToken, Iri, Record, Value};
use crate::speclang::ConceptSpec;
use crate::store::{Quad, Store};

pub use article::Article;
pub use comment::Comment;
pub use favorite::Favorite;
pub use mutants::{AlwaysValidPassword, ForgetfulUser, UrlOnlyProfile};
pub use password::Password;
pub use profile::Profile;
pub use tag::Tag;
pub use token::Token;
pub use user::User;
pub use web::{Web, WebExchange};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConceptError {
    #[error("concept {concept} has no action `{action}`")]
    UnknownAction { concept: String, action: String },
    #[error("no overload of {concept}/{action} accepts fields {fields:?}")]
    NoOverload { concept: String, action: String, fields: Vec<String> },
    #[error("{concept}/{action} returned fields {fields:?} matching no declared overload")]
    BadOutput { concept: String, action: String, fields: Vec<String> },
    #[error("invalid input: {0}")]
    BadInput(String),
}

/// Identifies the action record being executed. Concepts derive any
/// otherwise-random values (salts, tokens) from `record_id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionContext {
    pub record_id: Iri,
    pub flow: FlowToken,
}

/// A concept's own slice of the store. Relation names are local state
/// component names; they are qualified under the concept's namespace.
pub struct StateGraph<'a> {
    store: &'a mut Store,
    graph: Iri,
    namespace: Iri,
}

impl<'a> StateGraph<'a> {
    pub fn new(store: &'a mut Store, graph: Iri, namespace: Iri) -> Self {
        StateGraph { store, graph, namespace }
    }

    pub fn graph(&self) -> &Iri {
        &self.graph
    }

    fn pred(&self, rel: &str) -> Iri {
        self.namespace.child(rel)
    }

    fn quad(&self, subject: &Iri, rel: &str, value: Value) -> Quad {
        Quad::new(subject.clone(), self.pred(rel), value, self.graph.clone())
    }

    /// The single (smallest, if several) value of `rel` for `subject`.
    pub fn get(&self, subject: &Iri, rel: &str) -> Option<Value> {
        self.store.objects(&self.graph, subject, &self.pred(rel)).iter().next().cloned()
    }

    pub fn get_text(&self, subject: &Iri, rel: &str) -> Option<String> {
        self.get(subject, rel).and_then(|v| v.as_text().map(str::to_string))
    }

    pub fn all(&self, subject: &Iri, rel: &str) -> Vec<Value> {
        self.store.objects(&self.graph, subject, &self.pred(rel)).iter().cloned().collect()
    }

    pub fn has(&self, subject: &Iri, rel: &str, value: &Value) -> bool {
        self.store.contains(&self.graph, subject, &self.pred(rel), value)
    }

    /// Replaces every value of `rel` for `subject` with `value`.
    pub fn set(&mut self, subject: &Iri, rel: &str, value: impl Into<Value>) {
        self.clear(subject, rel);
        self.add(subject, rel, value);
    }

    pub fn add(&mut self, subject: &Iri, rel: &str, value: impl Into<Value>) {
        let q = self.quad(subject, rel, value.into());
        self.store.insert_one(q);
    }

    pub fn remove(&mut self, subject: &Iri, rel: &str, value: &Value) -> bool {
        let q = self.quad(subject, rel, value.clone());
        self.store.remove(&q)
    }

    pub fn clear(&mut self, subject: &Iri, rel: &str) {
        for value in self.all(subject, rel) {
            self.remove(subject, rel, &value);
        }
    }

    /// Removes every quad whose subject is `subject`.
    pub fn remove_subject(&mut self, subject: &Iri) {
        let quads: Vec<Quad> = self
            .store
            .describe(&self.graph, subject)
            .map(|(p, o)| Quad::new(subject.clone(), p.clone(), o.clone(), self.graph.clone()))
            .collect();
        for q in quads {
            self.store.remove(&q);
        }
    }

    /// Subjects whose `rel` includes `value`.
    pub fn find(&self, rel: &str, value: &Value) -> Vec<Iri> {
        self.store.subjects(&self.graph, &self.pred(rel), value).iter().cloned().collect()
    }

    /// Subjects with any value for `rel`.
    pub fn subjects(&self, rel: &str) -> Vec<Iri> {
        let set: BTreeSet<Iri> = self.store.pairs(&self.graph, &self.pred(rel)).map(|(s, _)| s.clone()).collect();
        set.into_iter().collect()
    }

    /// Set membership is stored as `(member, set, true)`.
    pub fn insert_member(&mut self, set: &str, member: &Iri) {
        self.add(member, set, true);
    }

    pub fn is_member(&self, set: &str, member: &Iri) -> bool {
        self.has(member, set, &Value::Bool(true))
    }
}

/// A concept implementation: a deterministic function of its state and
/// input.
pub trait Concept: Send {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, ctx: &ActionContext) -> Result<Record, ConceptError>;

    /// Actions that only ever originate outside the engine.
    fn bootstrap_actions(&self) -> &[&'static str] {
        &[]
    }
}

/// A registered concept: spec, implementation and where its state lives.
pub struct ConceptHandle {
    pub name: String,
    pub spec: ConceptSpec,
    pub namespace: Iri,
    pub graph: Iri,
    imp: Box<dyn Concept>,
}

fn field_names(r: &Record) -> Vec<String> {
    r.fields().map(str::to_string).collect()
}

impl ConceptHandle {
    pub fn new(name: impl Into<String>, spec: ConceptSpec, namespace: Iri, graph: Iri, imp: Box<dyn Concept>) -> Self {
        ConceptHandle { name: name.into(), spec, namespace, graph, imp }
    }

    pub fn is_bootstrap(&self, action: &str) -> bool {
        self.imp.bootstrap_actions().contains(&action)
    }

    pub fn has_bootstrap(&self) -> bool {
        !self.imp.bootstrap_actions().is_empty()
    }

    /// Checks the input shape against the spec, runs the action and checks
    /// the output against the declared overloads.
    pub fn invoke(&mut self, store: &mut Store, action: &str, input: &Record, ctx: &ActionContext) -> Result<Record, ConceptError> {
        if !self.spec.has_action(action) {
            return Err(ConceptError::UnknownAction { concept: self.name.clone(), action: action.into() });
        }
        let present: BTreeSet<&str> = input.fields().collect();
        if !self.spec.accepts_input(action, &present) {
            return Err(ConceptError::NoOverload { concept: self.name.clone(), action: action.into(), fields: field_names(input) });
        }
        let mut state = StateGraph::new(store, self.graph.clone(), self.namespace.clone());
        let output = self.imp.invoke(action, input, &mut state, ctx)?;
        let produced: BTreeSet<&str> = output.fields().collect();
        if !self.spec.admits_output(action, &produced) {
            return Err(ConceptError::BadOutput { concept: self.name.clone(), action: action.into(), fields: field_names(&output) });
        }
        Ok(output)
    }
}

/// Built-in implementation for a concept spec name.
pub fn builtin(name: &str) -> Option<Box<dyn Concept>> {
    Some(match name {
        "Web" => Box::new(Web),
        "User" => Box::new(User),
        "Password" => Box::new(Password),
        "Profile" => Box::new(Profile),
        "Token" => Box::new(Token),
        "Article" => Box::new(Article),
        "Comment" => Box::new(Comment),
        "Tag" => Box::new(Tag),
        "Favorite" => Box::new(Favorite),
        _ => return None,
    })
}

/// Deliberately broken implementations, keyed by the concept they imitate.
pub fn mutants() -> Vec<(&'static str, Box<dyn Concept>)> {
    vec![
        ("Password", Box::new(AlwaysValidPassword) as Box<dyn Concept>),
        ("User", Box::new(ForgetfulUser)),
        ("Profile", Box::new(UrlOnlyProfile)),
    ]
}

pub(crate) fn require_ref<'r>(input: &'r Record, field: &str) -> Result<&'r Iri, ConceptError> {
    input.reference(field).ok_or_else(|| ConceptError::BadInput(format!("`{field}` must be a reference")))
}

pub(crate) fn require_text<'r>(input: &'r Record, field: &str) -> Result<&'r str, ConceptError> {
    input.text(field).ok_or_else(|| ConceptError::BadInput(format!("`{field}` must be a string")))
}

pub(crate) fn error(message: impl Into<String>) -> Record {
    Record::new().with("error", message.into())
}

pub(crate) fn unknown(concept: &str, action: &str) -> ConceptError {
    ConceptError::UnknownAction { concept: concept.into(), action: action.into() }
}
