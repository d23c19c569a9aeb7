use std::collections::BTreeSet;

use crate::store::{QueryAst, Term};

/// `Concept/action: [ input ] => [ output ]` in a `when` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionPattern {
    pub concept: String,
    pub action: String,
    pub input: Vec<(String, Term)>,
    pub output: Vec<(String, Term)>,
}

/// A value in a `then` template; records may nest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateValue {
    Term(Term),
    Record(Vec<(String, TemplateValue)>),
}

/// `Concept/action: [ args ]` in a `then` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub concept: String,
    pub action: String,
    pub args: Vec<(String, TemplateValue)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncDef {
    pub name: String,
    pub when: Vec<ActionPattern>,
    pub where_: Option<QueryAst>,
    pub then: Vec<Invocation>,
}

fn term_vars<'a>(fields: impl IntoIterator<Item = &'a Term>, out: &mut BTreeSet<String>) {
    for t in fields {
        if let Term::Var(v) = t {
            out.insert(v.clone());
        }
    }
}

impl ActionPattern {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        term_vars(self.input.iter().chain(&self.output).map(|(_, t)| t), &mut out);
        out
    }
}

impl TemplateValue {
    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            TemplateValue::Term(t) => term_vars([t], out),
            TemplateValue::Record(fields) => fields.iter().for_each(|(_, v)| v.vars(out)),
        }
    }
}

impl Invocation {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.args.iter().for_each(|(_, v)| v.vars(&mut out));
        out
    }
}

impl SyncDef {
    /// Variables bound by the `when` patterns.
    pub fn when_vars(&self) -> BTreeSet<String> {
        self.when.iter().flat_map(ActionPattern::vars).collect()
    }

    /// Variables that may be bound when `then` is instantiated.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut vars = self.when_vars();
        if let Some(q) = &self.where_ {
            vars.extend(q.bound_vars());
        }
        vars
    }

    /// Variables bound in every frame reaching `then`.
    pub fn definite_vars(&self) -> BTreeSet<String> {
        let when = self.when_vars();
        match &self.where_ {
            Some(q) => q.definite_vars(&when),
            None => when,
        }
    }

    /// Concept names referenced anywhere in the rule.
    pub fn concepts(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.when.iter().map(|p| p.concept.as_str()).collect();
        out.extend(self.then.iter().map(|i| i.concept.as_str()));
        if let Some(q) = &self.where_ {
            out.extend(q.graph_patterns().into_iter().map(|g| g.concept.as_str()));
        }
        out
    }
}
