//! In-memory quad store and the `where`-clause query evaluator.

mod eval;
mod group;
mod query;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{Iri, Value};

pub use eval::{EvalEnv, Frame, Namespaces, QueryError};
pub use group::{group_by_eachthen, GroupError, EACHTHEN};
pub use query::{Clause, CmpOp, Expr, GraphPattern, QueryAst, Term, TriplePattern};

/// A (subject, predicate, object, graph) atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quad {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Value,
    pub graph: Iri,
}

impl Quad {
    pub fn new(subject: Iri, predicate: Iri, object: Value, graph: Iri) -> Self {
        Quad { subject, predicate, object, graph }
    }
}

impl fmt::Display for Quad {
    /// N-Quads-like: `<s> <p> o <g> .`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> <{}> {} <{}> .", self.subject, self.predicate, self.object, self.graph)
    }
}

#[derive(Debug, Default, Clone)]
struct Graph {
    spo: BTreeMap<Iri, BTreeMap<Iri, BTreeSet<Value>>>,
    pos: BTreeMap<Iri, BTreeMap<Value, BTreeSet<Iri>>>,
    len: usize,
}

impl Graph {
    fn insert(&mut self, s: Iri, p: Iri, o: Value) -> bool {
        let fresh = self.spo.entry(s.clone()).or_default().entry(p.clone()).or_default().insert(o.clone());
        if fresh {
            self.pos.entry(p).or_default().entry(o).or_default().insert(s);
            self.len += 1;
        }
        fresh
    }

    fn remove(&mut self, s: &Iri, p: &Iri, o: &Value) -> bool {
        let Some(preds) = self.spo.get_mut(s) else { return false };
        let Some(objs) = preds.get_mut(p) else { return false };
        if !objs.remove(o) {
            return false;
        }
        if objs.is_empty() {
            preds.remove(p);
        }
        if preds.is_empty() {
            self.spo.remove(s);
        }
        if let Some(by_obj) = self.pos.get_mut(p) {
            if let Some(subjects) = by_obj.get_mut(o) {
                subjects.remove(s);
                if subjects.is_empty() {
                    by_obj.remove(o);
                }
            }
            if by_obj.is_empty() {
                self.pos.remove(p);
            }
        }
        self.len -= 1;
        true
    }
}

/// Set-semantics quad store partitioned by graph, indexed by
/// subject-predicate and predicate-object.
///
/// Readers take `&Store`, the single writer `&mut Store`.
#[derive(Debug, Default, Clone)]
pub struct Store {
    graphs: BTreeMap<Iri, Graph>,
}

static EMPTY_OBJECTS: BTreeSet<Value> = BTreeSet::new();
static EMPTY_SUBJECTS: BTreeSet<Iri> = BTreeSet::new();

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, quads: impl IntoIterator<Item = Quad>) {
        for q in quads {
            self.insert_one(q);
        }
    }

    /// Returns `true` if the quad was not already present.
    pub fn insert_one(&mut self, q: Quad) -> bool {
        self.graphs.entry(q.graph).or_default().insert(q.subject, q.predicate, q.object)
    }

    pub fn remove(&mut self, q: &Quad) -> bool {
        self.graphs.get_mut(&q.graph).is_some_and(|g| g.remove(&q.subject, &q.predicate, &q.object))
    }

    pub fn len(&self) -> usize {
        self.graphs.values().map(|g| g.len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn graph_len(&self, graph: &Iri) -> usize {
        self.graphs.get(graph).map_or(0, |g| g.len)
    }

    pub fn graph_names(&self) -> impl Iterator<Item = &Iri> {
        self.graphs.keys()
    }

    pub fn contains(&self, graph: &Iri, s: &Iri, p: &Iri, o: &Value) -> bool {
        self.objects(graph, s, p).contains(o)
    }

    /// Objects of `(s, p)` in `graph`, in value order.
    pub fn objects(&self, graph: &Iri, s: &Iri, p: &Iri) -> &BTreeSet<Value> {
        self.graphs
            .get(graph)
            .and_then(|g| g.spo.get(s))
            .and_then(|preds| preds.get(p))
            .unwrap_or(&EMPTY_OBJECTS)
    }

    /// Subjects having `(p, o)` in `graph`.
    pub fn subjects(&self, graph: &Iri, p: &Iri, o: &Value) -> &BTreeSet<Iri> {
        self.graphs
            .get(graph)
            .and_then(|g| g.pos.get(p))
            .and_then(|by_obj| by_obj.get(o))
            .unwrap_or(&EMPTY_SUBJECTS)
    }

    /// Every `(subject, object)` pair for predicate `p` in `graph`.
    pub fn pairs<'a>(&'a self, graph: &Iri, p: &Iri) -> impl Iterator<Item = (&'a Iri, &'a Value)> + 'a {
        self.graphs
            .get(graph)
            .and_then(|g| g.pos.get(p))
            .into_iter()
            .flat_map(|by_obj| by_obj.iter().flat_map(|(o, subjects)| subjects.iter().map(move |s| (s, o))))
    }

    /// Predicates and objects of `s` in `graph`.
    pub fn describe<'a>(&'a self, graph: &Iri, s: &Iri) -> impl Iterator<Item = (&'a Iri, &'a Value)> + 'a {
        self.graphs
            .get(graph)
            .and_then(|g| g.spo.get(s))
            .into_iter()
            .flat_map(|preds| preds.iter().flat_map(|(p, objs)| objs.iter().map(move |o| (p, o))))
    }

    /// All quads, ordered by graph, subject, predicate, object.
    pub fn quads(&self) -> impl Iterator<Item = Quad> + '_ {
        self.graphs.iter().flat_map(|(g, graph)| {
            graph.spo.iter().flat_map(move |(s, preds)| {
                preds.iter().flat_map(move |(p, objs)| {
                    objs.iter().map(move |o| Quad::new(s.clone(), p.clone(), o.clone(), g.clone()))
                })
            })
        })
    }

    pub fn graph_quads<'a>(&'a self, graph: &'a Iri) -> impl Iterator<Item = Quad> + 'a {
        self.quads().filter(move |q| &q.graph == graph)
    }

    /// Debug dump, one N-Quads-like line per quad.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for q in self.quads() {
            out.push_str(&q.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(format!("https://example.org/{s}")).unwrap()
    }

    #[test]
    fn duplicate_inserts_are_idempotent() {
        let mut store = Store::new();
        let q = Quad::new(iri("u"), iri("name"), Value::text("x"), iri("g"));
        store.insert([q.clone(), q.clone()]);
        assert_eq!(store.len(), 1);
        assert!(!store.insert_one(q));
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn graphs_are_scoped() {
        let mut store = Store::new();
        store.insert([
            Quad::new(iri("u"), iri("name"), Value::text("x"), iri("g1")),
            Quad::new(iri("u"), iri("name"), Value::text("y"), iri("g2")),
        ]);
        let g1: Vec<_> = store.objects(&iri("g1"), &iri("u"), &iri("name")).iter().cloned().collect();
        assert_eq!(g1, vec![Value::text("x")]);
        assert_eq!(store.graph_len(&iri("g2")), 1);
        assert!(store.subjects(&iri("g1"), &iri("name"), &Value::text("y")).is_empty());
    }

    #[test]
    fn remove_keeps_indexes_consistent() {
        let mut store = Store::new();
        let q = Quad::new(iri("u"), iri("name"), Value::text("x"), iri("g"));
        store.insert_one(q.clone());
        assert!(store.remove(&q));
        assert!(!store.remove(&q));
        assert!(store.is_empty());
        assert_eq!(store.pairs(&iri("g"), &iri("name")).count(), 0);
    }

    #[test]
    fn dump_is_line_per_quad() {
        let mut store = Store::new();
        store.insert_one(Quad::new(iri("u"), iri("age"), Value::Int(3), iri("g")));
        assert_eq!(
            store.dump(),
            "<https://example.org/u> <https://example.org/age> 3 <https://example.org/g> .\n"
        );
    }
}
