use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{Iri, Value};

use super::query::{Clause, CmpOp, Expr, GraphPattern, QueryAst, Term, TriplePattern};
use super::Store;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unbound variable ?{0}")]
    UnboundVariable(String),
    #[error("unknown concept namespace {0:?}")]
    UnknownConcept(String),
    #[error("cannot compare {0} with {1}")]
    Incomparable(String, String),
}

/// Variable bindings flowing from `when` through `where` to `then`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frame(BTreeMap<String, Value>);

impl Frame {
    pub fn new() -> Self {
        Frame::default()
    }

    pub fn get(&self, var: &str) -> Option<&Value> {
        self.0.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    /// Binds `var`, or checks consistency if already bound. Returns `false`
    /// when `var` is bound to a different value (the frame dies).
    pub fn bind(&mut self, var: &str, value: Value) -> bool {
        match self.0.get(var) {
            Some(existing) => *existing == value,
            None => {
                self.0.insert(var.to_string(), value);
                true
            }
        }
    }

    pub fn with(mut self, var: &str, value: impl Into<Value>) -> Self {
        self.bind(var, value.into());
        self
    }

    pub fn remove(&mut self, var: &str) -> Option<Value> {
        self.0.remove(var)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether every binding of `other` is present in `self`.
    pub fn extends(&self, other: &Frame) -> bool {
        other.0.iter().all(|(k, v)| self.0.get(k) == Some(v))
    }
}

impl FromIterator<(String, Value)> for Frame {
    fn from_iter<T: IntoIterator<Item = (String, Value)>>(iter: T) -> Self {
        Frame(iter.into_iter().collect())
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "?{k} = {v}")?;
        }
        f.write_str("}")
    }
}

/// Maps a concept namespace used in a query to its state graph and the IRI
/// its state predicates are qualified under.
pub trait Namespaces {
    fn resolve(&self, concept: &str) -> Option<(Iri, Iri)>;
}

impl Namespaces for BTreeMap<String, (Iri, Iri)> {
    fn resolve(&self, concept: &str) -> Option<(Iri, Iri)> {
        self.get(concept).cloned()
    }
}

/// Evaluation context: namespace resolution and the `uuid()` source.
pub struct EvalEnv<'a> {
    pub namespaces: &'a dyn Namespaces,
    pub mint: &'a mut dyn FnMut() -> Value,
}

fn resolve_term<'a>(term: &'a Term, frame: &'a Frame) -> Option<&'a Value> {
    match term {
        Term::Var(v) => frame.get(v),
        Term::Value(value) => Some(value),
    }
}

impl Store {
    /// Evaluates `query` seeded with `seed`; returns every extension of
    /// `seed` satisfying the query, sorted.
    pub fn evaluate(&self, query: &QueryAst, seed: &Frame, env: &mut EvalEnv<'_>) -> Result<Vec<Frame>, QueryError> {
        let mut frames = self.eval_clauses(&query.clauses, vec![seed.clone()], env)?;
        frames.sort();
        Ok(frames)
    }

    fn eval_clauses(&self, clauses: &[Clause], mut frames: Vec<Frame>, env: &mut EvalEnv<'_>) -> Result<Vec<Frame>, QueryError> {
        for clause in clauses {
            if frames.is_empty() {
                break;
            }
            frames = match clause {
                Clause::Graph(g) => self.eval_graph(g, frames, env)?,
                Clause::Optional(inner) => {
                    let mut out = Vec::new();
                    for frame in frames {
                        let extended = self.eval_clauses(inner, vec![frame.clone()], env)?;
                        if extended.is_empty() {
                            out.push(frame);
                        } else {
                            out.extend(extended);
                        }
                    }
                    out
                }
                Clause::Bind { expr, target } => {
                    let mut out = Vec::with_capacity(frames.len());
                    for mut frame in frames {
                        match eval_expr(expr, &frame, env)? {
                            Some(value) => {
                                if frame.bind(target, value) {
                                    out.push(frame);
                                }
                            }
                            None => out.push(frame),
                        }
                    }
                    out
                }
                Clause::Filter(expr) => {
                    let mut out = Vec::new();
                    for frame in frames {
                        match eval_expr(expr, &frame, env)? {
                            Some(Value::Bool(true)) => out.push(frame),
                            Some(_) => {}
                            None => return Err(unbound_in(expr, &frame)),
                        }
                    }
                    out
                }
                Clause::NotExists(inner) => {
                    let mut out = Vec::new();
                    for frame in frames {
                        if self.eval_clauses(inner, vec![frame.clone()], env)?.is_empty() {
                            out.push(frame);
                        }
                    }
                    out
                }
            };
        }
        Ok(frames)
    }

    fn eval_graph(&self, g: &GraphPattern, mut frames: Vec<Frame>, env: &mut EvalEnv<'_>) -> Result<Vec<Frame>, QueryError> {
        let (graph, ns) = env.namespaces.resolve(&g.concept).ok_or_else(|| QueryError::UnknownConcept(g.concept.clone()))?;
        for triple in &g.triples {
            let predicate = ns.child(&triple.predicate);
            frames = frames.iter().flat_map(|f| self.match_triple(&graph, &predicate, triple, f)).collect();
        }
        Ok(frames)
    }

    fn match_triple(&self, graph: &Iri, predicate: &Iri, t: &TriplePattern, frame: &Frame) -> Vec<Frame> {
        let subject = resolve_term(&t.subject, frame);
        let object = resolve_term(&t.object, frame);
        let extend = |s: &Iri, o: &Value| -> Option<Frame> {
            let mut f = frame.clone();
            let ok = bind_term(&mut f, &t.subject, Value::Ref(s.clone())) && bind_term(&mut f, &t.object, o.clone());
            ok.then_some(f)
        };
        match (subject, object) {
            (Some(s), Some(o)) => match s.as_ref_iri() {
                Some(s) if self.contains(graph, s, predicate, o) => vec![frame.clone()],
                _ => Vec::new(),
            },
            (Some(s), None) => match s.as_ref_iri() {
                Some(si) => self.objects(graph, si, predicate).iter().filter_map(|o| extend(si, o)).collect(),
                None => Vec::new(),
            },
            (None, Some(o)) => self.subjects(graph, predicate, o).iter().filter_map(|s| extend(s, o)).collect(),
            (None, None) => self.pairs(graph, predicate).filter_map(|(s, o)| extend(s, o)).collect(),
        }
    }
}

fn bind_term(frame: &mut Frame, term: &Term, value: Value) -> bool {
    match term {
        Term::Var(v) => frame.bind(v, value),
        Term::Value(_) => true,
    }
}

fn unbound_in(expr: &Expr, frame: &Frame) -> QueryError {
    fn first(expr: &Expr, frame: &Frame) -> Option<String> {
        match expr {
            Expr::Term(Term::Var(v)) if !frame.contains(v) => Some(v.clone()),
            Expr::Coalesce(args) => args.iter().find_map(|a| first(a, frame)),
            Expr::Compare(_, a, b) => first(a, frame).or_else(|| first(b, frame)),
            _ => None,
        }
    }
    QueryError::UnboundVariable(first(expr, frame).unwrap_or_default())
}

fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<bool, QueryError> {
    let same_kind = std::mem::discriminant(a) == std::mem::discriminant(b);
    Ok(match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        _ if !same_kind => return Err(QueryError::Incomparable(a.to_string(), b.to_string())),
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Gt => a > b,
        CmpOp::Ge => a >= b,
    })
}

/// `None` means the expression has no value (an unbound variable).
fn eval_expr(expr: &Expr, frame: &Frame, env: &mut EvalEnv<'_>) -> Result<Option<Value>, QueryError> {
    Ok(match expr {
        Expr::Term(t) => resolve_term(t, frame).cloned(),
        Expr::Uuid => Some((env.mint)()),
        Expr::Coalesce(args) => {
            for arg in args {
                if let Some(v) = eval_expr(arg, frame, env)? {
                    return Ok(Some(v));
                }
            }
            None
        }
        Expr::Compare(op, a, b) => match (eval_expr(a, frame, env)?, eval_expr(b, frame, env)?) {
            (Some(a), Some(b)) => Some(Value::Bool(compare(*op, &a, &b)?)),
            _ => None,
        },
    })
}
