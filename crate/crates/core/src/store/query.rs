use std::collections::BTreeSet;

use crate::model::Value;

use super::eval::QueryError;

/// A pattern position: a variable (stored without the leading `?`) or a
/// literal value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Value(Value),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.trim_start_matches('?').to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Value(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Term(Term),
    Uuid,
    Coalesce(Vec<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Term(Term::Var(v)) => {
                out.insert(v.clone());
            }
            Expr::Term(Term::Value(_)) | Expr::Uuid => {}
            Expr::Coalesce(args) => args.iter().for_each(|a| a.vars(out)),
            Expr::Compare(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// Whether the expression always yields a value given `definite` vars.
    fn is_definite(&self, definite: &BTreeSet<String>) -> bool {
        match self {
            Expr::Term(Term::Var(v)) => definite.contains(v),
            Expr::Term(Term::Value(_)) | Expr::Uuid => true,
            Expr::Coalesce(args) => args.iter().any(|a| a.is_definite(definite)),
            Expr::Compare(_, a, b) => a.is_definite(definite) && b.is_definite(definite),
        }
    }
}

/// One triple inside a concept-scoped block. The predicate is the concept's
/// local state-component name; it is qualified at evaluation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

/// `Concept: { ?s p: ?o ; q: ?r . ?t ... }`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphPattern {
    pub concept: String,
    pub triples: Vec<TriplePattern>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clause {
    Graph(GraphPattern),
    Optional(Vec<Clause>),
    Bind { expr: Expr, target: String },
    Filter(Expr),
    NotExists(Vec<Clause>),
}

/// An ordered list of clauses, evaluated left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryAst {
    pub clauses: Vec<Clause>,
}

fn term_var(t: &Term, out: &mut BTreeSet<String>) {
    if let Term::Var(v) = t {
        out.insert(v.clone());
    }
}

fn walk_bound(clauses: &[Clause], bound: &mut BTreeSet<String>, definite: Option<&mut BTreeSet<String>>) {
    let mut definite = definite;
    for clause in clauses {
        match clause {
            Clause::Graph(g) => {
                for t in &g.triples {
                    term_var(&t.subject, bound);
                    term_var(&t.object, bound);
                    if let Some(d) = definite.as_deref_mut() {
                        term_var(&t.subject, d);
                        term_var(&t.object, d);
                    }
                }
            }
            Clause::Optional(inner) => walk_bound(inner, bound, None),
            Clause::Bind { expr, target } => {
                bound.insert(target.clone());
                if let Some(d) = definite.as_deref_mut() {
                    if expr.is_definite(d) {
                        d.insert(target.clone());
                    }
                }
            }
            Clause::Filter(_) | Clause::NotExists(_) => {}
        }
    }
}

impl QueryAst {
    pub fn new(clauses: Vec<Clause>) -> Self {
        QueryAst { clauses }
    }

    /// Variables that may be bound by this query (including OPTIONAL blocks).
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut bound = BTreeSet::new();
        walk_bound(&self.clauses, &mut bound, None);
        bound
    }

    /// Variables bound in every result frame, given variables `seed` bound
    /// on entry.
    pub fn definite_vars(&self, seed: &BTreeSet<String>) -> BTreeSet<String> {
        let mut bound = BTreeSet::new();
        let mut definite = seed.clone();
        walk_bound(&self.clauses, &mut bound, Some(&mut definite));
        definite
    }

    /// Whether some BIND targets `var` (used to detect `?_eachthen`).
    pub fn binds(&self, var: &str) -> bool {
        fn any(clauses: &[Clause], var: &str) -> bool {
            clauses.iter().any(|c| match c {
                Clause::Bind { target, .. } => target == var,
                Clause::Optional(inner) => any(inner, var),
                _ => false,
            })
        }
        any(&self.clauses, var)
    }

    /// Concept names referenced by graph patterns, with their predicates.
    pub fn graph_patterns(&self) -> Vec<&GraphPattern> {
        fn collect<'a>(clauses: &'a [Clause], out: &mut Vec<&'a GraphPattern>) {
            for c in clauses {
                match c {
                    Clause::Graph(g) => out.push(g),
                    Clause::Optional(inner) | Clause::NotExists(inner) => collect(inner, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        collect(&self.clauses, &mut out);
        out
    }

    /// Static check: every variable read by a BIND expression or a FILTER is
    /// bound by `seed` or an earlier clause.
    pub fn validate(&self, seed: &BTreeSet<String>) -> Result<(), QueryError> {
        fn check(clauses: &[Clause], bound: &mut BTreeSet<String>) -> Result<(), QueryError> {
            for clause in clauses {
                match clause {
                    Clause::Graph(_) => walk_bound(std::slice::from_ref(clause), bound, None),
                    Clause::Optional(inner) => {
                        let mut scoped = bound.clone();
                        check(inner, &mut scoped)?;
                        bound.extend(scoped);
                    }
                    Clause::NotExists(inner) => check(inner, &mut bound.clone())?,
                    Clause::Bind { expr, target } => {
                        let mut used = BTreeSet::new();
                        expr.vars(&mut used);
                        if let Some(v) = used.iter().find(|v| !bound.contains(*v) && *v != target) {
                            return Err(QueryError::UnboundVariable(v.clone()));
                        }
                        bound.insert(target.clone());
                    }
                    Clause::Filter(expr) => {
                        let mut used = BTreeSet::new();
                        expr.vars(&mut used);
                        if let Some(v) = used.iter().find(|v| !bound.contains(*v)) {
                            return Err(QueryError::UnboundVariable(v.clone()));
                        }
                    }
                }
            }
            Ok(())
        }
        check(&self.clauses, &mut seed.clone())
    }
}
