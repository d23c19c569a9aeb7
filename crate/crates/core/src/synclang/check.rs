use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::speclang::ConceptSpec;
use crate::store::EACHTHEN;

use super::ast::*;

/// A static problem found in a ruleset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub sync: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sync {}: {}", self.sync, self.message)
    }
}

struct Checker<'a> {
    specs: &'a BTreeMap<String, ConceptSpec>,
    sync: &'a str,
    out: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn report(&mut self, message: String) {
        self.out.push(Diagnostic { sync: self.sync.to_string(), message });
    }

    fn action(&mut self, concept: &str, action: &str) -> Option<&'a ConceptSpec> {
        let specs = self.specs;
        match specs.get(concept) {
            None => {
                self.report(format!("unknown concept `{concept}`"));
                None
            }
            Some(spec) if !spec.has_action(action) => {
                self.report(format!("concept `{concept}` has no action `{action}`"));
                None
            }
            Some(spec) => Some(spec),
        }
    }

    fn fields<'f>(&mut self, concept: &str, action: &str, fields: impl IntoIterator<Item = &'f str>, output: bool) {
        let Some(spec) = self.specs.get(concept) else { return };
        let unknown: Vec<&str> = fields.into_iter().filter(|f| !spec.knows_field(action, f, output)).collect();
        for f in unknown {
            let side = if output { "output" } else { "input" };
            self.report(format!("`{concept}/{action}` has no {side} field `{f}`"));
        }
    }
}

/// Checks `defs` against concept specs keyed by their registered names.
pub fn check_syncs(defs: &[SyncDef], specs: &BTreeMap<String, ConceptSpec>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for def in defs {
        let mut c = Checker { specs, sync: &def.name, out: Vec::new() };
        if !seen.insert(def.name.as_str()) {
            c.report("duplicate sync name".into());
        }
        if def.when.is_empty() {
            c.report("empty `when` block".into());
        }
        if def.then.is_empty() {
            c.report("empty `then` block".into());
        }
        for p in &def.when {
            if c.action(&p.concept, &p.action).is_some() {
                c.fields(&p.concept, &p.action, p.input.iter().map(|(k, _)| k.as_str()), false);
                c.fields(&p.concept, &p.action, p.output.iter().map(|(k, _)| k.as_str()), true);
            }
        }
        if let Some(q) = &def.where_ {
            for g in q.graph_patterns() {
                match specs.get(&g.concept) {
                    None => c.report(format!("unknown concept `{}` in where", g.concept)),
                    Some(spec) => {
                        for t in &g.triples {
                            if spec.state_decl(&t.predicate).is_none() {
                                c.report(format!("concept `{}` has no state component `{}`", g.concept, t.predicate));
                            }
                        }
                    }
                }
            }
            if let Err(e) = q.validate(&def.when_vars()) {
                c.report(format!("where: {e}"));
            }
        }
        let bound = def.bound_vars();
        let definite = def.definite_vars();
        for inv in &def.then {
            let Some(spec) = c.action(&inv.concept, &inv.action) else { continue };
            let names: BTreeSet<&str> = inv.args.iter().map(|(k, _)| k.as_str()).collect();
            let optional: BTreeSet<&str> = inv
                .args
                .iter()
                .filter(|(_, v)| matches!(v, TemplateValue::Term(crate::store::Term::Var(x)) if !definite.contains(x)))
                .map(|(k, _)| k.as_str())
                .collect();
            let required: BTreeSet<&str> = names.difference(&optional).copied().collect();
            let accepted = spec.accepts_input(&inv.action, &names) || (!optional.is_empty() && spec.accepts_input(&inv.action, &required));
            c.fields(&inv.concept, &inv.action, names.iter().copied(), false);
            if !accepted && names.iter().all(|f| spec.knows_field(&inv.action, f, false)) {
                c.report(format!("no overload of `{}/{}` accepts fields {:?}", inv.concept, inv.action, names));
            }
            for v in inv.vars() {
                if !bound.contains(&v) {
                    c.report(format!("variable ?{v} in `{}/{}` is never bound", inv.concept, inv.action));
                }
            }
        }
        if def.where_.as_ref().is_some_and(|q| q.binds(EACHTHEN)) && !def.definite_vars().contains(EACHTHEN) {
            c.report(format!("?{EACHTHEN} may be unbound"));
        }
        out.extend(c.out);
    }
    out
}
