use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use crate::model::{ActionRecord, EdgeTarget, Iri, Record, SyncEdge, Value};
use crate::store::{group_by_eachthen, EvalEnv, Frame, Term, EACHTHEN};
use crate::synclang::{Invocation, SyncDef, TemplateValue};

use super::{Engine, EngineError, LogEntry, Match, Result};

fn short_uuid(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_be_bytes());
        h.update(p);
    }
    let digest: [u8; 32] = h.finalize().into();
    let mut bytes = [0u8; 16];
    bytes.copy_from_slice(&digest[..16]);
    uuid::Builder::from_random_bytes(bytes).into_uuid().to_string()
}

struct Instantiation<'a> {
    sync: &'a SyncDef,
    /// Variables bound only inside OPTIONAL; a template field using one is
    /// omitted when it is unbound.
    optional: &'a BTreeSet<String>,
    frame: &'a Frame,
    invocation: &'a Invocation,
}

impl Instantiation<'_> {
    fn record(&self, fields: &[(String, TemplateValue)]) -> Result<Record> {
        let mut out = Record::new();
        for (name, template) in fields {
            match template {
                TemplateValue::Term(Term::Value(v)) => {
                    out.insert(name.clone(), v.clone());
                }
                TemplateValue::Term(Term::Var(var)) => match self.frame.get(var) {
                    Some(v) => {
                        out.insert(name.clone(), v.clone());
                    }
                    None if !self.optional.contains(var) => {
                        return Err(EngineError::Unbound {
                            sync: self.sync.name.clone(),
                            var: var.clone(),
                            invocation: format!("{}/{}", self.invocation.concept, self.invocation.action),
                        })
                    }
                    None => {}
                },
                TemplateValue::Record(nested) => {
                    out.insert(name.clone(), Value::Record(self.record(nested)?));
                }
            }
        }
        Ok(out)
    }
}

impl Engine {
    /// Fires a new match of the sync called `sync`: evaluates `where`,
    /// logs the emitted invocations with their edges and queues them for
    /// dispatch. Returns the invocation ids.
    pub fn fire(&mut self, sync: &str, m: &Match) -> Result<Vec<Iri>> {
        match self.syncs.iter().position(|s| s.name == sync) {
            Some(index) => self.fire_match(index, m),
            None => Ok(Vec::new()),
        }
    }

    pub(crate) fn fire_match(&mut self, index: usize, m: &Match) -> Result<Vec<Iri>> {
        let sync = self.syncs[index].clone();
        let digest = m.key.digest();
        let flow = self.records[&m.completions[0]].flow.clone();

        let mut frames = match &sync.where_ {
            None => vec![m.frame.clone()],
            Some(query) => {
                let entity = self.config.prefix.child("entity");
                let mut counter: u64 = 0;
                let mut mint = || {
                    counter += 1;
                    Value::Ref(entity.child(&short_uuid(&[b"uuid", &digest, &counter.to_be_bytes()])))
                };
                let mut env = EvalEnv { namespaces: &self.namespaces, mint: &mut mint };
                self.store
                    .evaluate(query, &m.frame, &mut env)
                    .map_err(|source| EngineError::Query { sync: sync.name.clone(), source })?
            }
        };
        if sync.where_.as_ref().is_some_and(|q| q.binds(EACHTHEN)) {
            frames = group_by_eachthen(&frames, EACHTHEN).map_err(|source| EngineError::Group { sync: sync.name.clone(), source })?;
        }

        let definite = sync.definite_vars();
        let optional: BTreeSet<String> = sync.bound_vars().difference(&definite).cloned().collect();
        let mut invocations = Vec::new();
        for (fi, frame) in frames.iter().enumerate() {
            for (ti, invocation) in sync.then.iter().enumerate() {
                let input = Instantiation { sync: &sync, optional: &optional, frame, invocation }.record(&invocation.args)?;
                let id = short_uuid(&[b"invocation", &digest, &(fi as u64).to_be_bytes(), &(ti as u64).to_be_bytes()]);
                invocations.push(ActionRecord {
                    id: self.config.prefix.child("action").child(&id),
                    concept: self.concept_iri(&invocation.concept),
                    name: invocation.action.clone(),
                    input,
                    output: None,
                    flow: flow.clone(),
                });
            }
        }

        let targets: Vec<EdgeTarget> = if invocations.is_empty() {
            vec![EdgeTarget::NoOp(m.key.hex())]
        } else {
            invocations.iter().map(|r| EdgeTarget::Action(r.id.clone())).collect()
        };
        let edges: Vec<SyncEdge> = m
            .key
            .completions
            .iter()
            .flat_map(|from| targets.iter().map(|to| SyncEdge { from: from.clone(), sync: sync.name.clone(), to: to.clone() }))
            .collect();

        let mut batch: Vec<LogEntry> = invocations.iter().cloned().map(LogEntry::Record).collect();
        batch.extend(edges.iter().cloned().map(LogEntry::Edge));
        self.append(batch)?;

        let ids: Vec<Iri> = invocations.iter().map(|r| r.id.clone()).collect();
        for rec in invocations {
            self.pending.push_back(rec.id.clone());
            self.admit(rec);
        }
        for e in edges {
            self.add_edge(e);
        }
        self.fired.insert(m.key.clone());
        ::log::debug!("fired {} -> {} invocation(s)", m.key, ids.len());
        Ok(ids)
    }
}
