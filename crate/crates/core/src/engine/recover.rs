use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;

use crate::model::{EdgeTarget, Iri};

use super::{Engine, EngineError, FiringKey, LogEntry, Result};

/// What recovery found in the log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecoveryReport {
    pub records: usize,
    pub edges: usize,
    pub flows: usize,
    /// Completions whose step had not finished.
    pub requeued: usize,
    /// Logged invocations that had not been dispatched.
    pub undispatched: usize,
}

impl Engine {
    /// Rebuilds this engine from `entries`, which must already be durable in
    /// the engine's own log. Concepts and syncs must be registered first.
    ///
    /// Every logged completion is re-executed against its concept to rebuild
    /// the state graphs, and its output must equal the logged one. Firings
    /// evidenced by edges are never repeated; unfinished steps are queued
    /// again so that resuming continues exactly where the run stopped.
    pub fn recover(&mut self, entries: Vec<LogEntry>) -> Result<RecoveryReport> {
        if !self.records.is_empty() || self.header_written {
            return Err(EngineError::NotFresh);
        }
        let mut entries = entries.into_iter();
        match entries.next() {
            None => return Ok(RecoveryReport::default()),
            Some(LogEntry::Header { version }) if version == self.config.version => {}
            Some(LogEntry::Header { version }) => {
                return Err(EngineError::VersionMismatch { log: version, engine: self.config.version.clone() })
            }
            Some(_) => {
                return Err(super::LogError::Corrupt { line: 1, message: "log must start with a header".into() }.into())
            }
        }
        self.header_written = true;

        let mut firings: BTreeMap<(String, EdgeTarget), BTreeSet<Iri>> = BTreeMap::new();
        let mut bootstraps = 0usize;
        // Keys of the firings logged since the last step finished matching.
        let mut open: BTreeMap<EdgeTarget, BTreeSet<Iri>> = BTreeMap::new();
        for entry in entries {
            match entry {
                LogEntry::Header { .. } => {
                    return Err(super::LogError::Corrupt { line: self.order.len() + 1, message: "second header".into() }.into())
                }
                LogEntry::Record(rec) if rec.is_invocation() => {
                    self.pending.push_back(rec.id.clone());
                    self.admit(rec);
                }
                LogEntry::Record(rec) => {
                    let known = self.records.contains_key(&rec.id);
                    let mut invocation = rec.clone();
                    invocation.output = None;
                    let replayed = self.execute(&invocation);
                    let logged = rec.output.clone().expect("completion");
                    if replayed != logged {
                        return Err(EngineError::Divergence { id: rec.id, logged: logged.to_string(), replayed: replayed.to_string() });
                    }
                    if known {
                        self.pending.retain(|id| *id != rec.id);
                        self.complete(rec);
                    } else {
                        bootstraps += 1;
                        self.admit(rec);
                    }
                }
                LogEntry::Edge(edge) => {
                    open.entry(edge.to.clone()).or_default().insert(edge.from.clone());
                    firings.entry((edge.sync.clone(), edge.to.clone())).or_default().insert(edge.from.clone());
                    self.add_edge(edge);
                }
                LogEntry::Done(id) => {
                    open.clear();
                    self.queue.retain(|q| *q != id);
                }
            }
        }
        if !self.pending.is_empty() && !open.is_empty() {
            self.resume = self.queue.iter().find(|q| open.values().all(|key| key.contains(*q))).cloned();
        }
        for ((sync, _), froms) in firings {
            self.fired.insert(FiringKey::new(sync, froms.into_iter().collect()));
        }
        for _ in 0..bootstraps {
            let mut bytes = [0u8; 16];
            self.rng.fill_bytes(&mut bytes);
        }
        Ok(RecoveryReport {
            records: self.records.len(),
            edges: self.edges.len(),
            flows: self.flow_order.len(),
            requeued: self.queue.len(),
            undispatched: self.pending.len(),
        })
    }
}
