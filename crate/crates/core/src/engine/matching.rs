use std::collections::BTreeSet;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::model::{ActionRecord, Iri, Record};
use crate::store::{Frame, Term};
use crate::synclang::ActionPattern;

use super::Engine;

/// Identifies one firing: the sync plus the sorted ids of the completions
/// its `when` patterns matched.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiringKey {
    pub sync: String,
    pub completions: Vec<Iri>,
}

impl FiringKey {
    pub fn new(sync: impl Into<String>, mut completions: Vec<Iri>) -> Self {
        completions.sort();
        completions.dedup();
        FiringKey { sync: sync.into(), completions }
    }

    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.sync.as_bytes());
        for id in &self.completions {
            h.update([0]);
            h.update(id.as_str().as_bytes());
        }
        h.finalize().into()
    }

    pub fn hex(&self) -> String {
        hex::encode(&self.digest()[..16])
    }
}

impl fmt::Display for FiringKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.completions.iter().map(|i| i.local_name()).collect();
        write!(f, "{}({})", self.sync, ids.join(", "))
    }
}

/// A `when` match: the bindings and the completion matched by each pattern,
/// in pattern order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub key: FiringKey,
    pub frame: Frame,
    pub completions: Vec<Iri>,
}

fn bind_fields(pattern: &[(String, Term)], actual: &Record, frame: &mut Frame) -> bool {
    pattern.iter().all(|(field, term)| match (actual.get(field), term) {
        (None, _) => false,
        (Some(v), Term::Value(lit)) => v == lit,
        (Some(v), Term::Var(x)) => frame.bind(x, v.clone()),
    })
}

/// Matches a completion against a pattern by field subset, extending
/// `frame`.
pub(crate) fn match_pattern(pattern: &ActionPattern, rec: &ActionRecord, frame: &Frame) -> Option<Frame> {
    let output = rec.output.as_ref()?;
    if rec.name != pattern.action || rec.concept_name() != pattern.concept {
        return None;
    }
    let mut f = frame.clone();
    (bind_fields(&pattern.input, &rec.input, &mut f) && bind_fields(&pattern.output, output, &mut f)).then_some(f)
}

struct Search<'a> {
    engine: &'a Engine,
    when: &'a [ActionPattern],
    candidates: &'a [Iri],
    sync: &'a str,
    seen: BTreeSet<FiringKey>,
    out: Vec<Match>,
}

impl Search<'_> {
    fn extend(&mut self, pattern: usize, chosen: &mut Vec<Option<Iri>>, frame: Frame) {
        if pattern == self.when.len() {
            let completions: Vec<Iri> = chosen.iter().map(|c| c.clone().expect("all patterns chosen")).collect();
            let key = FiringKey::new(self.sync, completions.clone());
            if !self.engine.fired.contains(&key) && self.seen.insert(key.clone()) {
                self.out.push(Match { key, frame, completions });
            }
            return;
        }
        if chosen[pattern].is_some() {
            return self.extend(pattern + 1, chosen, frame);
        }
        for id in self.candidates {
            if chosen.iter().flatten().any(|c| c == id) {
                continue;
            }
            let rec = &self.engine.records[id];
            if let Some(f) = match_pattern(&self.when[pattern], rec, &frame) {
                chosen[pattern] = Some(id.clone());
                self.extend(pattern + 1, chosen, f);
                chosen[pattern] = None;
            }
        }
    }
}

impl Engine {
    /// New matches of sync `index` in which `trigger` takes part. Other
    /// patterns are matched by distinct completions of the same flow.
    pub(crate) fn match_sync(&self, index: usize, trigger: &Iri) -> Vec<Match> {
        let Some(rec) = self.records.get(trigger).filter(|r| r.is_completion()) else { return Vec::new() };
        let sync = &self.syncs[index];
        let candidates = self.flows.get(&rec.flow).map(Vec::as_slice).unwrap_or_default();
        let mut search =
            Search { engine: self, when: &sync.when, candidates, sync: &sync.name, seen: BTreeSet::new(), out: Vec::new() };
        for (i, pattern) in sync.when.iter().enumerate() {
            if let Some(frame) = match_pattern(pattern, rec, &Frame::new()) {
                let mut chosen = vec![None; sync.when.len()];
                chosen[i] = Some(trigger.clone());
                search.extend(0, &mut chosen, frame);
            }
        }
        search.out
    }

    /// New matches of the sync called `sync` triggered by `trigger`.
    pub fn match_when(&self, sync: &str, trigger: &Iri) -> Vec<Match> {
        match self.syncs.iter().position(|s| s.name == sync) {
            Some(index) => self.match_sync(index, trigger),
            None => Vec::new(),
        }
    }
}
