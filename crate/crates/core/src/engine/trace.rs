use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{ActionRecord, EdgeTarget, FlowToken, Iri, Record, SyncEdge, Value};

use super::Engine;

/// The provenance DAG of one flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowTrace {
    pub flow: FlowToken,
    /// The bootstrap completion that started the flow.
    pub root: Option<Iri>,
    /// Records of the flow in log order.
    pub records: Vec<ActionRecord>,
    pub edges: Vec<SyncEdge>,
}

impl FlowTrace {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, id: &Iri) -> Option<&ActionRecord> {
        self.records.iter().find(|r| r.id == *id)
    }

    /// Distinct sync names that fired in this flow, in firing order.
    pub fn syncs(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.edges.iter().map(|e| e.sync.as_str()).filter(|s| seen.insert(*s)).collect()
    }

    /// Syncs that fired with no resulting invocation.
    pub fn noop_syncs(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.edges.iter().filter(|e| e.to.is_noop()).map(|e| e.sync.as_str()).filter(|s| seen.insert(*s)).collect()
    }

    /// Records whose concept is registered as `concept` and whose action is
    /// `action`.
    pub fn actions(&self, concept: &str, action: &str) -> Vec<&ActionRecord> {
        self.records.iter().filter(|r| r.concept_name() == concept && r.name == action).collect()
    }

    /// Edges pointing at `id`.
    pub fn causes(&self, id: &Iri) -> Vec<&SyncEdge> {
        self.edges.iter().filter(|e| e.to.as_action() == Some(id)).collect()
    }

    /// The sync names responsible for `id`.
    pub fn responsible(&self, id: &Iri) -> BTreeSet<&str> {
        self.causes(id).into_iter().map(|e| e.sync.as_str()).collect()
    }

    fn position(&self, id: &Iri) -> usize {
        self.records.iter().position(|r| r.id == *id).unwrap_or(usize::MAX)
    }

    /// The parent a node is drawn under: the cause that appears last in the
    /// log, i.e. the completion that made the match possible.
    fn parent(&self, id: &Iri) -> Option<&Iri> {
        self.causes(id).into_iter().map(|e| &e.from).max_by_key(|from| self.position(from))
    }

    fn noop_parent(&self, target: &EdgeTarget) -> Option<&Iri> {
        self.edges.iter().filter(|e| e.to == *target).map(|e| &e.from).max_by_key(|from| self.position(from))
    }

    fn render(&self, f: &mut fmt::Formatter<'_>, id: &Iri, depth: usize) -> fmt::Result {
        let Some(rec) = self.record(id) else { return Ok(()) };
        let indent = "  ".repeat(depth);
        let label = match self.responsible(id).into_iter().collect::<Vec<_>>().join(", ") {
            s if s.is_empty() => "root".to_string(),
            s => s,
        };
        let causes = self.causes(id).len();
        write!(f, "{indent}[{label}] {}/{} {}", rec.concept_name(), rec.name, rec.input)?;
        match &rec.output {
            Some(out) => write!(f, " => {out}")?,
            None => write!(f, " (not completed)")?,
        }
        if causes > 1 {
            write!(f, "  ({causes} causes)")?;
        }
        writeln!(f)?;
        let mut noops: Vec<&str> = self
            .edges
            .iter()
            .filter(|e| e.from == *id && e.to.is_noop() && self.noop_parent(&e.to) == Some(id))
            .map(|e| e.sync.as_str())
            .collect();
        noops.sort();
        noops.dedup();
        for sync in noops {
            writeln!(f, "{indent}  [{sync}] no-op")?;
        }
        for child in &self.records {
            if self.parent(&child.id) == Some(id) {
                self.render(f, &child.id, depth + 1)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for FlowTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "flow {}", self.flow)?;
        match &self.root {
            Some(root) => self.render(f, root, 0),
            None => writeln!(f, "(empty)"),
        }
    }
}

/// What a flow answered through the bootstrap concept's `respond` action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WebResponse {
    pub request: Option<Iri>,
    /// The `code` argument, or 200 when absent.
    pub code: i64,
    /// The `body` argument, or the remaining arguments (such as `error`)
    /// when there is no body.
    pub body: Record,
}

impl WebResponse {
    pub const RESPOND: &'static str = "respond";

    pub fn from_input(input: &Record) -> Self {
        let code = input.get("code").and_then(Value::as_int).unwrap_or(200);
        let body = match input.get("body").and_then(Value::as_record) {
            Some(body) => body.clone(),
            None => {
                let mut rest = input.clone();
                rest.remove("request");
                rest.remove("code");
                rest
            }
        };
        WebResponse { request: input.reference("request").cloned(), code, body }
    }

    pub fn error(&self) -> Option<&str> {
        self.body.text("error")
    }
}

#[derive(Default)]
struct Renamer {
    names: BTreeMap<String, String>,
}

impl Renamer {
    fn name(&mut self, raw: &str) -> String {
        let next = self.names.len();
        self.names.entry(raw.to_string()).or_insert_with(|| format!("#{next}")).clone()
    }

    fn value(&mut self, v: &Value, generated: &impl Fn(&Iri) -> bool) -> Value {
        match v {
            Value::Ref(iri) if generated(iri) => Value::text(self.name(iri.as_str())),
            Value::List(items) => Value::List(items.iter().map(|i| self.value(i, generated)).collect()),
            Value::Record(r) => Value::Record(self.record(r, generated)),
            other => other.clone(),
        }
    }

    fn record(&mut self, r: &Record, generated: &impl Fn(&Iri) -> bool) -> Record {
        r.iter().map(|(k, v)| (k.clone(), self.value(v, generated))).collect()
    }
}

impl Engine {
    /// All records of `flow` with the edges among them.
    pub fn trace_flow(&self, flow: &FlowToken) -> FlowTrace {
        let records: Vec<ActionRecord> = self.records().filter(|r| r.flow == *flow).cloned().collect();
        let ids: BTreeSet<&Iri> = records.iter().map(|r| &r.id).collect();
        let edges: Vec<SyncEdge> = self.edges.iter().filter(|e| ids.contains(&e.from)).cloned().collect();
        let targets: BTreeSet<&Iri> = edges.iter().filter_map(|e| e.to.as_action()).collect();
        let root = records.iter().find(|r| !targets.contains(&r.id)).map(|r| r.id.clone());
        FlowTrace { flow: flow.clone(), root, records, edges }
    }

    /// The first `respond` invocation of a bootstrap concept in `flow`.
    pub fn response(&self, flow: &FlowToken) -> Option<WebResponse> {
        self.records()
            .filter(|r| r.flow == *flow && r.name == WebResponse::RESPOND)
            .find(|r| self.concepts.get(r.concept_name()).is_some_and(|h| h.has_bootstrap()))
            .map(|r| WebResponse::from_input(&r.input))
    }

    /// Every `respond` invocation of `flow`.
    pub fn responses(&self, flow: &FlowToken) -> Vec<WebResponse> {
        self.records()
            .filter(|r| r.flow == *flow && r.name == WebResponse::RESPOND)
            .filter(|r| self.concepts.get(r.concept_name()).is_some_and(|h| h.has_bootstrap()))
            .map(|r| WebResponse::from_input(&r.input))
            .collect()
    }

    /// The action history with generated identifiers (record ids, minted
    /// entities and flow tokens) renamed in order of first appearance, as a
    /// sorted multiset of lines. Equal histories mean isomorphic runs.
    pub fn normalized_history(&self) -> Vec<String> {
        let action = self.config.prefix.child("action");
        let entity = self.config.prefix.child("entity");
        let generated = |iri: &Iri| {
            let s = iri.as_str();
            [&action, &entity].iter().any(|base| s.strip_prefix(base.as_str()).is_some_and(|rest| rest.starts_with('/')))
        };
        let mut r = Renamer::default();
        let mut lines = Vec::new();
        for rec in self.records() {
            let id = r.name(rec.id.as_str());
            let flow = r.name(rec.flow.as_str());
            let input = r.record(&rec.input, &generated);
            let output = rec.output.as_ref().map(|o| r.record(o, &generated).to_string()).unwrap_or_else(|| "-".into());
            lines.push(format!("{id} {flow} {}/{} {input} => {output}", rec.concept_name(), rec.name));
        }
        for e in &self.edges {
            let to = match e.to.as_action() {
                Some(t) => r.name(t.as_str()),
                None => "noop".into(),
            };
            lines.push(format!("edge {} -{}-> {to}", r.name(e.from.as_str()), e.sync));
        }
        lines.sort();
        lines
    }
}
