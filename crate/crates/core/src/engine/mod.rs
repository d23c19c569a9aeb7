//! The synchronization engine.
//!
//! Each step takes one completion off the queue, matches it against every
//! sync in registration order, fires the new matches and then dispatches the
//! emitted invocations in order. Everything is logged before it takes
//! effect, so the log alone is enough to rebuild the engine with
//! [`Engine::recover`].

mod fire;
pub mod log;
mod matching;
mod recover;
mod trace;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::concepts::{builtin, ActionContext, Concept, ConceptHandle};
use crate::model::{qualify, record_to_quads, ActionRecord, ActionSchema, FlowToken, Iri, NamingError, Record, SyncEdge, Value};
use crate::speclang::{validate_against, ConceptSpec, SpecError};
use crate::store::{GroupError, QueryError, Store};
use crate::synclang::{check_syncs, Diagnostic, SyncDef, SyncError};

pub use self::log::{read_log, read_log_file, ActionLog, FileLog, LogEntry, LogError, MemoryLog};
pub use matching::{FiringKey, Match};
pub use recover::RecoveryReport;
pub use trace::{FlowTrace, WebResponse};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("concept `{0}` is already registered")]
    DuplicateConcept(String),
    #[error("no built-in implementation for concept `{0}`")]
    NoImplementation(String),
    #[error("invalid concept spec: {0}")]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Naming(#[from] NamingError),
    #[error("sync source: {0}")]
    Sync(#[from] SyncError),
    #[error("{concept}/{action} is not a bootstrap action")]
    NotBootstrap { concept: String, action: String },
    #[error("ruleset has {} problem(s): {}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Lint(Vec<Diagnostic>),
    #[error("sync {sync}: variable ?{var} is unbound when instantiating {invocation}")]
    Unbound { sync: String, var: String, invocation: String },
    #[error("sync {sync}: {source}")]
    Query { sync: String, source: QueryError },
    #[error("sync {sync}: {source}")]
    Group { sync: String, source: GroupError },
    #[error("step limit of {0} exceeded")]
    StepLimit(usize),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("engine stopped after a log failure")]
    Stopped,
    #[error("log was written under version `{log}` but the engine runs `{engine}`")]
    VersionMismatch { log: String, engine: String },
    #[error("replaying {id} produced {replayed} instead of {logged}")]
    Divergence { id: Iri, logged: String, replayed: String },
    #[error("recovery needs a fresh engine")]
    NotFresh,
    #[error("log refers to unknown record {0}")]
    UnknownRecord(Iri),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub prefix: Iri,
    /// Names the version graph that holds all state of this run.
    pub version: String,
    pub step_limit: usize,
    /// Seeds the flow-token generator.
    pub seed: u64,
}

impl EngineConfig {
    pub const DEFAULT_STEP_LIMIT: usize = 10_000;

    pub fn new(prefix: Iri, version: impl Into<String>) -> Self {
        EngineConfig { prefix, version: version.into(), step_limit: Self::DEFAULT_STEP_LIMIT, seed: 0 }
    }
}

pub struct Engine {
    config: EngineConfig,
    schema: ActionSchema,
    action_graph: Iri,
    concepts: BTreeMap<String, ConceptHandle>,
    specs: BTreeMap<String, ConceptSpec>,
    namespaces: BTreeMap<String, (Iri, Iri)>,
    syncs: Vec<Arc<SyncDef>>,
    store: Store,
    records: BTreeMap<Iri, ActionRecord>,
    /// Record ids in order of first appearance in the log.
    order: Vec<Iri>,
    /// Completion ids per flow, in completion order.
    flows: BTreeMap<FlowToken, Vec<Iri>>,
    flow_order: Vec<FlowToken>,
    edges: Vec<SyncEdge>,
    edge_set: BTreeSet<SyncEdge>,
    fired: BTreeSet<FiringKey>,
    queue: VecDeque<Iri>,
    pending: VecDeque<Iri>,
    /// A recovered completion whose matching was cut short; it is finished
    /// before anything else.
    resume: Option<Iri>,
    log: Box<dyn ActionLog>,
    header_written: bool,
    stopped: bool,
    rng: ChaCha8Rng,
    faults: Vec<String>,
}

impl Engine {
    pub fn new(config: EngineConfig, log: Box<dyn ActionLog>) -> Self {
        let schema = ActionSchema::for_prefix(&config.prefix);
        let action_graph = config.prefix.child("graph").child(&config.version).child("actions");
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Engine {
            config,
            schema,
            action_graph,
            concepts: BTreeMap::new(),
            specs: BTreeMap::new(),
            namespaces: BTreeMap::new(),
            syncs: Vec::new(),
            store: Store::new(),
            records: BTreeMap::new(),
            order: Vec::new(),
            flows: BTreeMap::new(),
            flow_order: Vec::new(),
            edges: Vec::new(),
            edge_set: BTreeSet::new(),
            fired: BTreeSet::new(),
            queue: VecDeque::new(),
            pending: VecDeque::new(),
            resume: None,
            log,
            header_written: false,
            stopped: false,
            rng,
            faults: Vec::new(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn action_graph(&self) -> &Iri {
        &self.action_graph
    }

    /// The state graph of a concept: `{prefix}/graph/{version}/{name}`.
    pub fn state_graph(&self, name: &str) -> Iri {
        self.config.prefix.child("graph").child(&self.config.version).child(name)
    }

    /// Registers `imp` under `name` with the given spec. The name may differ
    /// from the spec's own name, which makes aliases such as `JWT` possible.
    pub fn register_concept(&mut self, name: &str, spec: ConceptSpec, imp: Box<dyn Concept>) -> Result<()> {
        if self.concepts.contains_key(name) {
            return Err(EngineError::DuplicateConcept(name.into()));
        }
        validate_against(&spec, &self.config.prefix)?;
        let namespace = qualify(&self.config.prefix, name, None, None)?;
        let graph = self.state_graph(name);
        self.namespaces.insert(name.into(), (graph.clone(), namespace.clone()));
        self.specs.insert(name.into(), spec.clone());
        self.concepts.insert(name.into(), ConceptHandle::new(name, spec, namespace, graph, imp));
        Ok(())
    }

    /// Registers the built-in implementation of `spec` under `name`.
    pub fn register_builtin(&mut self, name: &str, spec: ConceptSpec) -> Result<()> {
        let imp = builtin(&spec.name).ok_or_else(|| EngineError::NoImplementation(spec.name.clone()))?;
        self.register_concept(name, spec, imp)
    }

    /// Specs keyed by registered name.
    pub fn specs(&self) -> &BTreeMap<String, ConceptSpec> {
        &self.specs
    }

    pub fn concept(&self, name: &str) -> Option<&ConceptHandle> {
        self.concepts.get(name)
    }

    /// Adds syncs after checking the whole ruleset against the registered
    /// concepts.
    pub fn load_syncs(&mut self, defs: Vec<SyncDef>) -> Result<()> {
        let mut all: Vec<SyncDef> = self.syncs.iter().map(|s| (**s).clone()).collect();
        all.extend(defs.iter().cloned());
        let diagnostics = check_syncs(&all, &self.specs);
        if !diagnostics.is_empty() {
            return Err(EngineError::Lint(diagnostics));
        }
        self.load_syncs_unchecked(defs);
        Ok(())
    }

    pub fn load_syncs_unchecked(&mut self, defs: Vec<SyncDef>) {
        self.syncs.extend(defs.into_iter().map(Arc::new));
    }

    pub fn syncs(&self) -> impl Iterator<Item = &SyncDef> {
        self.syncs.iter().map(|s| &**s)
    }

    pub fn record(&self, id: &Iri) -> Option<&ActionRecord> {
        self.records.get(id)
    }

    /// Every record in log order. Completed invocations appear once, with
    /// their output.
    pub fn records(&self) -> impl Iterator<Item = &ActionRecord> {
        self.order.iter().map(|id| &self.records[id])
    }

    pub fn edges(&self) -> &[SyncEdge] {
        &self.edges
    }

    pub fn flows(&self) -> &[FlowToken] {
        &self.flow_order
    }

    pub fn fired(&self) -> &BTreeSet<FiringKey> {
        &self.fired
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty() && self.pending.is_empty()
    }

    /// Engine-level failures turned into `error` completions.
    pub fn faults(&self) -> &[String] {
        &self.faults
    }

    fn append(&mut self, mut batch: Vec<LogEntry>) -> Result<()> {
        if self.stopped {
            return Err(EngineError::Stopped);
        }
        if !self.header_written {
            batch.insert(0, LogEntry::Header { version: self.config.version.clone() });
        }
        if let Err(e) = self.log.append(&batch) {
            self.stopped = true;
            return Err(e.into());
        }
        self.header_written = true;
        Ok(())
    }

    fn next_flow(&mut self) -> FlowToken {
        let mut bytes = [0u8; 16];
        self.rng.fill_bytes(&mut bytes);
        FlowToken::new(uuid::Builder::from_random_bytes(bytes).into_uuid().to_string())
    }

    fn concept_iri(&self, name: &str) -> Iri {
        self.concepts.get(name).map(|h| h.namespace.clone()).unwrap_or_else(|| self.config.prefix.child(name))
    }

    /// Adds a record (invocation or bootstrap completion) seen for the
    /// first time.
    fn admit(&mut self, rec: ActionRecord) {
        self.store.insert(record_to_quads(&rec, &self.schema, &self.action_graph));
        if !self.flows.contains_key(&rec.flow) {
            self.flows.insert(rec.flow.clone(), Vec::new());
            self.flow_order.push(rec.flow.clone());
        }
        self.order.push(rec.id.clone());
        let completed = rec.is_completion().then(|| rec.id.clone());
        let flow = rec.flow.clone();
        self.records.insert(rec.id.clone(), rec);
        if let Some(id) = completed {
            self.flows.get_mut(&flow).expect("flow exists").push(id.clone());
            self.queue.push_back(id);
        }
    }

    /// Fills in the output of a known invocation.
    fn complete(&mut self, completed: ActionRecord) {
        self.store.insert(record_to_quads(&completed, &self.schema, &self.action_graph));
        let id = completed.id.clone();
        self.flows.entry(completed.flow.clone()).or_default().push(id.clone());
        self.records.insert(id.clone(), completed);
        self.queue.push_back(id);
    }

    fn add_edge(&mut self, edge: SyncEdge) {
        if self.edge_set.insert(edge.clone()) {
            self.edges.push(edge);
        }
    }

    /// Runs an invocation against its concept. Failures of the engine or of
    /// the concept's contract become `error` outputs.
    fn execute(&mut self, rec: &ActionRecord) -> Record {
        let name = rec.concept_name().to_string();
        let ctx = ActionContext { record_id: rec.id.clone(), flow: rec.flow.clone() };
        let result = match self.concepts.get_mut(&name) {
            Some(handle) => handle.invoke(&mut self.store, &rec.name, &rec.input, &ctx).map_err(|e| e.to_string()),
            None => Err(format!("no concept registered as `{name}`")),
        };
        match result {
            Ok(output) => output,
            Err(message) => {
                ::log::warn!("{name}/{} failed: {message}", rec.name);
                self.faults.push(format!("{}: {name}/{}: {message}", rec.id, rec.name));
                Record::new().with("error", message)
            }
        }
    }

    /// Records an external stimulus on a bootstrap concept and starts a new
    /// flow for it.
    pub fn submit_external(&mut self, concept: &str, action: &str, input: Record) -> Result<FlowToken> {
        let bootstrap = self.concepts.get(concept).is_some_and(|h| h.is_bootstrap(action));
        if !bootstrap {
            return Err(EngineError::NotBootstrap { concept: concept.into(), action: action.into() });
        }
        if self.stopped {
            return Err(EngineError::Stopped);
        }
        let flow = self.next_flow();
        let mut rec = ActionRecord {
            id: self.config.prefix.child("action").child(flow.as_str()),
            concept: self.concept_iri(concept),
            name: action.into(),
            input,
            output: None,
            flow: flow.clone(),
        };
        let output = self.execute(&rec);
        rec.output = Some(output);
        self.append(vec![LogEntry::Record(rec.clone())])?;
        self.admit(rec);
        Ok(flow)
    }

    fn dispatch(&mut self, id: &Iri) -> Result<()> {
        let mut rec = self.records.get(id).cloned().ok_or_else(|| EngineError::UnknownRecord(id.clone()))?;
        let output = self.execute(&rec);
        rec.output = Some(output);
        self.append(vec![LogEntry::Record(rec.clone())])?;
        self.complete(rec);
        Ok(())
    }

    fn process(&mut self, trigger: Iri) -> Result<()> {
        for index in 0..self.syncs.len() {
            for m in self.match_sync(index, &trigger) {
                self.fire_match(index, &m)?;
            }
        }
        self.append(vec![LogEntry::Done(trigger)])?;
        self.dispatch_pending()
    }

    fn dispatch_pending(&mut self) -> Result<()> {
        while let Some(id) = self.pending.front().cloned() {
            self.dispatch(&id)?;
            self.pending.pop_front();
        }
        Ok(())
    }

    /// Processes the oldest queued completion. Returns `false` when there
    /// was nothing to do.
    pub fn step(&mut self) -> Result<bool> {
        self.step_pick(0)
    }

    /// Processes the queued completion at `index` (modulo the queue length)
    /// instead of the oldest one.
    pub fn step_pick(&mut self, index: usize) -> Result<bool> {
        if self.stopped {
            return Err(EngineError::Stopped);
        }
        if let Some(trigger) = self.resume.take() {
            self.queue.retain(|q| *q != trigger);
            self.process(trigger)?;
            return Ok(true);
        }
        if !self.pending.is_empty() {
            self.dispatch_pending()?;
            return Ok(true);
        }
        if self.queue.is_empty() {
            return Ok(false);
        }
        let trigger = self.queue.remove(index % self.queue.len()).expect("index in range");
        self.process(trigger)?;
        Ok(true)
    }

    /// Steps until the queue is empty. Returns the number of steps taken.
    pub fn run_to_quiescence(&mut self) -> Result<usize> {
        let mut steps = 0;
        while self.step()? {
            steps += 1;
            if steps > self.config.step_limit {
                return Err(EngineError::StepLimit(self.config.step_limit));
            }
        }
        Ok(steps)
    }

    /// Submits one request and runs it to quiescence.
    pub fn request(&mut self, concept: &str, action: &str, input: Record) -> Result<FlowToken> {
        let flow = self.submit_external(concept, action, input)?;
        self.run_to_quiescence()?;
        Ok(flow)
    }

    /// Matches that exist in the current records but have not fired.
    pub fn unfired_matches(&self) -> Vec<FiringKey> {
        let mut out = BTreeSet::new();
        for id in &self.order {
            if !self.records[id].is_completion() {
                continue;
            }
            for index in 0..self.syncs.len() {
                out.extend(self.match_sync(index, id).into_iter().map(|m| m.key));
            }
        }
        out.into_iter().collect()
    }

    /// Re-queues every completion and runs to quiescence. Returns how many
    /// new records appeared, which is zero for a saturated engine.
    pub fn rescan(&mut self) -> Result<usize> {
        let before = self.records.len();
        let completions: Vec<Iri> = self.order.iter().filter(|id| self.records[*id].is_completion()).cloned().collect();
        self.queue.extend(completions);
        self.run_to_quiescence()?;
        Ok(self.records.len() - before)
    }

    /// The single value of `rel` for `subject` in a concept's state.
    pub fn state_value(&self, concept: &str, subject: &Iri, rel: &str) -> Option<&Value> {
        let (graph, ns) = self.namespaces.get(concept)?;
        self.store.objects(graph, subject, &ns.child(rel)).iter().next()
    }
}

#[cfg(test)]
mod tests;
