use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Iri, Record};

/// Identifies the flow of causally related records descending from one
/// external stimulus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowToken(String);

impl FlowToken {
    pub fn new(id: impl Into<String>) -> Self {
        FlowToken(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FlowToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One occurrence of a concept action.
///
/// An invocation has no output. Its completion is the same record (same id)
/// with the output filled in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionRecord {
    pub id: Iri,
    pub concept: Iri,
    pub name: String,
    pub input: Record,
    pub output: Option<Record>,
    pub flow: FlowToken,
}

impl ActionRecord {
    pub fn is_completion(&self) -> bool {
        self.output.is_some()
    }

    pub fn is_invocation(&self) -> bool {
        self.output.is_none()
    }

    /// The concept's local name, i.e. the last segment of its IRI.
    pub fn concept_name(&self) -> &str {
        self.concept.local_name()
    }
}

/// Where a synchronization edge points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeTarget {
    Action(Iri),
    /// A firing that emitted nothing. The payload identifies the firing so
    /// that distinct no-op firings stay distinguishable.
    NoOp(String),
}

impl EdgeTarget {
    const NOOP_PREFIX: &'static str = "noop:";

    pub fn as_action(&self) -> Option<&Iri> {
        match self {
            EdgeTarget::Action(iri) => Some(iri),
            EdgeTarget::NoOp(_) => None,
        }
    }

    pub fn is_noop(&self) -> bool {
        matches!(self, EdgeTarget::NoOp(_))
    }

    pub fn encode(&self) -> String {
        match self {
            EdgeTarget::Action(iri) => iri.to_string(),
            EdgeTarget::NoOp(tag) => format!("{}{tag}", Self::NOOP_PREFIX),
        }
    }

    pub fn decode(text: &str) -> Result<Self, super::NamingError> {
        match text.strip_prefix(Self::NOOP_PREFIX) {
            Some(tag) => Ok(EdgeTarget::NoOp(tag.to_string())),
            None => Iri::new(text).map(EdgeTarget::Action),
        }
    }
}

impl fmt::Display for EdgeTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

/// Provenance: completion `from` caused `to` through synchronization `sync`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SyncEdge {
    pub from: Iri,
    pub sync: String,
    pub to: EdgeTarget,
}
