//! Value model, naming and the action-record data model.

mod action;
mod encode;
pub mod json;
mod naming;
mod value;

pub use action::{ActionRecord, EdgeTarget, FlowToken, SyncEdge};
pub use encode::{quads_to_record, record_to_quads, ActionSchema};
pub use naming::{qualify, Iri, NamingError};
pub use value::{Record, Value};
