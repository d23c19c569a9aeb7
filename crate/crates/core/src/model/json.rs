//! JSON forms of values and action records.
//!
//! Two encodings exist. The *log* encoding is lossless: references become
//! `{"@id": "..."}` objects so they survive a round trip. The *plain*
//! encoding is what HTTP clients see: references become bare strings.
//! Both emit object keys in sorted order; the empty list is `[]`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value as Json};
use thiserror::Error;

use super::{ActionRecord, FlowToken, Iri, Record, Value};

const REF_KEY: &str = "@id";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("non-integer number {0} is not supported")]
    Float(String),
    #[error("invalid reference: {0}")]
    BadRef(String),
    #[error("expected a JSON object for a record, found {0}")]
    NotAnObject(String),
    #[error("malformed record line: {0}")]
    Malformed(String),
}

pub fn value_to_json(value: &Value) -> Json {
    match value {
        Value::Nil => Json::Array(Vec::new()),
        Value::Bool(b) => Json::Bool(*b),
        Value::Int(i) => Json::Number((*i).into()),
        Value::Text(s) => Json::String(s.clone()),
        Value::Ref(iri) => {
            let mut m = Map::new();
            m.insert(REF_KEY.into(), Json::String(iri.to_string()));
            Json::Object(m)
        }
        Value::List(items) => Json::Array(items.iter().map(value_to_json).collect()),
        Value::Record(r) => record_to_json(r),
    }
}

pub fn record_to_json(record: &Record) -> Json {
    Json::Object(record.iter().map(|(k, v)| (k.clone(), value_to_json(v))).collect())
}

fn number(n: &Number) -> Result<Value, JsonError> {
    n.as_i64().map(Value::Int).ok_or_else(|| JsonError::Float(n.to_string()))
}

pub fn value_from_json(json: &Json) -> Result<Value, JsonError> {
    Ok(match json {
        Json::Null => Value::Nil,
        Json::Bool(b) => Value::Bool(*b),
        Json::Number(n) => number(n)?,
        Json::String(s) => Value::Text(s.clone()),
        Json::Array(items) => Value::list(items.iter().map(value_from_json).collect::<Result<_, _>>()?),
        Json::Object(m) => match (m.len(), m.get(REF_KEY)) {
            (1, Some(Json::String(s))) => Value::Ref(Iri::new(s.clone()).map_err(|e| JsonError::BadRef(e.to_string()))?),
            _ => Value::Record(record_from_map(m)?),
        },
    })
}

fn record_from_map(m: &Map<String, Json>) -> Result<Record, JsonError> {
    m.iter().map(|(k, v)| Ok((k.clone(), value_from_json(v)?))).collect()
}

pub fn record_from_json(json: &Json) -> Result<Record, JsonError> {
    match json {
        Json::Object(m) => record_from_map(m),
        other => Err(JsonError::NotAnObject(other.to_string())),
    }
}

/// Plain JSON for external consumers: references are bare IRI strings.
pub fn value_to_plain_json(value: &Value) -> Json {
    match value {
        Value::Ref(iri) => Json::String(iri.to_string()),
        Value::List(items) => Json::Array(items.iter().map(value_to_plain_json).collect()),
        Value::Record(r) => record_to_plain_json(r),
        other => value_to_json(other),
    }
}

pub fn record_to_plain_json(record: &Record) -> Json {
    Json::Object(record.iter().map(|(k, v)| (k.clone(), value_to_plain_json(v))).collect())
}

/// Reads an external JSON payload; every string stays text.
pub fn value_from_plain_json(json: &Json) -> Result<Value, JsonError> {
    Ok(match json {
        Json::Array(items) => Value::list(items.iter().map(value_from_plain_json).collect::<Result<_, _>>()?),
        Json::Object(m) => Value::Record(m.iter().map(|(k, v)| Ok((k.clone(), value_from_plain_json(v)?))).collect::<Result<_, JsonError>>()?),
        Json::Null => Value::Nil,
        Json::Bool(b) => Value::Bool(*b),
        Json::Number(n) => number(n)?,
        Json::String(s) => Value::Text(s.clone()),
    })
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: Iri,
    concept: Iri,
    name: String,
    flow: FlowToken,
    input: Json,
    output: Option<Json>,
}

/// The canonical one-line JSON form of an action record, with fields in the
/// order `id, concept, name, flow, input, output`.
pub fn record_to_line(rec: &ActionRecord) -> String {
    let line = RecordLine {
        id: rec.id.clone(),
        concept: rec.concept.clone(),
        name: rec.name.clone(),
        flow: rec.flow.clone(),
        input: record_to_json(&rec.input),
        output: rec.output.as_ref().map(record_to_json),
    };
    serde_json::to_string(&line).expect("record lines always serialize")
}

pub fn record_from_json_value(json: Json) -> Result<ActionRecord, JsonError> {
    let line: RecordLine = serde_json::from_value(json).map_err(|e| JsonError::Malformed(e.to_string()))?;
    Ok(ActionRecord {
        id: line.id,
        concept: line.concept,
        name: line.name,
        flow: line.flow,
        input: record_from_json(&line.input)?,
        output: line.output.as_ref().map(record_from_json).transpose()?,
    })
}

pub fn record_from_line(line: &str) -> Result<ActionRecord, JsonError> {
    let json: Json = serde_json::from_str(line).map_err(|e| JsonError::Malformed(e.to_string()))?;
    record_from_json_value(json)
}
