//! Turning external JSON requests into Web/request inputs.

use anyhow::{bail, Result};
use serde_json::{Map, Value as Json};
use synchro_core::model::json::value_from_plain_json;
use synchro_core::Record;

/// Builds the input of a `Web/request` for `method`. A body that is a
/// single-key object wrapping another object (`{"user": {...}}`) is
/// unwrapped first; `token` comes from an `Authorization: Token` header.
pub fn request_input(method: &str, body: &Json, token: Option<&str>) -> Result<Record> {
    let fields = match body {
        Json::Null => Map::new(),
        Json::Object(m) => match m.iter().next() {
            Some((_, Json::Object(inner))) if m.len() == 1 => inner.clone(),
            _ => m.clone(),
        },
        _ => bail!("request body must be a JSON object"),
    };
    let mut input = Record::new();
    for (k, v) in &fields {
        input.insert(k.clone(), value_from_plain_json(v)?);
    }
    input.insert("method", method);
    if let Some(token) = token {
        input.insert("token", token);
    }
    Ok(input)
}

/// The token of an `Authorization` header value, `Token <t>` or
/// `Bearer <t>`.
pub fn header_token(value: &str) -> Option<&str> {
    let (scheme, token) = value.trim().split_once(' ')?;
    matches!(scheme, "Token" | "Bearer").then(|| token.trim()).filter(|t| !t.is_empty())
}

/// Replaces every string of the form `${N.path.to.field}` with the value at
/// that path in the `N`th earlier response body.
pub fn substitute(json: &Json, responses: &[Json]) -> Result<Json> {
    Ok(match json {
        Json::String(s) => match s.strip_prefix("${").and_then(|r| r.strip_suffix('}')) {
            Some(reference) => lookup(reference, responses)?,
            None => json.clone(),
        },
        Json::Array(items) => Json::Array(items.iter().map(|i| substitute(i, responses)).collect::<Result<_>>()?),
        Json::Object(m) => Json::Object(m.iter().map(|(k, v)| Ok((k.clone(), substitute(v, responses)?))).collect::<Result<_>>()?),
        other => other.clone(),
    })
}

fn lookup(reference: &str, responses: &[Json]) -> Result<Json> {
    let mut parts = reference.split('.');
    let index: usize = match parts.next().map(str::parse) {
        Some(Ok(i)) => i,
        _ => bail!("bad reference ${{{reference}}}"),
    };
    let mut at = match responses.get(index) {
        Some(r) => r,
        None => bail!("reference ${{{reference}}} points past the {} earlier responses", responses.len()),
    };
    for part in parts {
        at = match at.get(part) {
            Some(v) => v,
            None => bail!("reference ${{{reference}}}: no field {part}"),
        };
    }
    Ok(at.clone())
}
