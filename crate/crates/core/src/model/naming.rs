use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NamingError {
    #[error("invalid IRI {0:?}: expected an absolute URI containing \"://\"")]
    InvalidIri(String),
    #[error("concept name must not be empty")]
    EmptyConcept,
    #[error("an argument name requires an action name")]
    ArgumentWithoutAction,
    #[error("invalid name segment {0:?}")]
    InvalidSegment(String),
}

/// An absolute identifier. Equality is exact byte equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(text: impl Into<String>) -> Result<Self, NamingError> {
        let text = text.into();
        match text.find("://") {
            Some(pos) if pos > 0 && text.len() > pos + 3 => Ok(Iri(text)),
            _ => Err(NamingError::InvalidIri(text)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Appends `/segment` to this IRI.
    pub fn child(&self, segment: &str) -> Iri {
        Iri(format!("{}/{}", self.0.trim_end_matches('/'), segment))
    }

    /// The text after the final `/` or `#`.
    pub fn local_name(&self) -> &str {
        let cut = self.0.rfind(['/', '#']).map(|i| i + 1).unwrap_or(0);
        &self.0[cut..]
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Iri::new(text).map_err(serde::de::Error::custom)
    }
}

fn check_segment(segment: &str) -> Result<&str, NamingError> {
    if segment.is_empty() || segment.contains(['/', '#']) || segment.chars().any(char::is_whitespace) {
        Err(NamingError::InvalidSegment(segment.to_string()))
    } else {
        Ok(segment)
    }
}

/// Fully qualifies a concept, action or argument name under `prefix`.
///
/// `qualify(p, "Password", Some("set"), Some("password"))` yields
/// `p/Password/set/password`, with exactly one `/` between segments.
pub fn qualify(prefix: &Iri, concept: &str, action: Option<&str>, arg: Option<&str>) -> Result<Iri, NamingError> {
    if concept.is_empty() {
        return Err(NamingError::EmptyConcept);
    }
    if arg.is_some() && action.is_none() {
        return Err(NamingError::ArgumentWithoutAction);
    }
    let mut text = prefix.as_str().trim_end_matches('/').to_string();
    for segment in std::iter::once(concept).chain(action).chain(arg) {
        text.push('/');
        text.push_str(check_segment(segment)?);
    }
    Ok(Iri(text))
}
