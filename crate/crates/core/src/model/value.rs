use std::collections::BTreeMap;
use std::fmt;

use super::Iri;

/// A value carried by action arguments, state components and query frames.
///
/// The derived ordering compares the variant first (in declaration order)
/// and then the payload, which gives the store and the query evaluator a
/// total, deterministic order over mixed values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// The empty list.
    Nil,
    Bool(bool),
    Int(i64),
    Text(String),
    Ref(Iri),
    /// A non-empty list; use [`Value::list`] to construct.
    List(Vec<Value>),
    Record(Record),
}

impl Value {
    /// Builds a list value, normalising the empty list to [`Value::Nil`].
    pub fn list(items: Vec<Value>) -> Value {
        if items.is_empty() {
            Value::Nil
        } else {
            Value::List(items)
        }
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_ref_iri(&self) -> Option<&Iri> {
        match self {
            Value::Ref(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_record(&self) -> Option<&Record> {
        match self {
            Value::Record(r) => Some(r),
            _ => None,
        }
    }

    /// List elements; `Nil` is the empty list and any other value is a
    /// singleton.
    pub fn elements(&self) -> Vec<&Value> {
        match self {
            Value::Nil => Vec::new(),
            Value::List(items) => items.iter().collect(),
            other => vec![other],
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<Iri> for Value {
    fn from(iri: Iri) -> Self {
        Value::Ref(iri)
    }
}

impl From<Record> for Value {
    fn from(r: Record) -> Self {
        Value::Record(r)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nil => f.write_str("[]"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Text(s) => write!(f, "{s:?}"),
            Value::Ref(iri) => write!(f, "<{iri}>"),
            Value::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
            Value::Record(r) => write!(f, "{r}"),
        }
    }
}

/// Named fields. Names are significant; there is no positional meaning.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Record(BTreeMap<String, Value>);

impl Record {
    pub fn new() -> Self {
        Record(BTreeMap::new())
    }

    pub fn with(mut self, field: &str, value: impl Into<Value>) -> Self {
        self.0.insert(field.to_string(), value.into());
        self
    }

    pub fn insert(&mut self, field: impl Into<String>, value: impl Into<Value>) -> Option<Value> {
        self.0.insert(field.into(), value.into())
    }

    pub fn remove(&mut self, field: &str) -> Option<Value> {
        self.0.remove(field)
    }

    pub fn get(&self, field: &str) -> Option<&Value> {
        self.0.get(field)
    }

    pub fn contains(&self, field: &str) -> bool {
        self.0.contains_key(field)
    }

    pub fn text(&self, field: &str) -> Option<&str> {
        self.get(field).and_then(Value::as_text)
    }

    pub fn reference(&self, field: &str) -> Option<&Iri> {
        self.get(field).and_then(Value::as_ref_iri)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

impl FromIterator<(String, Value)> for Record {
    fn from_iter<T: IntoIterator<Item = (String, Value)>>(iter: T) -> Self {
        Record(iter.into_iter().collect())
    }
}

impl IntoIterator for Record {
    type Item = (String, Value);
    type IntoIter = std::collections::btree_map::IntoIter<String, Value>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { " ; " })?;
            write!(f, "{k}: {v}")?;
        }
        f.write_str(if self.0.is_empty() { "]" } else { " ]" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_is_nil() {
        assert_eq!(Value::list(vec![]), Value::Nil);
        assert_eq!(Value::list(vec![Value::Int(1)]), Value::List(vec![Value::Int(1)]));
        assert!(Value::Nil.elements().is_empty());
    }

    #[test]
    fn ordering_is_by_kind_then_payload() {
        let mut values = vec![Value::text("b"), Value::Int(3), Value::Nil, Value::text("a"), Value::Bool(true)];
        values.sort();
        assert_eq!(values, vec![Value::Nil, Value::Bool(true), Value::Int(3), Value::text("a"), Value::text("b")]);
    }

    #[test]
    fn record_display() {
        let r = Record::new().with("user", "x").with("valid", true);
        assert_eq!(r.to_string(), "[ user: \"x\" ; valid: true ]");
        assert_eq!(Record::new().to_string(), "[]");
    }
}
