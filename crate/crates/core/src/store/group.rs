use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::Value;

use super::Frame;

/// The grouping variable name (without `?`).
pub const EACHTHEN: &str = "_eachthen";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("grouping variable ?{var} is unbound in frame {frame}")]
    Unbound { var: String, frame: String },
}

/// Groups frames by the value of `var`. Within a group, a variable with one
/// distinct value stays scalar; one with several becomes a sorted,
/// deduplicated list. Groups come out ordered by key.
pub fn group_by_eachthen(frames: &[Frame], var: &str) -> Result<Vec<Frame>, GroupError> {
    let mut groups: BTreeMap<&Value, BTreeMap<&str, BTreeSet<&Value>>> = BTreeMap::new();
    for frame in frames {
        let key = frame.get(var).ok_or_else(|| GroupError::Unbound { var: var.to_string(), frame: frame.to_string() })?;
        let group = groups.entry(key).or_default();
        for (name, value) in frame.iter() {
            group.entry(name.as_str()).or_default().insert(value);
        }
    }
    Ok(groups
        .into_values()
        .map(|vars| {
            vars.into_iter()
                .map(|(name, values)| {
                    let value = if values.len() == 1 {
                        values.into_iter().next().cloned().expect("one value")
                    } else {
                        Value::List(values.into_iter().cloned().collect())
                    };
                    (name.to_string(), value)
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(article: &str, tag: &str) -> Frame {
        Frame::new().with(EACHTHEN, article).with("article", article).with("tag", tag).with("title", "T")
    }

    /// Independent oracle: collect per key with plain loops.
    fn oracle(frames: &[Frame]) -> Vec<(Value, BTreeMap<String, Vec<Value>>)> {
        let mut keys: Vec<Value> = frames.iter().map(|f| f.get(EACHTHEN).unwrap().clone()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|key| {
                let mut vars: BTreeMap<String, Vec<Value>> = BTreeMap::new();
                for f in frames.iter().filter(|f| f.get(EACHTHEN) == Some(&key)) {
                    for (k, v) in f.iter() {
                        let slot = vars.entry(k.clone()).or_default();
                        if !slot.contains(v) {
                            slot.push(v.clone());
                        }
                    }
                }
                for values in vars.values_mut() {
                    values.sort();
                }
                (key, vars)
            })
            .collect()
    }

    #[test]
    fn collects_multi_valued_variables() {
        let out = group_by_eachthen(&[frame("a1", "a"), frame("a1", "b")], EACHTHEN).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].get("tag"), Some(&Value::List(vec![Value::text("a"), Value::text("b")])));
        assert_eq!(out[0].get("title"), Some(&Value::text("T")));
    }

    #[test]
    fn degenerate_group_stays_scalar() {
        let out = group_by_eachthen(&[frame("a1", "a"), frame("a1", "a")], EACHTHEN).unwrap();
        assert_eq!(out, vec![frame("a1", "a")]);
    }

    #[test]
    fn two_articles_two_tags_each() {
        let frames = [frame("a1", "x"), frame("a2", "y"), frame("a1", "y"), frame("a2", "z")];
        let out = group_by_eachthen(&frames, EACHTHEN).unwrap();
        let expected = oracle(&frames);
        assert_eq!(out.len(), 2);
        for (group, (key, vars)) in out.iter().zip(&expected) {
            assert_eq!(group.get(EACHTHEN), Some(key));
            assert_eq!(vars["tag"].len(), 2);
            assert_eq!(group.get("tag"), Some(&Value::List(vars["tag"].clone())));
        }
    }

    #[test]
    fn unbound_key_is_an_error() {
        let frames = [frame("a1", "x"), Frame::new().with("tag", "y")];
        assert!(matches!(group_by_eachthen(&frames, EACHTHEN), Err(GroupError::Unbound { .. })));
    }

    proptest! {
        #[test]
        fn grouping_preserves_key_value_pairs(pairs in proptest::collection::vec((0u8..4, 0u8..5), 1..20)) {
            let frames: Vec<Frame> = pairs
                .iter()
                .map(|(k, v)| Frame::new().with(EACHTHEN, i64::from(*k)).with("v", i64::from(*v)))
                .collect();
            let out = group_by_eachthen(&frames, EACHTHEN).unwrap();
            let before: BTreeSet<(Value, Value)> =
                frames.iter().map(|f| (f.get(EACHTHEN).unwrap().clone(), f.get("v").unwrap().clone())).collect();
            let after: BTreeSet<(Value, Value)> = out
                .iter()
                .flat_map(|f| {
                    let key = f.get(EACHTHEN).unwrap().clone();
                    f.get("v").unwrap().elements().into_iter().map(move |v| (key.clone(), v.clone())).collect::<Vec<_>>()
                })
                .collect();
            prop_assert_eq!(before, after);
        }
    }
}
