use super::*;

/// Free-form tags on arbitrary targets.
#[derive(Debug, Default, Clone, Copy)]
pub struct Tag;

/// A tag argument may be a single string or a list of strings.
fn tags(input: &Record) -> Result<Vec<String>, ConceptError> {
    let value = input.get("tag").ok_or_else(|| ConceptError::BadInput("missing `tag`".into()))?;
    value
        .elements()
        .into_iter()
        .map(|v| v.as_text().map(str::to_string).ok_or_else(|| ConceptError::BadInput("tags must be strings".into())))
        .collect()
}

impl Concept for Tag {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, _ctx: &ActionContext) -> Result<Record, ConceptError> {
        let target = match input.reference("target") {
            Some(t) => t.clone(),
            None => return Ok(error("target must be a reference")),
        };
        let tags = tags(input)?;
        if tags.iter().any(|t| t.trim().is_empty()) {
            return Ok(error("tags must not be blank"));
        }
        match action {
            "add" => tags.into_iter().for_each(|t| state.add(&target, "tag", t)),
            "remove" => {
                for t in tags {
                    state.remove(&target, "tag", &Value::text(t));
                }
            }
            other => return Err(unknown("Tag", other)),
        }
        Ok(Record::new().with("target", target))
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn list_arguments_add_each_tag() {
        let mut h = Harness::new("Tag", Box::new(Tag));
        let list = Value::List(vec![Value::text("a"), Value::text("b")]);
        h.call("add", Record::new().with("target", entity("x")).with("tag", list)).unwrap();
        h.call("add", Record::new().with("target", entity("x")).with("tag", "a")).unwrap();
        let x = entity("x").as_ref_iri().unwrap().clone();
        assert_eq!(h.state().all(&x, "tag"), vec![Value::text("a"), Value::text("b")]);
        h.call("remove", Record::new().with("target", entity("x")).with("tag", "a")).unwrap();
        assert_eq!(h.state().all(&x, "tag"), vec![Value::text("b")]);
    }

    #[test]
    fn text_targets_are_rejected() {
        let mut h = Harness::new("Tag", Box::new(Tag));
        let out = h.call("add", Record::new().with("target", "some-slug").with("tag", "a")).unwrap();
        assert!(out.contains("error"));
    }
}
