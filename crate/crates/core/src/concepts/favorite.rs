use super::*;

/// Per-user favorites with a per-target count.
#[derive(Debug, Default, Clone, Copy)]
pub struct Favorite;

impl Concept for Favorite {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, _ctx: &ActionContext) -> Result<Record, ConceptError> {
        let user = require_ref(input, "user")?;
        let target = input.get("target").cloned().ok_or_else(|| ConceptError::BadInput("missing `target`".into()))?;
        let target_iri = match target.as_ref_iri() {
            Some(t) => t.clone(),
            None => return Ok(error("target must be a reference")),
        };
        let count = state.get(&target_iri, "count").and_then(|v| v.as_int()).unwrap_or(0);
        match action {
            "add" => {
                if state.has(user, "favorites", &target) {
                    return Ok(error("already favorited"));
                }
                state.add(user, "favorites", target.clone());
                state.set(&target_iri, "count", count + 1);
            }
            "remove" => {
                if !state.remove(user, "favorites", &target) {
                    return Ok(error("not favorited"));
                }
                state.set(&target_iri, "count", count - 1);
            }
            other => return Err(unknown("Favorite", other)),
        }
        Ok(Record::new().with("target", target))
    }
}
