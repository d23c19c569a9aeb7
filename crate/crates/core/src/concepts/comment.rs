use super::*;

/// Comments on arbitrary targets.
#[derive(Debug, Default, Clone, Copy)]
pub struct Comment;

impl Concept for Comment {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, _ctx: &ActionContext) -> Result<Record, ConceptError> {
        let comment = require_ref(input, "comment")?;
        match action {
            "add" => {
                let target = input.get("target").cloned().ok_or_else(|| ConceptError::BadInput("missing `target`".into()))?;
                let author = require_ref(input, "author")?;
                let body = require_text(input, "body")?;
                if state.is_member("comments", comment) {
                    return Ok(error("comment already exists"));
                }
                if body.trim().is_empty() {
                    return Ok(error("comment body must not be blank"));
                }
                state.insert_member("comments", comment);
                state.set(comment, "target", target);
                state.set(comment, "author", author.clone());
                state.set(comment, "body", body);
                Ok(Record::new().with("comment", comment.clone()))
            }
            "delete" => {
                if !state.is_member("comments", comment) {
                    return Ok(error("comment not found"));
                }
                state.remove_subject(comment);
                Ok(Record::new().with("comment", comment.clone()))
            }
            other => Err(unknown("Comment", other)),
        }
    }
}
