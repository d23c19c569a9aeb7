use sha2::{Digest, Sha256};

use super::*;

/// Opaque session tokens.
#[derive(Debug, Default, Clone, Copy)]
pub struct Token;

impl Concept for Token {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, ctx: &ActionContext) -> Result<Record, ConceptError> {
        match action {
            "generate" => {
                let user = require_ref(input, "user")?;
                let token = format!("tok-{}", hex::encode(&Sha256::digest(ctx.record_id.as_str().as_bytes())[..16]));
                state.set(user, "token", token.as_str());
                Ok(Record::new().with("token", token))
            }
            "verify" => {
                let token = require_text(input, "token")?;
                match state.find("token", &Value::text(token)).into_iter().next() {
                    Some(user) => Ok(Record::new().with("user", user)),
                    None => Ok(error("invalid token")),
                }
            }
            other => Err(unknown("Token", other)),
        }
    }
}
