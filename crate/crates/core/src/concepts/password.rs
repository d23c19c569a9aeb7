use sha2::{Digest, Sha256};

use super::*;

/// Minimum accepted password length.
pub const MIN_PASSWORD_LEN: usize = 6;

/// Salted password storage.
#[derive(Debug, Default, Clone, Copy)]
pub struct Password;

pub(crate) fn meets_requirements(password: &str) -> bool {
    password.chars().count() >= MIN_PASSWORD_LEN
}

fn digest(salt: &str, password: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt.as_bytes());
    h.update([0u8]);
    h.update(password.as_bytes());
    hex::encode(h.finalize())
}

fn salt_for(record_id: &Iri) -> String {
    hex::encode(&Sha256::digest(record_id.as_str().as_bytes())[..16])
}

impl Password {
    pub(crate) fn check(state: &StateGraph<'_>, user: &Iri, password: &str) -> Record {
        match (state.get_text(user, "salt"), state.get_text(user, "password")) {
            (Some(salt), Some(hash)) => Record::new().with("valid", digest(&salt, password) == hash),
            _ => error("no password set for user"),
        }
    }
}

impl Concept for Password {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, ctx: &ActionContext) -> Result<Record, ConceptError> {
        match action {
            "set" => {
                let user = require_ref(input, "user")?;
                let password = require_text(input, "password")?;
                if !meets_requirements(password) {
                    return Ok(error(format!("password must be at least {MIN_PASSWORD_LEN} characters")));
                }
                let salt = salt_for(&ctx.record_id);
                state.set(user, "password", digest(&salt, password));
                state.set(user, "salt", salt);
                Ok(Record::new().with("user", user.clone()))
            }
            "check" => Ok(Password::check(state, require_ref(input, "user")?, require_text(input, "password")?)),
            "validate" => Ok(Record::new().with("valid", meets_requirements(require_text(input, "password")?))),
            other => Err(unknown("Password", other)),
        }
    }
}
