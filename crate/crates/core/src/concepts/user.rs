use super::*;

/// Users identified by unique names and email addresses.
#[derive(Debug, Default, Clone, Copy)]
pub struct User;

fn valid_name(name: &str) -> bool {
    !name.trim().is_empty()
}

pub(crate) fn valid_email(email: &str) -> bool {
    match email.split_once('@') {
        Some((local, domain)) => !local.is_empty() && !domain.is_empty() && !domain.contains('@') && !email.contains(char::is_whitespace),
        None => false,
    }
}

fn taken_by_other(state: &StateGraph<'_>, rel: &str, value: &str, user: &Iri) -> bool {
    state.find(rel, &Value::text(value)).iter().any(|u| u != user)
}

impl Concept for User {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, _ctx: &ActionContext) -> Result<Record, ConceptError> {
        let user = require_ref(input, "user")?;
        match action {
            "register" => {
                let name = require_text(input, "name")?;
                let email = require_text(input, "email")?;
                if !valid_name(name) {
                    return Ok(error("username is invalid"));
                }
                if !valid_email(email) {
                    return Ok(error("email is invalid"));
                }
                if state.is_member("users", user) {
                    return Ok(error("user already exists"));
                }
                if taken_by_other(state, "name", name, user) {
                    return Ok(error("username has already been taken"));
                }
                if taken_by_other(state, "email", email, user) {
                    return Ok(error("email has already been taken"));
                }
                state.insert_member("users", user);
                state.set(user, "name", name);
                state.set(user, "email", email);
                Ok(Record::new().with("user", user.clone()))
            }
            "update" => {
                if !state.is_member("users", user) {
                    return Ok(error("user not found"));
                }
                if let Some(name) = input.text("name") {
                    if !valid_name(name) || taken_by_other(state, "name", name, user) {
                        return Ok(error("username is invalid or has already been taken"));
                    }
                    state.set(user, "name", name);
                } else {
                    let email = require_text(input, "email")?;
                    if !valid_email(email) || taken_by_other(state, "email", email, user) {
                        return Ok(error("email is invalid or has already been taken"));
                    }
                    state.set(user, "email", email);
                }
                Ok(Record::new().with("user", user.clone()))
            }
            other => Err(unknown("User", other)),
        }
    }
}
