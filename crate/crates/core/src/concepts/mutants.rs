//! Broken variants of built-in concepts, used to show that operational
//! principles catch real defects.

use super::*;

/// `check` accepts every password.
#[derive(Debug, Default, Clone, Copy)]
pub struct AlwaysValidPassword;

impl Concept for AlwaysValidPassword {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, ctx: &ActionContext) -> Result<Record, ConceptError> {
        match action {
            "check" => Ok(Record::new().with("valid", true)),
            _ => Password.invoke(action, input, state, ctx),
        }
    }
}

/// `register` reports success without recording the user.
#[derive(Debug, Default, Clone, Copy)]
pub struct ForgetfulUser;

impl Concept for ForgetfulUser {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, ctx: &ActionContext) -> Result<Record, ConceptError> {
        match action {
            "register" => Ok(Record::new().with("user", require_ref(input, "user")?.clone())),
            _ => User.invoke(action, input, state, ctx),
        }
    }
}

/// Only accepts images given as `http(s)` or `data:` URLs.
#[derive(Debug, Default, Clone, Copy)]
pub struct UrlOnlyProfile;

fn url_image(image: &str) -> bool {
    ["http://", "https://", "data:"].iter().any(|p| image.starts_with(p))
}

impl Concept for UrlOnlyProfile {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, ctx: &ActionContext) -> Result<Record, ConceptError> {
        match action {
            "update" => super::profile::update(input, state, url_image),
            _ => Profile.invoke(action, input, state, ctx),
        }
    }
}
