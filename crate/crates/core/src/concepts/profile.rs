use super::*;

/// Public bio and image for users.
#[derive(Debug, Default, Clone, Copy)]
pub struct Profile;

/// Accepts any non-empty image reference without whitespace.
pub(crate) fn valid_image(image: &str) -> bool {
    !image.is_empty() && !image.contains(char::is_whitespace)
}

pub(crate) fn update(input: &Record, state: &mut StateGraph<'_>, image_ok: fn(&str) -> bool) -> Result<Record, ConceptError> {
    let profile = require_ref(input, "profile")?;
    if !state.is_member("profiles", profile) {
        return Ok(error("profile not found"));
    }
    if let Some(bio) = input.text("bio") {
        state.set(profile, "bio", bio);
    } else {
        let image = require_text(input, "image")?;
        if !image_ok(image) {
            return Ok(error("image is invalid"));
        }
        state.set(profile, "image", image);
    }
    Ok(Record::new().with("profile", profile.clone()))
}

impl Concept for Profile {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, _ctx: &ActionContext) -> Result<Record, ConceptError> {
        match action {
            "register" => {
                let profile = require_ref(input, "profile")?;
                let user = require_ref(input, "user")?;
                state.insert_member("profiles", profile);
                state.set(user, "profile", profile.clone());
                state.set(profile, "bio", "");
                state.set(profile, "image", "");
                Ok(Record::new().with("profile", profile.clone()))
            }
            "update" => update(input, state, valid_image),
            other => Err(unknown("Profile", other)),
        }
    }
}
