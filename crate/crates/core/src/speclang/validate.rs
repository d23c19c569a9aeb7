use std::collections::{BTreeMap, BTreeSet};

use crate::model::{qualify, Iri};

use super::ast::*;
use super::parser::SpecError;

fn invalid(spec: &ConceptSpec, message: impl Into<String>) -> SpecError {
    SpecError::Validation { concept: spec.name.clone(), message: message.into() }
}

fn check_type(spec: &ConceptSpec, ty: &str, context: &str) -> Result<(), SpecError> {
    if BASE_TYPES.contains(&ty) || spec.is_type_param(ty) {
        Ok(())
    } else {
        Err(invalid(spec, format!("unknown type `{ty}` in {context}")))
    }
}

fn check_fields(spec: &ConceptSpec, fields: &Fields, context: &str) -> Result<(), SpecError> {
    let mut seen = BTreeSet::new();
    for field in &fields.fields {
        if !seen.insert(field.name.as_str()) {
            return Err(invalid(spec, format!("duplicate field `{}` in {context}", field.name)));
        }
        check_type(spec, &field.ty, context)?;
    }
    Ok(())
}

/// Structural checks run after parsing.
pub(crate) fn check_spec(spec: &ConceptSpec) -> Result<(), SpecError> {
    let mut params = BTreeSet::new();
    for p in &spec.type_params {
        if !params.insert(p.as_str()) {
            return Err(invalid(spec, format!("duplicate type parameter `{p}`")));
        }
        if BASE_TYPES.contains(&p.as_str()) {
            return Err(invalid(spec, format!("type parameter `{p}` shadows a base type")));
        }
    }
    let mut names = BTreeSet::new();
    for decl in &spec.state {
        if !names.insert(decl.name.as_str()) {
            return Err(invalid(spec, format!("duplicate state component `{}`", decl.name)));
        }
        check_type(spec, &decl.domain, &format!("state `{}`", decl.name))?;
        if let Some(range) = &decl.range {
            check_type(spec, range, &format!("state `{}`", decl.name))?;
        }
    }
    let mut shapes: BTreeSet<(&str, BTreeSet<&str>, bool, BTreeSet<&str>, bool)> = BTreeSet::new();
    for sig in &spec.actions {
        let context = format!("action `{}`", sig.name);
        check_fields(spec, &sig.input, &context)?;
        check_fields(spec, &sig.output, &context)?;
        let shape = (sig.name.as_str(), sig.input.names(), sig.input.open, sig.output.names(), sig.output.open);
        if !shapes.insert(shape) {
            return Err(invalid(spec, format!("duplicate overload of `{}` with identical field sets", sig.name)));
        }
    }
    Ok(())
}

/// Fully qualifies every concept, state, action and argument name of `spec`
/// under `prefix`, rejecting names that collide after qualification.
pub fn validate_against(spec: &ConceptSpec, prefix: &Iri) -> Result<Vec<Iri>, SpecError> {
    check_spec(spec)?;
    let name_err = |e: crate::model::NamingError| invalid(spec, e.to_string());
    let mut owners: BTreeMap<Iri, String> = BTreeMap::new();
    let mut claim = |iri: Iri, owner: String| -> Result<(), SpecError> {
        match owners.get(&iri) {
            Some(prev) if *prev != owner => {
                Err(invalid(spec, format!("name collision: {prev} and {owner} both qualify to {iri}")))
            }
            _ => {
                owners.insert(iri, owner);
                Ok(())
            }
        }
    };
    claim(qualify(prefix, &spec.name, None, None).map_err(name_err)?, "concept".into())?;
    for decl in &spec.state {
        claim(qualify(prefix, &spec.name, Some(&decl.name), None).map_err(name_err)?, format!("state `{}`", decl.name))?;
    }
    for sig in &spec.actions {
        claim(qualify(prefix, &spec.name, Some(&sig.name), None).map_err(name_err)?, format!("action `{}`", sig.name))?;
        for field in sig.input.fields.iter().chain(&sig.output.fields) {
            let iri = qualify(prefix, &spec.name, Some(&sig.name), Some(&field.name)).map_err(name_err)?;
            claim(iri, format!("argument `{}/{}`", sig.name, field.name))?;
        }
    }
    Ok(owners.into_keys().collect())
}
