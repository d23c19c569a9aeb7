use std::collections::BTreeSet;

use crate::model::Value;

/// Base types usable in state declarations and action signatures, in
/// addition to the concept's own type parameters.
pub const BASE_TYPES: &[&str] = &["string", "boolean", "number", "flag", "date"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptSpec {
    pub name: String,
    pub type_params: Vec<String>,
    pub purpose: String,
    pub state: Vec<StateDecl>,
    pub actions: Vec<ActionSig>,
    pub principle: Vec<PrincipleStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// `users: set U`
    Set,
    /// `name: U -> string`
    Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub kind: StateKind,
    pub domain: String,
    /// Present for relations only.
    pub range: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub ty: String,
}

/// A bracketed field list. `open` lists end in `...` and accept extra
/// fields (used by the bootstrap concept, whose requests carry arbitrary
/// payloads).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fields {
    pub fields: Vec<Field>,
    pub open: bool,
}

impl Fields {
    pub fn names(&self) -> BTreeSet<&str> {
        self.fields.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Whether a record with exactly `present` fields fits this list.
    pub fn admits(&self, present: &BTreeSet<&str>) -> bool {
        let declared = self.names();
        if self.open {
            declared.is_subset(present)
        } else {
            declared == *present
        }
    }
}

/// One overload of an action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSig {
    pub name: String,
    pub input: Fields,
    pub output: Fields,
    pub description: Vec<String>,
}

impl ActionSig {
    /// The overload returning `error` is the designated failure case.
    pub fn is_error_case(&self) -> bool {
        self.output.get("error").is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKeyword {
    After,
    Then,
    And,
}

impl StepKeyword {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKeyword::After => "after",
            StepKeyword::Then => "then",
            StepKeyword::And => "and",
        }
    }
}

/// A value in an operational-principle pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternValue {
    Literal(Value),
    /// A scenario placeholder such as `x`, bound on first use.
    Placeholder(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionStep {
    pub keyword: StepKeyword,
    pub action: String,
    pub input: Vec<(String, PatternValue)>,
    pub output: Option<Vec<(String, PatternValue)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrincipleStep {
    Action(ActionStep),
    /// Informal text; not mechanically checkable.
    Text(String),
}

impl ConceptSpec {
    pub fn overloads<'a>(&'a self, action: &'a str) -> impl Iterator<Item = &'a ActionSig> + 'a {
        self.actions.iter().filter(move |a| a.name == action)
    }

    pub fn has_action(&self, action: &str) -> bool {
        self.overloads(action).next().is_some()
    }

    /// Distinct action names in declaration order.
    pub fn action_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for a in &self.actions {
            if !names.contains(&a.name.as_str()) {
                names.push(&a.name);
            }
        }
        names
    }

    pub fn state_decl(&self, name: &str) -> Option<&StateDecl> {
        self.state.iter().find(|s| s.name == name)
    }

    /// Whether `field` appears in the inputs (or outputs) of some overload,
    /// or some overload's list is open.
    pub fn knows_field(&self, action: &str, field: &str, output: bool) -> bool {
        self.overloads(action).any(|sig| {
            let fields = if output { &sig.output } else { &sig.input };
            fields.open || fields.get(field).is_some()
        })
    }

    pub fn accepts_input(&self, action: &str, present: &BTreeSet<&str>) -> bool {
        self.overloads(action).any(|sig| sig.input.admits(present))
    }

    pub fn admits_output(&self, action: &str, present: &BTreeSet<&str>) -> bool {
        self.overloads(action).any(|sig| sig.output.admits(present))
    }

    pub fn is_type_param(&self, ty: &str) -> bool {
        self.type_params.iter().any(|p| p == ty)
    }
}
