use std::collections::BTreeMap;
use std::fmt;

use crate::concepts::{ActionContext, Concept, ConceptHandle};
use crate::model::{qualify, FlowToken, Iri, Record, Value};
use crate::store::Store;

use super::ast::*;
use super::parser::SpecError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepStatus {
    Pass,
    Fail(String),
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub step: String,
    pub status: StepStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrincipleReport {
    pub concept: String,
    pub steps: Vec<StepOutcome>,
}

impl PrincipleReport {
    pub fn passed(&self) -> bool {
        !self.steps.iter().any(|s| matches!(s.status, StepStatus::Fail(_)))
    }

    pub fn count(&self, want: fn(&StepStatus) -> bool) -> usize {
        self.steps.iter().filter(|s| want(&s.status)).count()
    }

    pub fn first_failure(&self) -> Option<(usize, &str)> {
        self.steps.iter().enumerate().find_map(|(i, s)| match &s.status {
            StepStatus::Fail(why) => Some((i, why.as_str())),
            _ => None,
        })
    }
}

impl fmt::Display for PrincipleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            let step = s.step.lines().next().unwrap_or_default();
            match &s.status {
                StepStatus::Pass => writeln!(f, "{} step {}: pass  {step}", self.concept, i + 1)?,
                StepStatus::Skip => writeln!(f, "{} step {}: skip  {step}", self.concept, i + 1)?,
                StepStatus::Fail(why) => writeln!(f, "{} step {}: FAIL  {step}: {why}", self.concept, i + 1)?,
            }
        }
        Ok(())
    }
}

struct Scenario<'a> {
    spec: &'a ConceptSpec,
    prefix: &'a Iri,
    bindings: BTreeMap<String, Value>,
    last_of_type: BTreeMap<String, Value>,
    fresh: usize,
}

impl Scenario<'_> {
    fn fresh_ref(&mut self) -> Value {
        self.fresh += 1;
        Value::Ref(self.prefix.child("entity").child(&format!("principle-{}", self.fresh)))
    }

    fn synthesize(&mut self, field: &Field) -> Value {
        self.fresh += 1;
        match field.ty.as_str() {
            ty if self.spec.is_type_param(ty) => match self.last_of_type.get(ty) {
                Some(v) => v.clone(),
                None => self.fresh_ref(),
            },
            "boolean" | "flag" => Value::Bool(false),
            "number" => Value::Int(0),
            _ => Value::text(format!("{}-{}@example.test", field.name, self.fresh)),
        }
    }

    fn resolve_input(&mut self, sig: &ActionSig, field: &str, pv: &PatternValue) -> Value {
        match pv {
            PatternValue::Literal(v) => v.clone(),
            PatternValue::Placeholder(p) => {
                if let Some(v) = self.bindings.get(p) {
                    return v.clone();
                }
                let is_param = sig.input.get(field).is_some_and(|f| self.spec.is_type_param(&f.ty));
                let v = if is_param {
                    self.fresh_ref()
                } else {
                    self.fresh += 1;
                    Value::text(format!("{p}-{}", self.fresh))
                };
                self.bindings.insert(p.clone(), v.clone());
                v
            }
        }
    }

    fn remember_types(&mut self, fields: &Fields, record: &Record) {
        for f in &fields.fields {
            if self.spec.is_type_param(&f.ty) {
                if let Some(v) = record.get(&f.name) {
                    self.last_of_type.insert(f.ty.clone(), v.clone());
                }
            }
        }
    }
}

fn fits(sig: &ActionSig, step: &ActionStep) -> bool {
    let inputs_known = step.input.iter().all(|(k, _)| sig.input.open || sig.input.get(k).is_some());
    let outputs_fit = match &step.output {
        None => true,
        Some(out) => {
            let names: std::collections::BTreeSet<&str> = out.iter().map(|(k, _)| k.as_str()).collect();
            sig.output.admits(&names)
        }
    };
    inputs_known && outputs_fit
}

fn match_output(scenario: &mut Scenario<'_>, pattern: &[(String, PatternValue)], actual: &Record, open: bool) -> Result<(), String> {
    if !open && pattern.len() != actual.len() {
        return Err(format!("expected fields {:?}, got {actual}", pattern.iter().map(|(k, _)| k).collect::<Vec<_>>()));
    }
    for (field, pv) in pattern {
        let got = actual.get(field).ok_or_else(|| format!("missing output field `{field}` in {actual}"))?;
        match pv {
            PatternValue::Literal(want) if want != got => return Err(format!("expected {field}: {want}, got {got}")),
            PatternValue::Literal(_) => {}
            PatternValue::Placeholder(p) => match scenario.bindings.get(p) {
                Some(want) if want != got => return Err(format!("expected {field}: {p} ({want}), got {got}")),
                Some(_) => {}
                None => {
                    scenario.bindings.insert(p.clone(), got.clone());
                }
            },
        }
    }
    Ok(())
}

/// Runs the operational principle of `spec` against a fresh instance of
/// `imp`. Free-text steps are skipped.
pub fn check_principle(spec: &ConceptSpec, imp: Box<dyn Concept>, prefix: &Iri) -> Result<PrincipleReport, SpecError> {
    for step in &spec.principle {
        if let PrincipleStep::Action(a) = step {
            if !spec.has_action(&a.action) {
                return Err(SpecError::UndeclaredAction { concept: spec.name.clone(), action: a.action.clone() });
            }
        }
    }
    let namespace = qualify(prefix, &spec.name, None, None)
        .map_err(|e| SpecError::Validation { concept: spec.name.clone(), message: e.to_string() })?;
    let graph = prefix.child("graph").child("principle").child(&spec.name);
    let mut handle = ConceptHandle::new(spec.name.clone(), spec.clone(), namespace, graph, imp);
    let mut store = Store::new();
    let mut scenario = Scenario { spec, prefix, bindings: BTreeMap::new(), last_of_type: BTreeMap::new(), fresh: 0 };
    let mut steps = Vec::new();

    for (i, step) in spec.principle.iter().enumerate() {
        let action = match step {
            PrincipleStep::Text(t) => {
                steps.push(StepOutcome { step: t.clone(), status: StepStatus::Skip });
                continue;
            }
            PrincipleStep::Action(a) => a,
        };
        let status = run_step(&mut scenario, &mut handle, &mut store, action, i);
        steps.push(StepOutcome { step: action.to_string(), status });
    }
    Ok(PrincipleReport { concept: spec.name.clone(), steps })
}

fn run_step(scenario: &mut Scenario<'_>, handle: &mut ConceptHandle, store: &mut Store, step: &ActionStep, index: usize) -> StepStatus {
    let spec = scenario.spec;
    let Some(sig) = spec.overloads(&step.action).find(|sig| fits(sig, step)) else {
        return StepStatus::Fail(format!("no overload of `{}` fits the step", step.action));
    };
    let mut input = Record::new();
    for (field, pv) in &step.input {
        let v = scenario.resolve_input(sig, field, pv);
        input.insert(field.clone(), v);
    }
    for field in &sig.input.fields {
        if !input.contains(&field.name) {
            let v = scenario.synthesize(field);
            input.insert(field.name.clone(), v);
        }
    }
    scenario.remember_types(&sig.input, &input);
    let ctx = ActionContext {
        record_id: scenario.prefix.child("principle").child(&format!("{}-{index}", spec.name)),
        flow: FlowToken::new(format!("principle-{}", spec.name)),
    };
    let output = match handle.invoke(store, &step.action, &input, &ctx) {
        Ok(out) => out,
        Err(e) => return StepStatus::Fail(e.to_string()),
    };
    if let Some(pattern) = &step.output {
        if let Err(why) = match_output(scenario, pattern, &output, sig.output.open) {
            return StepStatus::Fail(why);
        }
    }
    scenario.remember_types(&sig.output, &output);
    StepStatus::Pass
}
