//! The concept specification language: parser, printer, validation and
//! operational-principle checking.

mod ast;
mod parser;
mod principle;
mod print;
mod validate;

pub use ast::{
    ActionSig, ActionStep, ConceptSpec, Field, Fields, PatternValue, PrincipleStep, StateDecl, StateKind, StepKeyword,
    BASE_TYPES,
};
pub use parser::{parse_concept_spec, SpecError};
pub use principle::{check_principle, PrincipleReport, StepOutcome, StepStatus};
pub use validate::validate_against;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Value;

    const MINI: &str = "\
concept Counter [T]
purpose
    to count things
state
    items: set T
    total: T -> number
actions
    bump [ item: T ] => [ total: number ]
        increment the item's total
    bump [ item: T ] => [ error: string ]
        if the item is unknown
operational principle
    after bump [ item: x ] => [ total: 1 ]
    then bump [ item: x ]
        => [ total: 2 ]
    eventually the total
    reflects every bump
";

    #[test]
    fn parses_sections() {
        let spec = parse_concept_spec(MINI).unwrap();
        assert_eq!(spec.name, "Counter");
        assert_eq!(spec.type_params, ["T"]);
        assert_eq!(spec.purpose, "to count things");
        assert_eq!(spec.state.len(), 2);
        assert_eq!(spec.state[0].kind, StateKind::Set);
        assert_eq!(spec.state[1].range.as_deref(), Some("number"));
        assert_eq!(spec.actions.len(), 2);
        assert!(spec.actions[1].is_error_case());
        assert_eq!(spec.actions[0].description, ["increment the item's total"]);
        assert_eq!(spec.principle.len(), 3);
        match &spec.principle[1] {
            PrincipleStep::Action(a) => {
                assert_eq!(a.keyword, StepKeyword::Then);
                assert_eq!(a.output.as_ref().unwrap()[0], ("total".to_string(), PatternValue::Literal(Value::Int(2))));
            }
            other => panic!("expected an action step, got {other:?}"),
        }
        assert_eq!(spec.principle[2], PrincipleStep::Text("eventually the total\nreflects every bump".into()));
    }

    #[test]
    fn print_then_parse_is_identity() {
        let spec = parse_concept_spec(MINI).unwrap();
        let printed = spec.to_string();
        assert_eq!(parse_concept_spec(&printed).unwrap(), spec, "{printed}");
    }

    #[test]
    fn missing_section_is_named() {
        let src = MINI.replace("purpose\n    to count things\n", "");
        assert_eq!(parse_concept_spec(&src), Err(SpecError::MissingSection("purpose")));
        let src = MINI.replace("actions\n", "");
        assert!(parse_concept_spec(&src).is_err());
    }

    #[test]
    fn unknown_section_reports_its_line() {
        let src = MINI.replace("state\n", "status\n");
        match parse_concept_spec(&src) {
            Err(SpecError::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("status"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_state_is_a_validation_error() {
        let src = MINI.replace("    total: T -> number\n", "    total: T -> number\n    total: T -> string\n");
        assert!(matches!(parse_concept_spec(&src), Err(SpecError::Validation { .. })));
    }

    #[test]
    fn malformed_signature_reports_its_line() {
        let src = MINI.replace("bump [ item: T ] => [ total: number ]", "bump [ item: T => [ total: number ]");
        assert!(matches!(parse_concept_spec(&src), Err(SpecError::Parse { line: 8, .. })));
    }

    #[test]
    fn open_field_lists_round_trip() {
        let src = "concept Gate [R]\npurpose\nstate\nactions\n    pass [ method: string ; ... ] => [ request: R ]\n";
        let spec = parse_concept_spec(src).unwrap();
        assert!(spec.actions[0].input.open);
        assert_eq!(parse_concept_spec(&spec.to_string()).unwrap(), spec);
    }
}
