use std::collections::BTreeMap;

use super::{ActionRecord, FlowToken, Iri, Record, Value};
use crate::store::Quad;

/// Predicates used to encode action records as quads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub actions: Iri,
    pub concept: Iri,
    pub name: Iri,
    pub flow: Iri,
    pub input: Iri,
    pub output: Iri,
}

impl ActionSchema {
    /// Schema predicates live under `{prefix}/schema#`.
    pub fn for_prefix(prefix: &Iri) -> Self {
        let base = format!("{}/schema#", prefix.as_str().trim_end_matches('/'));
        let p = |local: &str| Iri::new(format!("{base}{local}")).expect("prefix is an IRI");
        ActionSchema {
            actions: p("actions"),
            concept: p("concept"),
            name: p("name"),
            flow: p("flow"),
            input: p("input"),
            output: p("output"),
        }
    }
}

fn field_predicate(rec: &ActionRecord, field: &str) -> Iri {
    rec.concept.child(&rec.name).child(field)
}

fn encode_fields(subject: &Iri, fields: &Record, pred_of: &dyn Fn(&str) -> Iri, graph: &Iri, out: &mut Vec<Quad>) {
    for (field, value) in fields.iter() {
        let predicate = pred_of(field);
        match value {
            Value::Record(nested) => {
                // Nested records get a deterministic child subject.
                let child = subject.child(field);
                out.push(Quad::new(subject.clone(), predicate.clone(), Value::Ref(child.clone()), graph.clone()));
                let nested_pred = move |f: &str| predicate.child(f);
                encode_fields(&child, nested, &nested_pred, graph, out);
            }
            other => out.push(Quad::new(subject.clone(), predicate, other.clone(), graph.clone())),
        }
    }
}

/// Encodes an action record as quads in `graph`.
///
/// A flat input with `k` fields and no output yields `5 + k` quads: the
/// `actions` self-loop, `concept`, `name`, `flow`, the input root link and
/// one quad per field. Output quads are present only on completions.
pub fn record_to_quads(rec: &ActionRecord, schema: &ActionSchema, graph: &Iri) -> Vec<Quad> {
    let id = &rec.id;
    let g = graph;
    let mut out = vec![
        Quad::new(id.clone(), schema.actions.clone(), Value::Ref(id.clone()), g.clone()),
        Quad::new(id.clone(), schema.concept.clone(), Value::Ref(rec.concept.clone()), g.clone()),
        Quad::new(id.clone(), schema.name.clone(), Value::text(&rec.name), g.clone()),
        Quad::new(id.clone(), schema.flow.clone(), Value::text(rec.flow.as_str()), g.clone()),
    ];
    let pred_of = |f: &str| field_predicate(rec, f);
    let input_root = id.child("input");
    out.push(Quad::new(id.clone(), schema.input.clone(), Value::Ref(input_root.clone()), g.clone()));
    encode_fields(&input_root, &rec.input, &pred_of, g, &mut out);
    if let Some(output) = &rec.output {
        let output_root = id.child("output");
        out.push(Quad::new(id.clone(), schema.output.clone(), Value::Ref(output_root.clone()), g.clone()));
        encode_fields(&output_root, output, &pred_of, g, &mut out);
    }
    out
}

type Edges<'a> = BTreeMap<&'a Iri, Vec<(&'a Iri, &'a Value)>>;

fn decode_fields(subject: &Iri, edges: &Edges<'_>) -> Record {
    let mut record = Record::new();
    for (pred, obj) in edges.get(subject).map(Vec::as_slice).unwrap_or(&[]) {
        let field = pred.local_name();
        let expected_child = subject.child(field);
        let value = match obj {
            Value::Ref(target) if *target == expected_child => Value::Record(decode_fields(target, edges)),
            other => (*other).clone(),
        };
        record.insert(field, value);
    }
    record
}

/// Reassembles the action record `id` from quads produced by
/// [`record_to_quads`]. Returns `None` if the structural quads are missing.
pub fn quads_to_record<'a>(quads: impl IntoIterator<Item = &'a Quad>, id: &Iri, schema: &ActionSchema) -> Option<ActionRecord> {
    let mut edges: Edges<'_> = BTreeMap::new();
    for q in quads {
        edges.entry(&q.subject).or_default().push((&q.predicate, &q.object));
    }
    let own = edges.get(id)?;
    let find = |p: &Iri| own.iter().find(|(pred, _)| *pred == p).map(|(_, o)| *o);
    let concept = find(&schema.concept)?.as_ref_iri()?.clone();
    let name = find(&schema.name)?.as_text()?.to_string();
    let flow = FlowToken::new(find(&schema.flow)?.as_text()?);
    let input_root = find(&schema.input)?.as_ref_iri()?;
    let mut rest: Edges<'_> = edges.clone();
    rest.remove(id);
    let input = decode_fields(input_root, &rest);
    let output = find(&schema.output).and_then(Value::as_ref_iri).map(|root| decode_fields(root, &rest));
    Some(ActionRecord { id: id.clone(), concept, name, input, output, flow })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn schema() -> ActionSchema {
        ActionSchema::for_prefix(&iri("https://example.org/app"))
    }

    fn check_record(output: Option<Record>) -> ActionRecord {
        ActionRecord {
            id: iri("https://example.org/app/action/1"),
            concept: iri("https://example.org/app/Password"),
            name: "check".into(),
            input: Record::new().with("user", iri("https://example.org/id/u")).with("password", "secret"),
            output,
            flow: FlowToken::new("f1"),
        }
    }

    #[test]
    fn flat_invocation_has_five_plus_k_quads() {
        let graph = iri("https://example.org/app/App/v1/actions");
        let quads = record_to_quads(&check_record(None), &schema(), &graph);
        assert_eq!(quads.len(), 4 + 2 + 1);
        assert!(quads.iter().all(|q| q.predicate != schema().output));
        assert!(quads.iter().all(|q| q.graph == graph));
    }

    #[test]
    fn completion_has_one_output_subtree() {
        let graph = iri("https://example.org/app/App/v1/actions");
        let rec = check_record(Some(Record::new().with("valid", true)));
        let quads = record_to_quads(&rec, &schema(), &graph);
        assert_eq!(quads.iter().filter(|q| q.predicate == schema().output).count(), 1);
        assert_eq!(quads.len(), 4 + 1 + 2 + 1 + 1);
        let self_loop = &quads[0];
        assert_eq!(self_loop.object, Value::Ref(rec.id.clone()));
    }

    #[test]
    fn nested_records_use_derived_subjects() {
        let graph = iri("https://example.org/g");
        let body = Record::new().with("user", Record::new().with("username", "alice"));
        let rec = ActionRecord {
            id: iri("https://example.org/a/9"),
            concept: iri("https://example.org/Web"),
            name: "respond".into(),
            input: Record::new().with("body", body),
            output: Some(Record::new()),
            flow: FlowToken::new("f"),
        };
        let quads = record_to_quads(&rec, &schema(), &graph);
        assert!(quads.iter().any(|q| q.subject.as_str() == "https://example.org/a/9/input/body/user"));
        assert_eq!(quads_to_record(&quads, &rec.id, &schema()), Some(rec));
    }

    fn leaf() -> impl Strategy<Value = Value> {
        prop_oneof![
            Just(Value::Nil),
            any::<bool>().prop_map(Value::Bool),
            any::<i64>().prop_map(Value::Int),
            "[a-z ]{0,6}".prop_map(Value::Text),
            "[a-z]{1,5}".prop_map(|s| Value::Ref(iri(&format!("https://example.org/id/{s}")))),
        ]
    }

    fn value() -> impl Strategy<Value = Value> {
        leaf().prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                proptest::collection::vec(inner.clone(), 1..4).prop_map(Value::List),
                proptest::collection::btree_map("[a-z]{1,4}", inner, 0..4)
                    .prop_map(|m| Value::Record(m.into_iter().collect())),
            ]
        })
    }

    fn record() -> impl Strategy<Value = Record> {
        proptest::collection::btree_map("[a-z]{1,5}", value(), 0..5).prop_map(|m| m.into_iter().collect())
    }

    proptest! {
        #[test]
        fn quads_round_trip(input in record(), output in proptest::option::of(record()), n in 0u32..1000) {
            let rec = ActionRecord {
                id: iri(&format!("https://example.org/app/action/{n}")),
                concept: iri("https://example.org/app/Thing"),
                name: "act".into(),
                input,
                output,
                flow: FlowToken::new(format!("flow-{n}")),
            };
            let quads = record_to_quads(&rec, &schema(), &iri("https://example.org/g"));
            prop_assert_eq!(quads_to_record(&quads, &rec.id, &schema()), Some(rec));
        }
    }
}
