use std::fmt::{self, Write};

use crate::model::Value;
use crate::store::{Clause, Expr, GraphPattern, Term};

use super::ast::*;

pub(crate) fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{v}"),
        Term::Value(v) => literal(v),
    }
}

fn literal(v: &Value) -> String {
    match v {
        Value::Text(s) => {
            let mut out = String::from("\"");
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
        Value::Nil => "rdf:nil".into(),
        other => other.to_string(),
    }
}

fn record<T>(fields: &[(String, T)], value: impl Fn(&T) -> String) -> String {
    if fields.is_empty() {
        return "[]".into();
    }
    let items: Vec<String> = fields.iter().map(|(k, v)| format!("{k}: {}", value(v))).collect();
    format!("[ {} ]", items.join(" ; "))
}

fn template(v: &TemplateValue) -> String {
    match v {
        TemplateValue::Term(t) => term(t),
        TemplateValue::Record(fields) => record(fields, template),
    }
}

fn expr(e: &Expr, nested: bool) -> String {
    match e {
        Expr::Term(t) => term(t),
        Expr::Uuid => "uuid()".into(),
        Expr::Coalesce(args) => {
            let args: Vec<String> = args.iter().map(|a| expr(a, true)).collect();
            format!("coalesce({})", args.join(", "))
        }
        Expr::Compare(op, a, b) => {
            let s = format!("{} {} {}", expr(a, true), op.symbol(), expr(b, true));
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

fn graph(g: &GraphPattern) -> String {
    let mut groups: Vec<(String, Vec<String>)> = Vec::new();
    for t in &g.triples {
        let subject = term(&t.subject);
        let po = format!("{}: {}", t.predicate, term(&t.object));
        match groups.last_mut() {
            Some((s, pos)) if *s == subject => pos.push(po),
            _ => groups.push((subject, vec![po])),
        }
    }
    let body: Vec<String> = groups.into_iter().map(|(s, pos)| format!("{s} {}", pos.join(" ; "))).collect();
    format!("{}: {{ {} }}", g.concept, body.join(" . "))
}

fn clauses(out: &mut String, cs: &[Clause], indent: usize) -> fmt::Result {
    let pad = " ".repeat(indent);
    for c in cs {
        match c {
            Clause::Graph(g) => writeln!(out, "{pad}{}", graph(g))?,
            Clause::Bind { expr: e, target } => writeln!(out, "{pad}bind ( {} as ?{target} )", expr(e, false))?,
            Clause::Filter(e) => writeln!(out, "{pad}FILTER ( {} )", expr(e, false))?,
            Clause::Optional(inner) => {
                writeln!(out, "{pad}OPTIONAL {{")?;
                clauses(out, inner, indent + 4)?;
                writeln!(out, "{pad}}}")?;
            }
            Clause::NotExists(inner) => {
                writeln!(out, "{pad}FILTER NOT EXISTS {{")?;
                clauses(out, inner, indent + 4)?;
                writeln!(out, "{pad}}}")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}: {} => {}", self.concept, self.action, record(&self.input, term), record(&self.output, term))
    }
}

impl fmt::Display for Invocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}: {}", self.concept, self.action, record(&self.args, template))
    }
}

impl fmt::Display for SyncDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = format!("sync {}\nwhen {{\n", self.name);
        for p in &self.when {
            writeln!(s, "    {p}")?;
        }
        s.push_str("}\n");
        if let Some(q) = &self.where_ {
            s.push_str("where {\n");
            clauses(&mut s, &q.clauses, 4)?;
            s.push_str("}\n");
        }
        s.push_str("then {\n");
        for i in &self.then {
            writeln!(s, "    {i}")?;
        }
        s.push_str("}\n");
        f.write_str(&s)
    }
}

/// Prints a ruleset so that it parses back to the same definitions.
pub fn print_syncs(defs: &[SyncDef]) -> String {
    defs.iter().map(SyncDef::to_string).collect::<Vec<_>>().join("\n")
}
