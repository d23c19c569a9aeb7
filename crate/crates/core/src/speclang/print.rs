use std::fmt::{self, Write};

use crate::model::Value;

use super::ast::*;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

impl fmt::Display for Fields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self.fields.iter().map(|fd| format!("{}: {}", fd.name, fd.ty)).collect();
        if self.open {
            items.push("...".into());
        }
        if items.is_empty() {
            f.write_str("[]")
        } else {
            write!(f, "[ {} ]", items.join(" ; "))
        }
    }
}

impl fmt::Display for PatternValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternValue::Placeholder(p) => f.write_str(p),
            PatternValue::Literal(Value::Text(s)) => f.write_str(&quote(s)),
            PatternValue::Literal(v) => write!(f, "{v}"),
        }
    }
}

fn pattern(fields: &[(String, PatternValue)]) -> String {
    if fields.is_empty() {
        return "[]".into();
    }
    let items: Vec<String> = fields.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    format!("[ {} ]", items.join(" ; "))
}

impl fmt::Display for ActionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.keyword.as_str(), self.action, pattern(&self.input))?;
        if let Some(out) = &self.output {
            write!(f, " => {}", pattern(out))?;
        }
        Ok(())
    }
}

impl fmt::Display for ConceptSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write!(s, "concept {}", self.name)?;
        if !self.type_params.is_empty() {
            write!(s, " [{}]", self.type_params.join(", "))?;
        }
        s.push_str("\npurpose\n");
        for line in self.purpose.lines() {
            writeln!(s, "    {line}")?;
        }
        s.push_str("state\n");
        for decl in &self.state {
            match (&decl.kind, &decl.range) {
                (StateKind::Set, _) => writeln!(s, "    {}: set {}", decl.name, decl.domain)?,
                (StateKind::Relation, Some(range)) => writeln!(s, "    {}: {} -> {}", decl.name, decl.domain, range)?,
                (StateKind::Relation, None) => return Err(fmt::Error),
            }
        }
        s.push_str("actions\n");
        for sig in &self.actions {
            writeln!(s, "    {} {} => {}", sig.name, sig.input, sig.output)?;
            for line in &sig.description {
                writeln!(s, "        {line}")?;
            }
        }
        if !self.principle.is_empty() {
            s.push_str("operational principle\n");
            for step in &self.principle {
                match step {
                    PrincipleStep::Action(a) => writeln!(s, "    {a}")?,
                    PrincipleStep::Text(t) => {
                        for line in t.lines() {
                            writeln!(s, "    {line}")?;
                        }
                    }
                }
            }
        }
        f.write_str(&s)
    }
}
