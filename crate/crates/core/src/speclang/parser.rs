use thiserror::Error;

use crate::model::Value;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required section `{0}`")]
    MissingSection(&'static str),
    #[error("invalid concept {concept}: {message}")]
    Validation { concept: String, message: String },
    #[error("{concept} has no action `{action}`")]
    UndeclaredAction { concept: String, action: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> SpecError {
    SpecError::Parse { line, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Open,
    Close,
    Semi,
    Colon,
    Arrow,
    Ellipsis,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, SpecError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '[' => {
                toks.push(Tok::Open);
                i += 1;
            }
            ']' => {
                toks.push(Tok::Close);
                i += 1;
            }
            ';' => {
                toks.push(Tok::Semi);
                i += 1;
            }
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '=' if chars.get(i + 1) == Some(&'>') => {
                toks.push(Tok::Arrow);
                i += 2;
            }
            '.' if chars[i..].starts_with(&['.', '.', '.']) => {
                toks.push(Tok::Ellipsis);
                i += 3;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(parse_err(line, "unterminated string literal")),
                        Some('"') => break,
                        Some('\\') => {
                            s.push(*chars.get(i + 1).ok_or_else(|| parse_err(line, "dangling escape"))?);
                            i += 2;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                toks.push(Tok::Str(s));
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                let start = i;
                i += 1;
                while chars.get(i).is_some_and(char::is_ascii_digit) {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                toks.push(Tok::Int(text.parse().map_err(|_| parse_err(line, format!("bad number {text}")))?));
            }
            '?' | '_' | 'a'..='z' | 'A'..='Z' => {
                let start = if c == '?' { i + 1 } else { i };
                i = start;
                if !chars.get(i).copied().is_some_and(is_ident_start) {
                    return Err(parse_err(line, "expected identifier"));
                }
                while chars.get(i).copied().is_some_and(is_ident_char) {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(parse_err(line, format!("unexpected character {other:?}"))),
        }
    }
    Ok(toks)
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SpecError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(parse_err(self.line, format!("expected {what}, found {other:?}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SpecError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => Err(parse_err(self.line, format!("expected {what}, found {other:?}"))),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// `[ item ; item ; ... ]` with an optional trailing `;`.
    fn bracketed<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<Option<T>, SpecError>) -> Result<Vec<T>, SpecError> {
        self.expect(Tok::Open, "`[`")?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Close) => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(Tok::Semi) => self.pos += 1,
                Some(_) => {
                    if let Some(v) = item(self)? {
                        out.push(v);
                    }
                }
                None => return Err(parse_err(self.line, "unclosed `[`")),
            }
        }
    }
}

fn parse_fields(cur: &mut Cursor) -> Result<Fields, SpecError> {
    let mut open = false;
    let fields = cur.bracketed(|c| {
        if c.peek() == Some(&Tok::Ellipsis) {
            c.pos += 1;
            open = true;
            return Ok(None);
        }
        if open {
            return Err(parse_err(c.line, "`...` must be the last entry"));
        }
        let name = c.ident("field name")?;
        c.expect(Tok::Colon, "`:`")?;
        let ty = c.ident("field type")?;
        Ok(Some(Field { name, ty }))
    })?;
    Ok(Fields { fields, open })
}

fn parse_signature(text: &str, line: usize) -> Result<(String, Fields, Fields), SpecError> {
    let mut cur = Cursor { toks: tokenize(text, line)?, pos: 0, line };
    let name = cur.ident("action name")?;
    let input = parse_fields(&mut cur)?;
    cur.expect(Tok::Arrow, "`=>`")?;
    let output = parse_fields(&mut cur)?;
    if !cur.done() {
        return Err(parse_err(line, "unexpected text after action signature"));
    }
    Ok((name, input, output))
}

fn pattern_value(cur: &mut Cursor) -> Result<PatternValue, SpecError> {
    Ok(match cur.next() {
        Some(Tok::Str(s)) => PatternValue::Literal(Value::Text(s)),
        Some(Tok::Int(i)) => PatternValue::Literal(Value::Int(i)),
        Some(Tok::Ident(s)) if s == "true" => PatternValue::Literal(Value::Bool(true)),
        Some(Tok::Ident(s)) if s == "false" => PatternValue::Literal(Value::Bool(false)),
        Some(Tok::Ident(s)) => PatternValue::Placeholder(s),
        other => return Err(parse_err(cur.line, format!("expected a value, found {other:?}"))),
    })
}

fn pattern_fields(cur: &mut Cursor) -> Result<Vec<(String, PatternValue)>, SpecError> {
    cur.bracketed(|c| {
        let name = c.ident("field name")?;
        c.expect(Tok::Colon, "`:`")?;
        Ok(Some((name, pattern_value(c)?)))
    })
}

fn parse_step(text: &str, line: usize) -> Result<ActionStep, SpecError> {
    let mut cur = Cursor { toks: tokenize(text, line)?, pos: 0, line };
    let keyword = match cur.ident("step keyword")?.as_str() {
        "after" => StepKeyword::After,
        "then" => StepKeyword::Then,
        "and" => StepKeyword::And,
        other => return Err(parse_err(line, format!("unknown step keyword {other}"))),
    };
    let action = cur.ident("action name")?;
    let input = pattern_fields(&mut cur)?;
    let output = if cur.peek() == Some(&Tok::Arrow) {
        cur.pos += 1;
        Some(pattern_fields(&mut cur)?)
    } else {
        None
    };
    if !cur.done() {
        return Err(parse_err(line, "unexpected text after principle step"));
    }
    Ok(ActionStep { keyword, action, input, output })
}

/// `ident [` at the start of `text`, optionally after one of `keywords`.
fn starts_pattern(text: &str, keywords: &[&str]) -> bool {
    let mut rest = text;
    if !keywords.is_empty() {
        let Some(kw) = keywords.iter().find(|k| {
            rest.strip_prefix(**k).is_some_and(|r| r.starts_with(char::is_whitespace))
        }) else {
            return false;
        };
        rest = rest[kw.len()..].trim_start();
    }
    let ident_len = rest.chars().take_while(|c| is_ident_char(*c)).count();
    ident_len > 0 && rest.chars().next().is_some_and(is_ident_start) && rest[ident_len..].trim_start().starts_with('[')
}

fn bracket_depth(text: &str) -> i64 {
    let mut depth = 0;
    let mut in_str = false;
    for c in text.chars() {
        match c {
            '"' => in_str = !in_str,
            '[' if !in_str => depth += 1,
            ']' if !in_str => depth -= 1,
            _ => {}
        }
    }
    depth
}

/// Whether a pattern's text is complete: brackets balanced and, when
/// `needs_output`, an output list present.
fn pattern_complete(text: &str, needs_output: bool) -> bool {
    bracket_depth(text) == 0 && (!needs_output || (text.contains("=>") && text.trim_end().ends_with(']')))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Purpose,
    State,
    Actions,
    Principle,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

/// Consumes continuation lines of a multi-line pattern starting at `lines[*i]`.
fn gather(lines: &[Line<'_>], i: &mut usize, needs_output: bool) -> (String, usize) {
    let first = lines[*i].number;
    let mut text = lines[*i].text.trim().to_string();
    *i += 1;
    loop {
        let depth = bracket_depth(&text);
        let next = lines.get(*i).map(|l| l.text.trim());
        let continues = match next {
            Some(n) if n.is_empty() => false,
            Some(n) if depth > 0 => !n.is_empty(),
            Some(n) => n.starts_with("=>") && !(needs_output && pattern_complete(&text, true)),
            None => false,
        };
        if !continues {
            return (text, first);
        }
        text.push(' ');
        text.push_str(next.unwrap_or_default());
        *i += 1;
    }
}

/// Parses one `.concept` source.
pub fn parse_concept_spec(source: &str) -> Result<ConceptSpec, SpecError> {
    let lines: Vec<Line<'_>> = source.lines().enumerate().map(|(n, text)| Line { number: n + 1, text }).collect();
    let mut i = 0;
    while i < lines.len() && lines[i].text.trim().is_empty() {
        i += 1;
    }
    let header = lines.get(i).ok_or_else(|| parse_err(1, "empty concept source"))?;
    let (name, type_params) = parse_header(header.text, header.number)?;
    i += 1;

    let mut purpose: Option<Vec<String>> = None;
    let mut state: Option<Vec<StateDecl>> = None;
    let mut actions: Option<Vec<ActionSig>> = None;
    let mut principle: Vec<PrincipleStep> = Vec::new();
    let mut section: Option<Section> = None;

    while i < lines.len() {
        let line = &lines[i];
        let trimmed = line.text.trim();
        if trimmed.is_empty() {
            i += 1;
            continue;
        }
        if !line.text.starts_with(char::is_whitespace) {
            let (sec, rest) = section_header(trimmed).ok_or_else(|| parse_err(line.number, format!("unknown section `{trimmed}`")))?;
            let seen = match sec {
                Section::Purpose => purpose.is_some(),
                Section::State => state.is_some(),
                Section::Actions => actions.is_some(),
                Section::Principle => section == Some(Section::Principle) || !principle.is_empty(),
            };
            if seen {
                return Err(parse_err(line.number, format!("duplicate section `{trimmed}`")));
            }
            match sec {
                Section::Purpose => purpose = Some(rest.iter().map(|s| s.to_string()).collect()),
                Section::State => state = Some(Vec::new()),
                Section::Actions => actions = Some(Vec::new()),
                Section::Principle => {}
            }
            section = Some(sec);
            i += 1;
            continue;
        }
        match section {
            None => return Err(parse_err(line.number, "text before the first section")),
            Some(Section::Purpose) => {
                purpose.get_or_insert_with(Vec::new).push(trimmed.to_string());
                i += 1;
            }
            Some(Section::State) => {
                state.get_or_insert_with(Vec::new).push(parse_state(trimmed, line.number)?);
                i += 1;
            }
            Some(Section::Actions) => {
                let list = actions.get_or_insert_with(Vec::new);
                if starts_pattern(trimmed, &[]) {
                    let (text, number) = gather(&lines, &mut i, true);
                    let (name, input, output) = parse_signature(&text, number)?;
                    list.push(ActionSig { name, input, output, description: Vec::new() });
                } else {
                    let sig = list.last_mut().ok_or_else(|| parse_err(line.number, "description before any action signature"))?;
                    sig.description.push(trimmed.to_string());
                    i += 1;
                }
            }
            Some(Section::Principle) => {
                if starts_pattern(trimmed, &["after", "then", "and"]) {
                    let (text, number) = gather(&lines, &mut i, false);
                    principle.push(PrincipleStep::Action(parse_step(&text, number)?));
                } else {
                    match principle.last_mut() {
                        Some(PrincipleStep::Text(t)) => {
                            t.push('\n');
                            t.push_str(trimmed);
                        }
                        _ => principle.push(PrincipleStep::Text(trimmed.to_string())),
                    }
                    i += 1;
                }
            }
        }
    }

    let spec = ConceptSpec {
        name,
        type_params,
        purpose: purpose.ok_or(SpecError::MissingSection("purpose"))?.join("\n"),
        state: state.ok_or(SpecError::MissingSection("state"))?,
        actions: actions.ok_or(SpecError::MissingSection("actions"))?,
        principle,
    };
    super::validate::check_spec(&spec)?;
    Ok(spec)
}

fn section_header(text: &str) -> Option<(Section, Option<&str>)> {
    let (word, rest) = match text.split_once(char::is_whitespace) {
        Some((w, r)) => (w, Some(r.trim()).filter(|r| !r.is_empty())),
        None => (text, None),
    };
    match word {
        "purpose" => Some((Section::Purpose, rest)),
        "state" if rest.is_none() => Some((Section::State, None)),
        "actions" if rest.is_none() => Some((Section::Actions, None)),
        "operational" if rest == Some("principle") => Some((Section::Principle, None)),
        _ => None,
    }
}

fn parse_header(text: &str, line: usize) -> Result<(String, Vec<String>), SpecError> {
    let rest = text
        .strip_prefix("concept")
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| parse_err(line, "expected `concept <Name>` header"))?
        .trim();
    let (name, params) = match rest.split_once('[') {
        Some((name, params)) => {
            let params = params.trim().strip_suffix(']').ok_or_else(|| parse_err(line, "unclosed type parameter list"))?;
            let params: Vec<String> = params.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect();
            (name.trim(), params)
        }
        None => (rest, Vec::new()),
    };
    let valid = |s: &str| s.chars().next().is_some_and(is_ident_start) && s.chars().all(is_ident_char);
    if !valid(name) {
        return Err(parse_err(line, format!("invalid concept name {name:?}")));
    }
    if let Some(bad) = params.iter().find(|p| !valid(p)) {
        return Err(parse_err(line, format!("invalid type parameter {bad:?}")));
    }
    Ok((name.to_string(), params))
}

fn parse_state(text: &str, line: usize) -> Result<StateDecl, SpecError> {
    let (name, rhs) = text.split_once(':').ok_or_else(|| parse_err(line, "expected `name: ...` state declaration"))?;
    let name = name.trim();
    let rhs = rhs.trim();
    let word_ok = |s: &str| !s.is_empty() && s.chars().next().is_some_and(is_ident_start) && s.chars().all(is_ident_char);
    if !word_ok(name) {
        return Err(parse_err(line, format!("invalid state name {name:?}")));
    }
    if let Some(domain) = rhs.strip_prefix("set").filter(|r| r.starts_with(char::is_whitespace)) {
        let domain = domain.trim();
        if !word_ok(domain) {
            return Err(parse_err(line, format!("invalid set domain {domain:?}")));
        }
        return Ok(StateDecl { name: name.into(), kind: StateKind::Set, domain: domain.into(), range: None });
    }
    let (domain, range) = rhs.split_once("->").ok_or_else(|| parse_err(line, "expected `set T` or `A -> B`"))?;
    let (domain, range) = (domain.trim(), range.trim());
    if !word_ok(domain) || !word_ok(range) {
        return Err(parse_err(line, format!("invalid relation {rhs:?}")));
    }
    Ok(StateDecl { name: name.into(), kind: StateKind::Relation, domain: domain.into(), range: Some(range.into()) })
}
