//! The offline subcommands. Each returns a printable report whose `ok`
//! decides the exit code.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value as Json;
use synchro_core::concepts::builtin;
use synchro_core::engine::{read_log_file, FileLog, LogEntry, LogError, MemoryLog, WebResponse};
use synchro_core::model::json::record_to_plain_json;
use synchro_core::speclang::validate_against;
use synchro_core::{check_syncs, Engine, EngineError, FlowToken};

use crate::config::AppConfig;
use crate::input::{request_input, substitute};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub ok: bool,
}

impl Report {
    fn new(text: String, ok: bool) -> Self {
        Report { text, ok }
    }
}

/// Canonical JSON of a response body: sorted keys, lists in stored order.
pub fn body_json(response: &WebResponse) -> Json {
    record_to_plain_json(&response.body)
}

pub fn lint(config: &AppConfig) -> Report {
    let assembly = match config.assemble() {
        Ok(a) => a,
        Err(e) => return Report::new(format!("error: {e:#}\n"), false),
    };
    let prefix = match config.engine_config() {
        Ok(c) => c.prefix,
        Err(e) => return Report::new(format!("error: {e:#}\n"), false),
    };
    let mut lines = Vec::new();
    let mut names = BTreeSet::new();
    for (name, spec, imp) in &assembly.concepts {
        if !names.insert(name) {
            lines.push(format!("concept {name}: registered twice"));
        }
        if let Err(e) = validate_against(spec, &prefix) {
            lines.push(format!("concept {name}: {e}"));
        }
        if builtin(imp).is_none() {
            lines.push(format!("concept {name}: no built-in implementation for {imp}"));
        }
    }
    lines.extend(check_syncs(&assembly.syncs, &assembly.specs()).iter().map(ToString::to_string));
    let mut text: String = lines.iter().map(|l| format!("{l}\n")).collect();
    if lines.is_empty() {
        let _ = writeln!(text, "clean: {} concepts, {} syncs", assembly.concepts.len(), assembly.syncs.len());
    } else {
        let _ = writeln!(text, "{} diagnostic(s)", lines.len());
    }
    Report::new(text, lines.is_empty())
}

/// Opens the log at `path` for appending and rebuilds the engine from it.
fn durable_engine(config: &AppConfig, path: &Path) -> Result<Engine> {
    let entries = read_log_file(path).with_context(|| format!("reading {}", path.display()))?;
    let mut engine = config.engine(Box::new(FileLog::open(path)?))?;
    engine.recover(entries)?;
    engine.run_to_quiescence()?;
    Ok(engine)
}

fn render_flow(engine: &Engine, flow: &FlowToken, text: &mut String) -> bool {
    let _ = write!(text, "{}", engine.trace_flow(flow));
    match engine.response(flow) {
        Some(r) => {
            let _ = writeln!(text, "response {} {}", r.code, body_json(&r));
            true
        }
        None => {
            let _ = writeln!(text, "no response");
            false
        }
    }
}

/// Runs `script` and then one `method` request to quiescence, printing the
/// last flow's trace and response. Strings like `${0.user.token}` in the
/// payloads refer to earlier responses of the script.
pub fn request(config: &AppConfig, method: &str, payload: &Json, token: Option<&str>, script: &[Json], log: Option<&Path>) -> Result<Report> {
    let mut engine = match log {
        Some(path) => durable_engine(config, path)?,
        None => config.engine(Box::new(MemoryLog::new()))?,
    };
    let mut responses = Vec::new();
    for (i, step) in script.iter().enumerate() {
        let step = substitute(step, &responses)?;
        let Some(method) = step.get("method").and_then(Json::as_str) else {
            bail!("script step {i} has no method");
        };
        let token = step.get("token").and_then(Json::as_str);
        let mut body = step.clone();
        if let Some(m) = body.as_object_mut() {
            m.remove("method");
            m.remove("token");
        }
        let flow = engine.request("Web", "request", request_input(method, &body, token)?)?;
        responses.push(engine.response(&flow).map(|r| body_json(&r)).unwrap_or(Json::Null));
    }
    let payload = substitute(payload, &responses)?;
    let flow = engine.request("Web", "request", request_input(method, &payload, token)?)?;
    let mut text = String::new();
    let ok = render_flow(&engine, &flow, &mut text);
    Ok(Report::new(text, ok))
}

/// Recovers from the log, finishes interrupted work, and compares the result
/// with an uninterrupted run of the same external requests.
pub fn replay(config: &AppConfig, path: &Path) -> Result<Report> {
    let entries = match read_log_file(path) {
        Ok(e) => e,
        Err(LogError::Corrupt { line, message }) => {
            return Ok(Report::new(format!("corrupt log at line {line}: {message}\n"), false));
        }
        Err(e) => return Err(e.into()),
    };
    if entries.is_empty() {
        return Ok(Report::new("empty log: equal after recovery\n".into(), true));
    }
    if let Some(LogEntry::Header { version }) = entries.first() {
        if *version != config.version {
            let text = format!("version mismatch: log written by version {version}, app is version {}\n", config.version);
            return Ok(Report::new(text, false));
        }
    }

    let mut recovered = config.engine(Box::new(MemoryLog::with_entries(entries.clone())))?;
    let report = match recovered.recover(entries.clone()) {
        Ok(r) => r,
        Err(e @ EngineError::Divergence { .. }) => return Ok(Report::new(format!("{e}\n"), false)),
        Err(e) => return Err(e.into()),
    };
    recovered.run_to_quiescence()?;

    let mut oracle = config.engine(Box::new(MemoryLog::new()))?;
    let mut invoked = BTreeSet::new();
    for entry in &entries {
        if let LogEntry::Record(rec) = entry {
            if rec.is_invocation() {
                invoked.insert(rec.id.clone());
            } else if !invoked.contains(&rec.id) {
                oracle.submit_external(rec.concept_name(), &rec.name, rec.input.clone())?;
                oracle.run_to_quiescence()?;
            }
        }
    }

    let mut text = format!(
        "recovered {} records in {} flows ({} requeued, {} undispatched)\n",
        report.records, report.flows, report.requeued, report.undispatched
    );
    let (ours, theirs) = (recovered.normalized_history(), oracle.normalized_history());
    let equal = ours == theirs;
    if equal {
        text.push_str("equal after recovery\n");
    } else {
        text.push_str("differs after recovery\n");
        for line in ours.iter().filter(|l| !theirs.contains(l)).take(5) {
            let _ = writeln!(text, "  recovered only: {line}");
        }
        for line in theirs.iter().filter(|l| !ours.contains(l)).take(5) {
            let _ = writeln!(text, "  oracle only:    {line}");
        }
    }
    Ok(Report::new(text, equal))
}

/// Prints the provenance of one logged flow, named by its token or a unique
/// prefix of it.
pub fn trace(config: &AppConfig, path: &Path, flow: &str) -> Result<Report> {
    let entries = read_log_file(path).with_context(|| format!("reading {}", path.display()))?;
    let mut engine = config.engine(Box::new(MemoryLog::with_entries(entries.clone())))?;
    engine.recover(entries)?;
    let matching: Vec<&FlowToken> = engine.flows().iter().filter(|f| f.as_str().starts_with(flow)).collect();
    let flow = match matching.as_slice() {
        [one] => (*one).clone(),
        [] => return Ok(Report::new(format!("no flow {flow} in {}\n", path.display()), false)),
        many => return Ok(Report::new(format!("{} flows start with {flow}\n", many.len()), false)),
    };
    let mut text = String::new();
    render_flow(&engine, &flow, &mut text);
    Ok(Report::new(text, true))
}
