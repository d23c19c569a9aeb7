//! The append-only JSON-lines action log.
//!
//! The first line is a header `{"version": ...}`. Every other line is an
//! action record, a sync edge `{"from", "sync", "to"}`, or a step marker
//! `{"done": id}` written once every invocation caused by a completion has
//! been dispatched.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use crate::model::json::{record_from_json_value, record_to_line};
use crate::model::{ActionRecord, EdgeTarget, Iri, SyncEdge};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEntry {
    Header { version: String },
    Record(ActionRecord),
    Edge(SyncEdge),
    /// Every sync has been matched against this completion; what remains of
    /// its step is dispatching the invocations it produced.
    Done(Iri),
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("injected crash after {0} appends")]
    Crashed(usize),
    #[error("log i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    version: String,
}

#[derive(Serialize, Deserialize)]
struct EdgeLine {
    from: Iri,
    sync: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
struct DoneLine {
    done: Iri,
}

impl LogEntry {
    pub fn to_line(&self) -> String {
        match self {
            LogEntry::Header { version } => serde_json::to_string(&HeaderLine { version: version.clone() }),
            LogEntry::Record(rec) => Ok(record_to_line(rec)),
            LogEntry::Edge(e) => serde_json::to_string(&EdgeLine { from: e.from.clone(), sync: e.sync.clone(), to: e.to.encode() }),
            LogEntry::Done(id) => serde_json::to_string(&DoneLine { done: id.clone() }),
        }
        .expect("log lines always serialize")
    }

    pub fn from_line(line: &str) -> Result<LogEntry, String> {
        let json: Json = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let obj = json.as_object().ok_or("expected a JSON object")?;
        if obj.contains_key("id") {
            return record_from_json_value(json).map(LogEntry::Record).map_err(|e| e.to_string());
        }
        if obj.contains_key("sync") {
            let e: EdgeLine = serde_json::from_value(json).map_err(|e| e.to_string())?;
            let to = EdgeTarget::decode(&e.to).map_err(|e| e.to_string())?;
            return Ok(LogEntry::Edge(SyncEdge { from: e.from, sync: e.sync, to }));
        }
        if obj.contains_key("done") {
            let d: DoneLine = serde_json::from_value(json).map_err(|e| e.to_string())?;
            return Ok(LogEntry::Done(d.done));
        }
        if obj.contains_key("version") {
            let h: HeaderLine = serde_json::from_value(json).map_err(|e| e.to_string())?;
            return Ok(LogEntry::Header { version: h.version });
        }
        Err("unrecognised log line".into())
    }
}

/// Parses a whole log. Blank lines are skipped; line numbers are 1-based.
pub fn read_log(text: &str) -> Result<Vec<LogEntry>, LogError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry = LogEntry::from_line(line).map_err(|message| LogError::Corrupt { line: i + 1, message })?;
        if matches!(entry, LogEntry::Header { .. }) != out.is_empty() {
            let message = if out.is_empty() { "log must start with a header" } else { "header after the first line" };
            return Err(LogError::Corrupt { line: i + 1, message: message.into() });
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn read_log_file(path: &Path) -> Result<Vec<LogEntry>, LogError> {
    match std::fs::read_to_string(path) {
        Ok(text) => read_log(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

/// Durable sink for log entries. A batch is appended atomically.
pub trait ActionLog: Send {
    fn append(&mut self, batch: &[LogEntry]) -> Result<(), LogError>;
}

/// An in-memory log. Clones share the same entries, so a test can keep a
/// handle while the engine owns another.
#[derive(Debug, Clone, Default)]
pub struct MemoryLog {
    entries: Arc<Mutex<Vec<LogEntry>>>,
    crash_after: Option<usize>,
    appends: Arc<AtomicUsize>,
}

impl MemoryLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_entries(entries: Vec<LogEntry>) -> Self {
        MemoryLog { entries: Arc::new(Mutex::new(entries)), ..Self::default() }
    }

    /// Fails every append after the first `n`.
    pub fn crashing_after(n: usize) -> Self {
        MemoryLog { crash_after: Some(n), ..Self::default() }
    }

    pub fn entries(&self) -> Vec<LogEntry> {
        self.entries.lock().expect("log lock").clone()
    }

    pub fn appends(&self) -> usize {
        self.appends.load(Ordering::SeqCst)
    }

    pub fn to_text(&self) -> String {
        self.entries().iter().map(|e| e.to_line() + "\n").collect()
    }
}

impl ActionLog for MemoryLog {
    fn append(&mut self, batch: &[LogEntry]) -> Result<(), LogError> {
        let done = self.appends();
        if self.crash_after.is_some_and(|n| done >= n) {
            return Err(LogError::Crashed(done));
        }
        self.appends.fetch_add(1, Ordering::SeqCst);
        self.entries.lock().expect("log lock").extend_from_slice(batch);
        Ok(())
    }
}

/// A JSON-lines file opened for appending; each batch is flushed with one
/// write.
pub struct FileLog {
    path: PathBuf,
    file: File,
}

impl FileLog {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, LogError> {
        let path = path.into();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(FileLog { path, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl ActionLog for FileLog {
    fn append(&mut self, batch: &[LogEntry]) -> Result<(), LogError> {
        let text: String = batch.iter().map(|e| e.to_line() + "\n").collect();
        self.file.write_all(text.as_bytes())?;
        self.file.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FlowToken, Record};

    fn iri(s: &str) -> Iri {
        Iri::new(format!("https://example.org/app/{s}")).unwrap()
    }

    fn sample() -> Vec<LogEntry> {
        let rec = ActionRecord {
            id: iri("action/1"),
            concept: iri("Web"),
            name: "request".into(),
            input: Record::new().with("method", "register"),
            output: Some(Record::new().with("request", iri("action/1"))),
            flow: FlowToken::new("f1"),
        };
        vec![
            LogEntry::Header { version: "1".into() },
            LogEntry::Record(rec),
            LogEntry::Edge(SyncEdge { from: iri("action/1"), sync: "Registration".into(), to: EdgeTarget::Action(iri("action/2")) }),
            LogEntry::Edge(SyncEdge { from: iri("action/1"), sync: "Nothing".into(), to: EdgeTarget::NoOp("ab12".into()) }),
            LogEntry::Done(iri("action/1")),
        ]
    }

    #[test]
    fn lines_round_trip() {
        let text: String = sample().iter().map(|e| e.to_line() + "\n").collect();
        assert_eq!(read_log(&text).unwrap(), sample());
        assert!(text.lines().next().unwrap() == r#"{"version":"1"}"#);
        assert!(text.contains(r#""to":"noop:ab12""#));
    }

    #[test]
    fn corrupt_line_reports_position() {
        let mut lines: Vec<String> = sample().iter().map(LogEntry::to_line).collect();
        lines[2] = "{\"from\": 3".into();
        let err = read_log(&lines.join("\n")).unwrap_err();
        assert!(matches!(err, LogError::Corrupt { line: 3, .. }), "{err}");
    }

    #[test]
    fn header_must_come_first() {
        let lines: Vec<String> = sample().iter().skip(1).map(LogEntry::to_line).collect();
        assert!(matches!(read_log(&lines.join("\n")), Err(LogError::Corrupt { line: 1, .. })));
        assert!(read_log("").unwrap().is_empty());
    }

    #[test]
    fn memory_log_crashes_on_schedule() {
        let mut log = MemoryLog::crashing_after(2);
        let handle = log.clone();
        let batch = &sample()[..1];
        log.append(batch).unwrap();
        log.append(batch).unwrap();
        assert!(matches!(log.append(batch), Err(LogError::Crashed(2))));
        assert_eq!(handle.entries().len(), 2);
    }

    #[test]
    fn file_log_appends_and_reads_back() {
        let dir = std::env::temp_dir().join(format!("synchro-log-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("log.jsonl");
        let _ = std::fs::remove_file(&path);
        let mut log = FileLog::open(&path).unwrap();
        log.append(&sample()[..2]).unwrap();
        log.append(&sample()[2..]).unwrap();
        assert_eq!(read_log_file(&path).unwrap(), sample());
        std::fs::remove_dir_all(&dir).unwrap();
        assert!(read_log_file(&path).unwrap().is_empty());
    }
}
