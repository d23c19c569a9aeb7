use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value as Json;
use synchro_cli::commands::{self, Report};
use synchro_cli::{router, AppConfig, Gateway};
use synchro_core::engine::{read_log_file, FileLog};
use synchro_core::EngineError;

#[derive(Parser)]
#[command(name = "synchro", version, about = "Run, inspect and check concept/sync applications")]
struct Cli {
    /// Application configuration; the bundled demo app when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve POST /api/{method} over HTTP, logging to the configured log.
    Run,
    /// Run one request offline and print its flow trace and response.
    Request {
        method: String,
        /// Inline JSON payload.
        #[arg(long, conflicts_with = "payload")]
        json: Option<String>,
        /// File holding the JSON payload.
        #[arg(long)]
        payload: Option<PathBuf>,
        #[arg(long)]
        token: Option<String>,
        /// JSON-lines file of requests to run first; `${N.path}` strings
        /// refer to the Nth earlier response.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Resume from and append to this log instead of running in memory.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Recover from a log and compare with an uninterrupted run.
    Replay {
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Check concept specs and the ruleset.
    Lint,
    /// Print the provenance of one logged flow.
    Trace {
        /// Flow token or a unique prefix of it.
        flow: String,
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

fn read_json(path: &PathBuf) -> Result<Json> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_script(path: &PathBuf) -> Result<Vec<Json>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

fn serve(config: &AppConfig) -> Result<Report> {
    let path = config.log_path();
    let entries = read_log_file(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut engine = match config.engine(Box::new(FileLog::open(&path)?)) {
        Err(e) => match e.downcast::<EngineError>() {
            Ok(EngineError::Lint(diags)) => {
                let text: String = diags.iter().map(|d| format!("{d}\n")).collect();
                return Ok(Report { text: format!("{text}refusing to start: ruleset has {} diagnostic(s)\n", diags.len()), ok: false });
            }
            Ok(other) => return Err(other.into()),
            Err(e) => return Err(e),
        },
        Ok(engine) => engine,
    };
    let report = engine.recover(entries)?;
    engine.run_to_quiescence()?;
    log::info!("resumed {} records from {}", report.records, path.display());

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&config.listen).await.with_context(|| format!("binding {}", config.listen))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(Gateway::spawn(engine, config.timeout()))).await?;
        Ok(Report { text: String::new(), ok: true })
    })
}

fn execute(cli: Cli) -> Result<Report> {
    let config = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::bundled(),
    }
    .with_env();
    match cli.command {
        Command::Run => serve(&config),
        Command::Lint => Ok(commands::lint(&config)),
        Command::Request { method, json, payload, token, script, log } => {
            let payload = match (json, payload) {
                (Some(text), _) => serde_json::from_str(&text).context("parsing --json")?,
                (None, Some(path)) => read_json(&path)?,
                (None, None) => Json::Null,
            };
            let script = script.as_ref().map(read_script).transpose()?.unwrap_or_default();
            commands::request(&config, &method, &payload, token.as_deref(), &script, log.as_deref())
        }
        Command::Replay { log } => commands::replay(&config, &log.unwrap_or_else(|| config.log_path())),
        Command::Trace { flow, log } => commands::trace(&config, &log.unwrap_or_else(|| config.log_path()), &flow),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(report) => {
            print!("{}", report.text);
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
