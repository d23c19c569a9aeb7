//! HTTP gateway onto the bootstrap Web concept. One thread owns the engine
//! and serves submissions in arrival order; handlers wait on their flow.

use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value as JsonValue};
use synchro_core::engine::WebResponse;
use synchro_core::{Engine, FlowToken, Record};
use tokio::sync::oneshot;

use crate::commands::body_json;
use crate::input::{header_token, request_input};

/// How a submitted flow ended.
#[derive(Debug, Clone)]
pub enum Outcome {
    Responded(WebResponse),
    Silent,
    Failed(String),
}

enum Job {
    Request { input: Record, accepted: oneshot::Sender<Result<FlowToken, String>>, done: oneshot::Sender<Outcome> },
    Trace { flow: String, reply: oneshot::Sender<Option<String>> },
    History { reply: oneshot::Sender<Vec<String>> },
}

/// A cloneable handle to the engine thread.
#[derive(Clone)]
pub struct Gateway {
    jobs: mpsc::Sender<Job>,
    timeout: Duration,
}

impl Gateway {
    /// Moves `engine` onto its own thread. The thread exits when every
    /// handle has been dropped.
    pub fn spawn(mut engine: Engine, timeout: Duration) -> Gateway {
        let (jobs, rx) = mpsc::channel::<Job>();
        thread::spawn(move || {
            for job in rx {
                match job {
                    Job::Request { input, accepted, done } => {
                        let flow = match engine.submit_external("Web", "request", input) {
                            Ok(flow) => flow,
                            Err(e) => {
                                let _ = accepted.send(Err(e.to_string()));
                                continue;
                            }
                        };
                        let _ = accepted.send(Ok(flow.clone()));
                        let outcome = match engine.run_to_quiescence() {
                            Err(e) => Outcome::Failed(e.to_string()),
                            Ok(_) => match engine.response(&flow) {
                                Some(r) => Outcome::Responded(r),
                                None => Outcome::Silent,
                            },
                        };
                        log::info!("flow {flow}: {outcome:?}");
                        let _ = done.send(outcome);
                    }
                    Job::Trace { flow, reply } => {
                        let found = engine.flows().iter().find(|f| f.as_str() == flow).cloned();
                        let _ = reply.send(found.map(|f| engine.trace_flow(&f).to_string()));
                    }
                    Job::History { reply } => {
                        let _ = reply.send(engine.normalized_history());
                    }
                }
            }
        });
        Gateway { jobs, timeout }
    }

    /// Submits one request. Returns the flow and its outcome, or `None` as
    /// the outcome when the flow did not finish within the timeout.
    pub async fn submit(&self, input: Record) -> Result<(FlowToken, Option<Outcome>), String> {
        let (accepted, accepted_rx) = oneshot::channel();
        let (done, done_rx) = oneshot::channel();
        self.jobs.send(Job::Request { input, accepted, done }).map_err(|_| "engine stopped".to_string())?;
        let flow = accepted_rx.await.map_err(|_| "engine stopped".to_string())??;
        match tokio::time::timeout(self.timeout, done_rx).await {
            Ok(Ok(outcome)) => Ok((flow, Some(outcome))),
            Ok(Err(_)) => Err("engine stopped".into()),
            Err(_) => Ok((flow, None)),
        }
    }

    pub async fn trace(&self, flow: String) -> Option<String> {
        let (reply, rx) = oneshot::channel();
        self.jobs.send(Job::Trace { flow, reply }).ok()?;
        rx.await.ok().flatten()
    }

    /// The engine's normalized action history.
    pub async fn history(&self) -> Vec<String> {
        let (reply, rx) = oneshot::channel();
        if self.jobs.send(Job::History { reply }).is_err() {
            return Vec::new();
        }
        rx.await.unwrap_or_default()
    }
}

pub fn router(gateway: Gateway) -> Router {
    Router::new().route("/api/{method}", post(api)).route("/flows/{flow}", get(flow_trace)).with_state(gateway)
}

fn error(status: StatusCode, message: &str, flow: Option<&FlowToken>) -> Response {
    let mut body = json!({ "error": message });
    if let Some(flow) = flow {
        body["flow"] = JsonValue::String(flow.to_string());
    }
    (status, Json(body)).into_response()
}

async fn api(State(gateway): State<Gateway>, Path(method): Path<String>, headers: HeaderMap, body: Bytes) -> Response {
    let payload: JsonValue = if body.iter().all(u8::is_ascii_whitespace) {
        JsonValue::Null
    } else {
        match serde_json::from_slice(&body) {
            Ok(v) => v,
            Err(e) => return error(StatusCode::BAD_REQUEST, &format!("invalid JSON: {e}"), None),
        }
    };
    let token = headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok()).and_then(header_token);
    let input = match request_input(&method, &payload, token) {
        Ok(i) => i,
        Err(e) => return error(StatusCode::BAD_REQUEST, &e.to_string(), None),
    };
    match gateway.submit(input).await {
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, &e, None),
        Ok((flow, None)) => error(StatusCode::GATEWAY_TIMEOUT, "timed out waiting for a response", Some(&flow)),
        Ok((flow, Some(Outcome::Silent))) => error(StatusCode::NOT_FOUND, &format!("no sync responded to {method}"), Some(&flow)),
        Ok((flow, Some(Outcome::Failed(e)))) => error(StatusCode::INTERNAL_SERVER_ERROR, &e, Some(&flow)),
        Ok((_, Some(Outcome::Responded(r)))) => {
            let status = u16::try_from(r.code).ok().and_then(|c| StatusCode::from_u16(c).ok()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            (status, Json(body_json(&r))).into_response()
        }
    }
}

async fn flow_trace(State(gateway): State<Gateway>, Path(flow): Path<String>) -> Response {
    match gateway.trace(flow).await {
        Some(text) => text.into_response(),
        None => error(StatusCode::NOT_FOUND, "unknown flow", None),
    }
}
