use super::*;
use crate::store::Store;

/// The bootstrap concept: external requests and their responses.
#[derive(Debug, Default, Clone, Copy)]
pub struct Web;

impl Concept for Web {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, ctx: &ActionContext) -> Result<Record, ConceptError> {
        match action {
            "request" => {
                let request = &ctx.record_id;
                let method = require_text(input, "method")?;
                let mut payload = input.clone();
                payload.remove("method");
                state.insert_member("requests", request);
                state.set(request, "method", method);
                state.set(request, "payload", payload);
                Ok(Record::new().with("request", request.clone()))
            }
            "respond" => {
                let request = require_ref(input, "request")?;
                if !state.is_member("requests", request) {
                    return Ok(error("unknown request"));
                }
                if state.get(request, "response").is_some() {
                    return Ok(error("already responded"));
                }
                let mut response = input.clone();
                response.remove("request");
                if let Some(code) = input.get("code").and_then(Value::as_int) {
                    state.set(request, "code", code);
                }
                state.set(request, "response", response);
                Ok(Record::new().with("request", request.clone()))
            }
            "format" => Ok(input.clone()),
            other => Err(unknown("Web", other)),
        }
    }

    fn bootstrap_actions(&self) -> &[&'static str] {
        &["request"]
    }
}

/// A request as recorded in the bootstrap concept's state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WebExchange {
    pub request: Iri,
    pub method: String,
    pub payload: Record,
    pub response: Option<Record>,
    pub code: Option<i64>,
}

impl WebExchange {
    /// Reads the exchange for `request` from the Web state graph.
    pub fn read(store: &Store, graph: &Iri, namespace: &Iri, request: &Iri) -> Option<WebExchange> {
        let get = |rel: &str| store.objects(graph, request, &namespace.child(rel)).iter().next().cloned();
        let method = get("method")?.as_text()?.to_string();
        let record = |v: Option<Value>| v.and_then(|v| v.as_record().cloned());
        Some(WebExchange {
            request: request.clone(),
            method,
            payload: record(get("payload")).unwrap_or_default(),
            response: record(get("response")),
            code: get("code").and_then(|v| v.as_int()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn respond_is_write_once() {
        let mut h = Harness::new("Web", Box::new(Web));
        let out = h.call("request", Record::new().with("method", "ping").with("n", 1i64)).unwrap();
        let r = out.get("request").unwrap().clone();
        let respond = Record::new().with("request", r.clone()).with("code", 201i64);
        assert_eq!(h.call("respond", respond.clone()).unwrap(), Record::new().with("request", r.clone()));
        assert!(h.call("respond", respond).unwrap().contains("error"));

        let ns = prefix().child("Web");
        let graph = prefix().child("graph").child("Web");
        let ex = WebExchange::read(&h.store, &graph, &ns, r.as_ref_iri().unwrap()).unwrap();
        assert_eq!(ex.method, "ping");
        assert_eq!(ex.payload, Record::new().with("n", 1i64));
        assert_eq!(ex.code, Some(201));
        assert_eq!(ex.response, Some(Record::new().with("code", 201i64)));
    }

    #[test]
    fn format_echoes_its_input() {
        let mut h = Harness::new("Web", Box::new(Web));
        let input = Record::new().with("type", "article").with("article", entity("a"));
        assert_eq!(h.call("format", input.clone()).unwrap(), input);
    }
}
