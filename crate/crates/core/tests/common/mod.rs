#![allow(dead_code)]

pub mod gen;

use synchro_core::concepts::Concept;
use synchro_core::demo;
use synchro_core::engine::{Engine, EngineConfig, MemoryLog, WebResponse};
use synchro_core::{FlowToken, Record, Value};

/// The demo application driven through Web/request.
pub struct App {
    pub engine: Engine,
    pub log: MemoryLog,
}

impl App {
    pub fn new(suites: &[&str]) -> App {
        Self::with(demo::config(), suites, MemoryLog::new(), Vec::new())
    }

    pub fn with(config: EngineConfig, suites: &[&str], log: MemoryLog, overrides: Vec<(&str, Box<dyn Concept>)>) -> App {
        let engine = demo::engine_with(config, suites, Box::new(log.clone()), overrides).expect("demo engine builds");
        App { engine, log }
    }

    pub fn basic() -> App {
        Self::new(demo::BASIC)
    }

    pub fn validated() -> App {
        Self::new(demo::VALIDATED)
    }

    pub fn request(&mut self, input: Record) -> FlowToken {
        self.engine.request("Web", "request", input).expect("flow runs")
    }

    pub fn register(&mut self, name: &str, email: &str, password: &str) -> FlowToken {
        self.request(register_input(name, email, password))
    }

    pub fn response(&self, flow: &FlowToken) -> WebResponse {
        let all = self.engine.responses(flow);
        assert_eq!(all.len(), 1, "expected one response in flow {flow}:\n{}", self.engine.trace_flow(flow));
        all.into_iter().next().unwrap()
    }

    /// Registers a user and returns their token.
    pub fn user(&mut self, name: &str) -> String {
        let flow = self.register(name, &format!("{name}@example.test"), "password1");
        token_of(&self.response(&flow))
    }

    pub fn create_article(&mut self, token: &str, title: &str, tags: &[&str]) -> FlowToken {
        let mut input = Record::new()
            .with("method", "create_article")
            .with("title", title)
            .with("description", format!("about {title}"))
            .with("body", format!("{title} body"))
            .with("token", token);
        if !tags.is_empty() {
            input.insert("tagList", Value::List(tags.iter().map(|t| Value::text(*t)).collect()));
        }
        self.request(input)
    }

    pub fn article(&mut self, token: &str, title: &str, tags: &[&str]) -> String {
        let flow = self.create_article(token, title, tags);
        article_of(&self.response(&flow)).text("slug").expect("slug").to_string()
    }

    pub fn add_comment(&mut self, token: &str, slug: &str, body: &str) -> FlowToken {
        self.request(Record::new().with("method", "add_comment").with("token", token).with("slug", slug).with("body", body))
    }

    pub fn delete_article(&mut self, token: &str, slug: &str) -> FlowToken {
        self.request(Record::new().with("method", "delete_article").with("token", token).with("slug", slug))
    }

    pub fn get_article(&mut self, slug: &str) -> FlowToken {
        self.request(Record::new().with("method", "get_article").with("slug", slug))
    }
}

pub fn register_input(name: &str, email: &str, password: &str) -> Record {
    Record::new().with("method", "register").with("username", name).with("email", email).with("password", password)
}

pub fn user_of(r: &WebResponse) -> &Record {
    r.body.get("user").and_then(Value::as_record).unwrap_or_else(|| panic!("no user body in {:?}", r))
}

pub fn token_of(r: &WebResponse) -> String {
    user_of(r).text("token").expect("token").to_string()
}

pub fn article_of(r: &WebResponse) -> &Record {
    r.body.get("article").and_then(Value::as_record).unwrap_or_else(|| panic!("no article body in {:?}", r))
}

pub fn field_names(r: &Record) -> Vec<String> {
    r.fields().map(str::to_string).collect()
}
