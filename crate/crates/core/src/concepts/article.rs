use chrono::{DateTime, Duration, SecondsFormat, Utc};

use super::*;

/// Published articles addressed by unique slugs.
#[derive(Debug, Default, Clone, Copy)]
pub struct Article;

/// Lowercased, hyphen-separated form of a title.
pub fn slugify(title: &str) -> String {
    let mut slug = String::new();
    for c in title.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            slug.push(c);
        } else if !slug.is_empty() && !slug.ends_with('-') {
            slug.push('-');
        }
    }
    while slug.ends_with('-') {
        slug.pop();
    }
    slug
}

fn unique_slug(state: &StateGraph<'_>, base: &str) -> String {
    let taken = |s: &str| !state.find("slug", &Value::text(s)).is_empty();
    if !taken(base) {
        return base.to_string();
    }
    (2..).map(|n| format!("{base}-{n}")).find(|s| !taken(s)).expect("unbounded suffixes")
}

/// Logical clock: a fixed epoch plus one second per stored article.
fn timestamp(state: &StateGraph<'_>) -> String {
    let epoch: DateTime<Utc> = DateTime::from_timestamp(1_704_067_200, 0).expect("valid epoch");
    let n = state.subjects("articles").len() as i64;
    (epoch + Duration::seconds(n)).to_rfc3339_opts(SecondsFormat::Secs, true)
}

impl Concept for Article {
    fn invoke(&mut self, action: &str, input: &Record, state: &mut StateGraph<'_>, _ctx: &ActionContext) -> Result<Record, ConceptError> {
        let article = require_ref(input, "article")?;
        match action {
            "create" => {
                let title = require_text(input, "title")?;
                let description = require_text(input, "description")?;
                let body = require_text(input, "body")?;
                let author = require_ref(input, "author")?;
                if state.is_member("articles", article) {
                    return Ok(error("article already exists"));
                }
                let base = slugify(title);
                if base.is_empty() {
                    return Ok(error("title must not be blank"));
                }
                let slug = unique_slug(state, &base);
                let now = timestamp(state);
                state.insert_member("articles", article);
                state.set(article, "title", title);
                state.set(article, "description", description);
                state.set(article, "body", body);
                state.set(article, "author", author.clone());
                state.set(article, "slug", slug.as_str());
                state.set(article, "createdAt", now.as_str());
                state.set(article, "updatedAt", now);
                Ok(Record::new().with("article", article.clone()).with("slug", slug))
            }
            "delete" => {
                if !state.is_member("articles", article) {
                    return Ok(error("article not found"));
                }
                state.remove_subject(article);
                Ok(Record::new().with("article", article.clone()))
            }
            other => Err(unknown("Article", other)),
        }
    }
}
