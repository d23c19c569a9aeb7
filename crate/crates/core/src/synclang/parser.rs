use crate::model::Value;
use crate::store::{Clause, CmpOp, Expr, GraphPattern, QueryAst, Term, TriplePattern};

use super::ast::*;
use super::lexer::{tokenize, Pos, Tok};
use super::SyncError;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    pos: usize,
    end: Pos,
}

fn keyword(tok: &Tok, kw: &str) -> bool {
    matches!(tok, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|(t, _)| t)
    }

    fn here(&self) -> Pos {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, SyncError> {
        Err(SyncError::Parse { pos: self.here(), message: message.into() })
    }

    fn found(&self) -> String {
        self.peek().map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), SyncError> {
        if self.eat(&want) {
            Ok(())
        } else {
            self.fail(format!("expected {want}, found {}", self.found()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| keyword(t, kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SyncError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.fail(format!("expected `{kw}`, found {}", self.found()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyncError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail(format!("expected {what}, found {}", self.found())),
        }
    }

    fn sync(&mut self) -> Result<SyncDef, SyncError> {
        self.expect_keyword("sync")?;
        let name = self.ident("a sync name")?;
        self.expect_keyword("when")?;
        self.expect(Tok::LBrace)?;
        let mut when = Vec::new();
        while !self.eat(&Tok::RBrace) {
            when.push(self.when_pattern()?);
        }
        if when.is_empty() {
            return self.fail(format!("sync {name}: `when` must contain at least one pattern"));
        }
        let where_ = if self.eat_keyword("where") {
            self.expect(Tok::LBrace)?;
            Some(QueryAst::new(self.clauses()?))
        } else {
            None
        };
        if !self.at_keyword("then") {
            return self.fail(format!("sync {name}: expected `then`, found {}", self.found()));
        }
        self.pos += 1;
        self.expect(Tok::LBrace)?;
        let mut then = Vec::new();
        while !self.eat(&Tok::RBrace) {
            then.push(self.invocation()?);
        }
        if then.is_empty() {
            return self.fail(format!("sync {name}: `then` must contain at least one invocation"));
        }
        Ok(SyncDef { name, when, where_, then })
    }

    fn action_ref(&mut self) -> Result<(String, String), SyncError> {
        let concept = self.ident("a concept name")?;
        self.expect(Tok::Slash)?;
        let action = self.ident("an action name")?;
        self.expect(Tok::Colon)?;
        Ok((concept, action))
    }

    fn when_pattern(&mut self) -> Result<ActionPattern, SyncError> {
        let (concept, action) = self.action_ref()?;
        let input = self.term_record()?;
        if !self.eat(&Tok::Arrow) {
            return self.fail(format!("`when` pattern {concept}/{action} needs `=> [ ... ]` (only completions can be matched)"));
        }
        let output = self.term_record()?;
        Ok(ActionPattern { concept, action, input, output })
    }

    fn invocation(&mut self) -> Result<Invocation, SyncError> {
        let (concept, action) = self.action_ref()?;
        let args = self.template_record()?;
        if self.peek() == Some(&Tok::Arrow) {
            return self.fail(format!("`then` invocation {concept}/{action} must not have an output pattern"));
        }
        Ok(Invocation { concept, action, args })
    }

    fn fields<T>(&mut self, mut value: impl FnMut(&mut Self) -> Result<T, SyncError>) -> Result<Vec<(String, T)>, SyncError> {
        self.expect(Tok::LBracket)?;
        let mut out: Vec<(String, T)> = Vec::new();
        loop {
            if self.eat(&Tok::RBracket) {
                return Ok(out);
            }
            let name = self.ident("a field name")?;
            if out.iter().any(|(k, _)| *k == name) {
                return self.fail(format!("duplicate field `{name}`"));
            }
            self.expect(Tok::Colon)?;
            out.push((name, value(self)?));
            if !self.eat(&Tok::Semi) && self.peek() != Some(&Tok::RBracket) {
                return self.fail(format!("expected `;` or `]`, found {}", self.found()));
            }
        }
    }

    fn term_record(&mut self) -> Result<Vec<(String, Term)>, SyncError> {
        self.fields(|p| {
            if p.peek() == Some(&Tok::LBracket) {
                return p.fail("nested records are only allowed in `then` templates");
            }
            p.term()
        })
    }

    fn template_record(&mut self) -> Result<Vec<(String, TemplateValue)>, SyncError> {
        self.fields(|p| {
            if p.peek() == Some(&Tok::LBracket) {
                Ok(TemplateValue::Record(p.template_record()?))
            } else {
                Ok(TemplateValue::Term(p.term()?))
            }
        })
    }

    fn term(&mut self) -> Result<Term, SyncError> {
        let tok = self.peek().cloned();
        let term = match tok {
            Some(Tok::Var(v)) => Term::Var(v),
            Some(Tok::Str(s)) => Term::Value(Value::Text(s)),
            Some(Tok::Int(i)) => Term::Value(Value::Int(i)),
            Some(Tok::Ref(iri)) => Term::Value(Value::Ref(iri)),
            Some(ref t) if keyword(t, "true") => Term::Value(Value::Bool(true)),
            Some(ref t) if keyword(t, "false") => Term::Value(Value::Bool(false)),
            Some(Tok::Ident(ref s)) if s == "rdf" && self.peek_at(1) == Some(&Tok::Colon) => {
                if !matches!(self.peek_at(2), Some(Tok::Ident(n)) if n == "nil") {
                    return self.fail("expected `rdf:nil`");
                }
                self.pos += 2;
                Term::Value(Value::Nil)
            }
            _ => return self.fail(format!("expected a variable or literal, found {}", self.found())),
        };
        self.pos += 1;
        Ok(term)
    }

    /// Clauses up to and including the closing `}`.
    fn clauses(&mut self) -> Result<Vec<Clause>, SyncError> {
        let mut out = Vec::new();
        loop {
            if self.eat(&Tok::RBrace) {
                return Ok(out);
            }
            if self.eat_keyword("optional") {
                self.expect(Tok::LBrace)?;
                out.push(Clause::Optional(self.clauses()?));
            } else if self.eat_keyword("bind") {
                self.expect(Tok::LParen)?;
                let expr = self.expr()?;
                self.expect_keyword("as")?;
                let target = match self.bump() {
                    Some(Tok::Var(v)) => v,
                    _ => {
                        self.pos -= 1;
                        return self.fail(format!("expected a variable after `as`, found {}", self.found()));
                    }
                };
                self.expect(Tok::RParen)?;
                out.push(Clause::Bind { expr, target });
            } else if self.eat_keyword("filter") {
                if self.eat_keyword("not") {
                    self.expect_keyword("exists")?;
                    self.expect(Tok::LBrace)?;
                    out.push(Clause::NotExists(self.clauses()?));
                } else {
                    self.expect(Tok::LParen)?;
                    let expr = self.expr()?;
                    self.expect(Tok::RParen)?;
                    out.push(Clause::Filter(expr));
                }
            } else if matches!(self.peek(), Some(Tok::Ident(_))) {
                out.push(Clause::Graph(self.graph_pattern()?));
            } else {
                return self.fail(format!("expected a where clause, found {}", self.found()));
            }
        }
    }

    fn graph_pattern(&mut self) -> Result<GraphPattern, SyncError> {
        let concept = self.ident("a concept name")?;
        self.expect(Tok::Colon)?;
        self.expect(Tok::LBrace)?;
        let mut triples = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let subject = self.term()?;
            loop {
                let predicate = self.ident("a state component name")?;
                self.expect(Tok::Colon)?;
                let object = self.term()?;
                triples.push(TriplePattern { subject: subject.clone(), predicate, object });
                if self.eat(&Tok::Semi) {
                    if matches!(self.peek(), Some(Tok::Ident(_))) && self.peek_at(1) == Some(&Tok::Colon) {
                        continue;
                    }
                    break;
                }
                break;
            }
            if !self.eat(&Tok::Dot) && self.peek() != Some(&Tok::RBrace) {
                return self.fail(format!("expected `;`, `.` or `}}`, found {}", self.found()));
            }
        }
        if triples.is_empty() {
            return self.fail(format!("empty pattern for {concept}"));
        }
        Ok(GraphPattern { concept, triples })
    }

    fn expr(&mut self) -> Result<Expr, SyncError> {
        let left = self.primary()?;
        if let Some(Tok::Cmp(op)) = self.peek() {
            let op = match *op {
                "=" => CmpOp::Eq,
                "!=" => CmpOp::Ne,
                "<" => CmpOp::Lt,
                "<=" => CmpOp::Le,
                ">" => CmpOp::Gt,
                _ => CmpOp::Ge,
            };
            self.pos += 1;
            let right = self.primary()?;
            return Ok(Expr::Compare(op, Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn primary(&mut self) -> Result<Expr, SyncError> {
        if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        if self.at_keyword("uuid") && self.peek_at(1) == Some(&Tok::LParen) {
            self.pos += 2;
            self.expect(Tok::RParen)?;
            return Ok(Expr::Uuid);
        }
        if self.at_keyword("coalesce") && self.peek_at(1) == Some(&Tok::LParen) {
            self.pos += 2;
            let mut args = vec![self.expr()?];
            while self.eat(&Tok::Comma) {
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen)?;
            return Ok(Expr::Coalesce(args));
        }
        Ok(Expr::Term(self.term()?))
    }
}

/// Parses a `.sync` source holding any number of synchronizations.
pub fn parse_sync(source: &str) -> Result<Vec<SyncDef>, SyncError> {
    let toks = tokenize(source)?;
    let end = Pos { line: source.lines().count().max(1), col: source.lines().last().map_or(1, |l| l.chars().count() + 1) };
    let mut p = Parser { toks, pos: 0, end };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.sync()?);
    }
    Ok(out)
}
