use std::fmt;

use crate::model::Iri;

use super::SyncError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Str(String),
    Int(i64),
    Ref(Iri),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Semi,
    Dot,
    Comma,
    Slash,
    Arrow,
    Cmp(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "`?{s}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Ref(iri) => write!(f, "<{iri}>"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Arrow => f.write_str("`=>`"),
            Tok::Cmp(op) => write!(f, "`{op}`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, SyncError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let pos = Pos { line: ln + 1, col: i + 1 };
            let err = |message: String| SyncError::Parse { pos, message };
            let c = chars[i];
            let next = chars.get(i + 1).copied();
            let single = match c {
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                '[' => Some(Tok::LBracket),
                ']' => Some(Tok::RBracket),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ':' => Some(Tok::Colon),
                ';' => Some(Tok::Semi),
                '.' => Some(Tok::Dot),
                ',' => Some(Tok::Comma),
                '/' => Some(Tok::Slash),
                _ => None,
            };
            if let Some(tok) = single {
                out.push((tok, pos));
                i += 1;
                continue;
            }
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                '=' if next == Some('>') => {
                    out.push((Tok::Arrow, pos));
                    i += 2;
                }
                '=' => {
                    out.push((Tok::Cmp("="), pos));
                    i += 1;
                }
                '!' if next == Some('=') => {
                    out.push((Tok::Cmp("!="), pos));
                    i += 2;
                }
                '<' if next == Some('=') => {
                    out.push((Tok::Cmp("<="), pos));
                    i += 2;
                }
                '>' if next == Some('=') => {
                    out.push((Tok::Cmp(">="), pos));
                    i += 2;
                }
                '>' => {
                    out.push((Tok::Cmp(">"), pos));
                    i += 1;
                }
                '<' => {
                    let close = chars[i..].iter().position(|&c| c == '>' || c.is_whitespace()).map(|p| p + i);
                    let inner: Option<String> = close.filter(|&e| chars[e] == '>').map(|e| chars[i + 1..e].iter().collect());
                    match inner.filter(|t| t.contains("://")) {
                        Some(text) => {
                            i += text.chars().count() + 2;
                            out.push((Tok::Ref(Iri::new(text).map_err(|e| err(e.to_string()))?), pos));
                        }
                        None => {
                            out.push((Tok::Cmp("<"), pos));
                            i += 1;
                        }
                    }
                }
                '"' => {
                    let mut s = String::new();
                    i += 1;
                    loop {
                        match chars.get(i) {
                            None => return Err(err("unterminated string literal".into())),
                            Some('"') => break,
                            Some('\\') => {
                                let esc = chars.get(i + 1).ok_or_else(|| err("dangling escape".into()))?;
                                s.push(match esc {
                                    'n' => '\n',
                                    't' => '\t',
                                    other => *other,
                                });
                                i += 2;
                            }
                            Some(ch) => {
                                s.push(*ch);
                                i += 1;
                            }
                        }
                    }
                    i += 1;
                    out.push((Tok::Str(s), pos));
                }
                '?' => {
                    let start = i + 1;
                    i = start;
                    while chars.get(i).copied().is_some_and(ident_char) {
                        i += 1;
                    }
                    if i == start {
                        return Err(err("expected a variable name after `?`".into()));
                    }
                    out.push((Tok::Var(chars[start..i].iter().collect()), pos));
                }
                c if c.is_ascii_digit() || (c == '-' && next.is_some_and(|n| n.is_ascii_digit())) => {
                    let start = i;
                    i += 1;
                    while chars.get(i).is_some_and(char::is_ascii_digit) {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    let n = text.parse().map_err(|_| err(format!("integer out of range: {text}")))?;
                    out.push((Tok::Int(n), pos));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while chars.get(i).copied().is_some_and(ident_char) {
                        i += 1;
                    }
                    out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
                }
                other => return Err(err(format!("unexpected character {other:?}"))),
            }
        }
    }
    Ok(out)
}
