//! Command output: human-readable lines plus a flat `key = value` document.
//!
//! The structured form has one entry per line. Keys are dotted ASCII
//! identifiers; values are escaped so that `\`, newlines and tabs survive a
//! round trip through [`parse_kv`].

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub params: Vec<(String, String)>,
    pub results: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            status: Status::Ok,
            params: Vec::new(),
            results: Vec::new(),
            warnings: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn result(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.results.push((key.to_string(), value.to_string()));
        self
    }

    pub fn warn(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    pub fn line(&mut self, text: impl Into<String>) -> &mut Self {
        self.lines.push(text.into());
        self
    }

    pub fn fail(&mut self) -> &mut Self {
        self.status = Status::Failed;
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.results.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// The entries of the structured rendering, in order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out =
            vec![("command".to_string(), self.command.clone()), ("status".to_string(), self.status.name().to_string())];
        out.extend(self.params.iter().map(|(k, v)| (format!("param.{k}"), v.clone())));
        out.extend(self.results.iter().map(|(k, v)| (format!("result.{k}"), v.clone())));
        out.extend(self.warnings.iter().enumerate().map(|(i, w)| (format!("warning.{i}"), w.clone())));
        out
    }

    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {}", escape(&v));
        }
        out
    }

    /// The summary lines, then the results as an aligned table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
        if !self.results.is_empty() {
            if !self.lines.is_empty() {
                out.push('\n');
            }
            let width = self.results.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
            for (k, v) in &self.results {
                let _ = writeln!(out, "  {k:<width$}  {v}");
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn escape(v: &str) -> String {
    let mut out = String::with_capacity(v.len());
    for c in v.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    MissingSeparator { line: usize },
    #[error("line {line}: invalid key `{key}`")]
    InvalidKey { line: usize, key: String },
    #[error("line {line}: bad escape sequence")]
    BadEscape { line: usize },
}

fn unescape(v: &str, line: usize) -> Result<String, KvError> {
    let mut out = String::with_capacity(v.len());
    let mut chars = v.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            _ => return Err(KvError::BadEscape { line }),
        }
    }
    Ok(out)
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

/// Parses a structured rendering back into its entries.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>, KvError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once(" = ") else {
            return Err(KvError::MissingSeparator { line: i + 1 });
        };
        if !valid_key(k) {
            return Err(KvError::InvalidKey { line: i + 1, key: k.to_string() });
        }
        out.push((k.to_string(), unescape(v, i + 1)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_rendering_aligns_results() {
        let mut r = Report::new("index");
        r.line("Index = 1").result("series", 1).result("polynomial.positive", 8);
        assert_eq!(r.render_text(), "Index = 1\n\n  series               1\n  polynomial.positive  8\n");
    }

    proptest! {
        #[test]
        fn kv_round_trips(
            params in proptest::collection::vec(("[a-z][a-z0-9_.]{0,8}", any::<String>()), 0..4),
            results in proptest::collection::vec(("[a-z][a-z0-9_.]{0,8}", any::<String>()), 0..6),
            warnings in proptest::collection::vec(any::<String>(), 0..3),
        ) {
            let mut r = Report::new("zeta");
            for (k, v) in &params { r.param(k, v); }
            for (k, v) in &results { r.result(k, v); }
            for w in &warnings { r.warn(w.clone()); }
            prop_assert_eq!(parse_kv(&r.render_kv()).unwrap(), r.entries());
        }
    }
}
