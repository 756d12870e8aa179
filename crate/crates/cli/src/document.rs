//! The `.ck` document format.
//!
//! ```text
//! # main example
//! n = 3
//! A = 110 111 011
//!
//! [t1]
//! 1,1 <- 2,1
//! 2 <- 1
//! [t2]
//! 3,2 <- e
//! [t3]
//! 3,3 <- 3
//! ```
//!
//! A block `[tI]` lists the pairs `ν <- μ` of the image of generator `I`.
//! Blocks named `[F.tI]` belong to a second endomorphism `F`; unprefixed
//! blocks form the unnamed one. Words are comma-separated letters, `e` for
//! the empty word, or a digit string when `n ≤ 9`.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use cklef_core::{EndoError, GeometricEndomorphism, Letter, TransitionMatrix, Word};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("{pos}: {message}")]
    Syntax { pos: Position, message: String },
    #[error("{pos}: letter {letter} is not in the alphabet 1..={n}")]
    UnknownLetter { pos: Position, letter: usize, n: usize },
    #[error("{pos}: word {word} is not allowable")]
    UnallowableWord { pos: Position, word: String },
    #[error("{pos}: {message}")]
    Matrix { pos: Position, message: String },
    #[error("{pos}: block [{name}] appears twice")]
    DuplicateBlock { pos: Position, name: String },
    #[error("endomorphism {endo}: no block for generator t{generator}")]
    MissingGenerator { endo: String, generator: usize },
}

impl DocumentError {
    pub fn position(&self) -> Option<Position> {
        match self {
            DocumentError::Syntax { pos, .. }
            | DocumentError::UnknownLetter { pos, .. }
            | DocumentError::UnallowableWord { pos, .. }
            | DocumentError::Matrix { pos, .. }
            | DocumentError::DuplicateBlock { pos, .. } => Some(*pos),
            DocumentError::MissingGenerator { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub nu: Word,
    pub mu: Word,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoBlock {
    /// Empty for the unnamed endomorphism.
    pub name: String,
    /// `generators[i]` holds the terms of `t_{i+1}`.
    pub generators: Vec<Vec<Term>>,
}

impl EndoBlock {
    pub fn label(&self) -> &str {
        if self.name.is_empty() {
            "E"
        } else {
            &self.name
        }
    }

    pub fn raw_pairs(&self) -> Vec<Vec<(Word, Word)>> {
        self.generators.iter().map(|terms| terms.iter().map(|t| (t.nu.clone(), t.mu.clone())).collect()).collect()
    }

    pub fn from_endomorphism(name: &str, e: &GeometricEndomorphism) -> Self {
        let generators = e
            .matrix()
            .letters()
            .map(|i| {
                e.pairs(i)
                    .iter()
                    .map(|(nu, mu)| Term { nu: nu.clone(), mu: mu.clone(), pos: Position::default() })
                    .collect()
            })
            .collect();
        EndoBlock { name: name.to_string(), generators }
    }
}

#[derive(Debug, Clone)]
pub struct CkDocument {
    pub matrix: Arc<TransitionMatrix>,
    pub endomorphisms: Vec<EndoBlock>,
}

impl CkDocument {
    /// The named block, or the first one when `name` is `None`.
    pub fn endomorphism(&self, name: Option<&str>) -> Option<&EndoBlock> {
        match name {
            None => self.endomorphisms.first(),
            Some(n) => self.endomorphisms.iter().find(|b| b.name == n || (b.name.is_empty() && n == "E")),
        }
    }

    pub fn build(&self, block: &EndoBlock) -> Result<GeometricEndomorphism, EndoError> {
        GeometricEndomorphism::build(&self.matrix, block.raw_pairs(), None)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let n = self.matrix.n();
        let _ = writeln!(out, "n = {n}");
        let rows: Vec<String> = self
            .matrix
            .letters()
            .map(|i| self.matrix.letters().map(|j| if self.matrix.get(i, j) { '1' } else { '0' }).collect())
            .collect();
        let _ = writeln!(out, "A = {}", rows.join(" "));
        for block in &self.endomorphisms {
            out.push('\n');
            for (g, terms) in block.generators.iter().enumerate() {
                if block.name.is_empty() {
                    let _ = writeln!(out, "[t{}]", g + 1);
                } else {
                    let _ = writeln!(out, "[{}.t{}]", block.name, g + 1);
                }
                for t in terms {
                    let _ = writeln!(out, "{} <- {}", write_word(&t.nu), write_word(&t.mu));
                }
            }
        }
        out
    }
}

pub fn write_word(w: &Word) -> String {
    w.to_string()
}

struct Line<'a> {
    number: usize,
    /// Text with the comment removed, untrimmed.
    text: &'a str,
}

impl Line<'_> {
    fn pos(&self, byte: usize) -> Position {
        Position { line: self.number, column: self.text[..byte].chars().count() + 1 }
    }

    fn first_column(&self) -> usize {
        self.text.len() - self.text.trim_start().len()
    }

    fn syntax(&self, byte: usize, message: impl Into<String>) -> DocumentError {
        DocumentError::Syntax { pos: self.pos(byte), message: message.into() }
    }
}

/// Splits `key = value`, returning the value and its byte offset.
fn assignment<'a>(line: &Line<'a>, key: &str) -> Result<(&'a str, usize), DocumentError> {
    let start = line.first_column();
    let rest = &line.text[start..];
    let Some(after_key) = rest.strip_prefix(key) else {
        return Err(line.syntax(start, format!("expected `{key} = …`")));
    };
    let eq = after_key.trim_start();
    let Some(value) = eq.strip_prefix('=') else {
        return Err(line.syntax(line.text.len() - eq.len(), "expected `=`"));
    };
    let offset = line.text.len() - value.len();
    let lead = value.len() - value.trim_start().len();
    Ok((value.trim(), offset + lead))
}

fn parse_word(matrix: &TransitionMatrix, line: &Line<'_>, token: &str, offset: usize) -> Result<Word, DocumentError> {
    let n = matrix.n();
    if token.is_empty() {
        return Err(line.syntax(offset, "expected a word"));
    }
    if token == "e" {
        return Ok(Word::empty());
    }
    let mut parts: Vec<(usize, &str)> = Vec::new();
    if token.contains(',') || n > 9 {
        let mut at = offset;
        for piece in token.split(',') {
            parts.push((at, piece));
            at += piece.len() + 1;
        }
    } else {
        for (i, ch) in token.char_indices() {
            parts.push((offset + i, &token[i..i + ch.len_utf8()]));
        }
    }
    let mut letters = Vec::with_capacity(parts.len());
    for (at, piece) in parts {
        let value: usize = piece.trim().parse().map_err(|_| line.syntax(at, format!("`{piece}` is not a letter")))?;
        let letter = matrix.check_letter(value).map_err(|_| DocumentError::UnknownLetter {
            pos: line.pos(at),
            letter: value,
            n,
        })?;
        letters.push(letter as Letter);
    }
    let word = Word::new(letters);
    if !matrix.is_allowable(&word) {
        return Err(DocumentError::UnallowableWord { pos: line.pos(offset), word: word.to_string() });
    }
    Ok(word)
}

fn parse_matrix(n_line: &Line<'_>, a_line: &Line<'_>) -> Result<Arc<TransitionMatrix>, DocumentError> {
    let (n_text, n_at) = assignment(n_line, "n")?;
    let n: usize =
        n_text.parse().ok().filter(|&n| n > 0).ok_or_else(|| n_line.syntax(n_at, "n must be a positive integer"))?;
    let (rows_text, rows_at) = assignment(a_line, "A")?;
    let mut rows = Vec::with_capacity(n);
    let mut at = rows_at;
    for token in rows_text.split(' ') {
        if token.is_empty() {
            at += 1;
            continue;
        }
        if token.len() != n {
            return Err(a_line.syntax(at, format!("row `{token}` must have {n} entries")));
        }
        let mut row = Vec::with_capacity(n);
        for (i, ch) in token.char_indices() {
            match ch {
                '0' => row.push(0),
                '1' => row.push(1),
                _ => return Err(a_line.syntax(at + i, format!("`{ch}` is not 0 or 1"))),
            }
        }
        rows.push(row);
        at += token.len() + 1;
    }
    if rows.len() != n {
        return Err(a_line.syntax(rows_at, format!("expected {n} rows, found {}", rows.len())));
    }
    TransitionMatrix::new(&rows)
        .map(Arc::new)
        .map_err(|e| DocumentError::Matrix { pos: a_line.pos(rows_at), message: e.to_string() })
}

/// `name` and 1-based generator index of a block header.
fn parse_header(line: &Line<'_>, n: usize) -> Result<(String, usize), DocumentError> {
    let start = line.first_column();
    let trimmed = line.text.trim();
    let inner = trimmed
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| line.syntax(start, "malformed block header"))?;
    let (name, generator) = match inner.rsplit_once('.') {
        Some((name, g)) => (name, g),
        None => ("", inner),
    };
    if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '^') || name == "E" {
        return Err(line.syntax(start + 1, format!("invalid endomorphism name `{name}`")));
    }
    let index = generator
        .strip_prefix('t')
        .and_then(|d| d.parse::<usize>().ok())
        .ok_or_else(|| line.syntax(start + 1 + inner.len() - generator.len(), "expected a generator `tI`"))?;
    if index == 0 || index > n {
        return Err(DocumentError::UnknownLetter {
            pos: line.pos(start + 1 + inner.len() - generator.len()),
            letter: index,
            n,
        });
    }
    Ok((name.to_string(), index))
}

pub fn parse_document(text: &str) -> Result<CkDocument, DocumentError> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let text = raw.split('#').next().unwrap_or("");
        (!text.trim().is_empty()).then_some(Line { number: i + 1, text })
    });
    let eof = || DocumentError::Syntax {
        pos: Position { line: text.lines().count() + 1, column: 1 },
        message: "unexpected end of document".to_string(),
    };
    let n_line = lines.next().ok_or_else(eof)?;
    let a_line = lines.next().ok_or_else(eof)?;
    let matrix = parse_matrix(&n_line, &a_line)?;
    let n = matrix.n();

    let mut blocks: Vec<EndoBlock> = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    let mut seen: Vec<(String, usize)> = Vec::new();
    for line in lines {
        if line.text.trim_start().starts_with('[') {
            let (name, g) = parse_header(&line, n)?;
            if seen.contains(&(name.clone(), g)) {
                let label = if name.is_empty() { format!("t{g}") } else { format!("{name}.t{g}") };
                return Err(DocumentError::DuplicateBlock { pos: line.pos(line.first_column()), name: label });
            }
            seen.push((name.clone(), g));
            let b = match blocks.iter().position(|b| b.name == name) {
                Some(b) => b,
                None => {
                    blocks.push(EndoBlock { name, generators: vec![Vec::new(); n] });
                    blocks.len() - 1
                }
            };
            current = Some((b, g - 1));
            continue;
        }
        let Some((b, g)) = current else {
            return Err(line.syntax(line.first_column(), "term outside a block"));
        };
        let Some(arrow) = line.text.find("<-") else {
            return Err(line.syntax(line.first_column(), "expected `nu <- mu`"));
        };
        let left = &line.text[..arrow];
        let right = &line.text[arrow + 2..];
        let nu_at = left.len() - left.trim_start().len();
        let mu_at = arrow + 2 + right.len() - right.trim_start().len();
        if right.contains("<-") {
            return Err(line.syntax(arrow + 2 + right.find("<-").unwrap_or(0), "more than one `<-`"));
        }
        let nu = parse_word(&matrix, &line, left.trim(), nu_at)?;
        let mu = parse_word(&matrix, &line, right.trim(), mu_at)?;
        blocks[b].generators[g].push(Term { nu, mu, pos: line.pos(nu_at) });
    }
    for block in &blocks {
        if let Some(g) = block.generators.iter().position(Vec::is_empty) {
            return Err(DocumentError::MissingGenerator { endo: block.label().to_string(), generator: g + 1 });
        }
    }
    Ok(CkDocument { matrix, endomorphisms: blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAIN: &str = "n = 3\nA = 110 111 011\n[t1]\n1,1 <- 2,1\n1,2 <- 2,2\n2,3,3 <- 2,3\n2,3,2 <- 3,2\n2 <- 1\n[t2]\n3,2 <- e\n[t3]\n3,3 <- 3\n";

    #[test]
    fn main_example_parses() {
        let doc = parse_document(MAIN).unwrap();
        let block = doc.endomorphism(None).unwrap();
        assert_eq!(block.generators[0].len(), 5);
        let e = doc.build(block).unwrap();
        assert!(e.is_valid());
        assert_eq!(e.k(), 2);
    }

    #[test]
    fn digit_strings_and_comments() {
        let text = "# header\nn = 3\nA = 110 111 011  # rows\n\n[t1]\n11 <- 21\n12 <- 22\n233 <- 23\n232 <- 32\n2 <- 1\n[t2]\n32 <- e\n[t3]\n33 <- 3\n";
        let a = parse_document(text).unwrap();
        let b = parse_document(MAIN).unwrap();
        assert_eq!(a.endomorphisms[0].raw_pairs(), b.endomorphisms[0].raw_pairs());
    }

    #[test]
    fn letter_and_allowability_errors() {
        let bad = MAIN.replace("3,2 <- e", "1,4 <- e");
        assert!(matches!(
            parse_document(&bad),
            Err(DocumentError::UnknownLetter { letter: 4, pos: Position { line: 10, column: 3 }, .. })
        ));
        let bad = MAIN.replace("3,2 <- e", "1,3 <- e");
        assert!(matches!(
            parse_document(&bad),
            Err(DocumentError::UnallowableWord { pos: Position { line: 10, column: 1 }, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_document("n = 3\nA = 110 111\n").unwrap_err();
        assert_eq!(err.position(), Some(Position { line: 2, column: 5 }));
        let err = parse_document("n = 2\nA = 11 12\n").unwrap_err();
        assert_eq!(err.position(), Some(Position { line: 2, column: 9 }));
        let err = parse_document("n = 1\nA = 1\n1 <- 1\n").unwrap_err();
        assert!(matches!(err, DocumentError::Syntax { .. }));
        let err = parse_document("n = 1\nA = 1\n[t1]\n1 -> 1\n").unwrap_err();
        assert_eq!(err.position(), Some(Position { line: 4, column: 1 }));
        let err = parse_document("n = 2\nA = 11 11\n[t1]\n1 <- e\n").unwrap_err();
        assert_eq!(err, DocumentError::MissingGenerator { endo: "E".into(), generator: 2 });
    }

    #[test]
    fn named_blocks_round_trip() {
        let text = format!("{MAIN}[F.t1]\n1 <- e\n[F.t2]\n2 <- e\n[F.t3]\n3 <- e\n");
        let doc = parse_document(&text).unwrap();
        assert_eq!(doc.endomorphisms.len(), 2);
        assert_eq!(doc.endomorphism(Some("F")).unwrap().generators[2][0].nu, Word::from([3]));
        let again = parse_document(&doc.to_text()).unwrap();
        assert_eq!(again.to_text(), doc.to_text());
        for (a, b) in again.endomorphisms.iter().zip(&doc.endomorphisms) {
            assert_eq!(a.raw_pairs(), b.raw_pairs());
        }
    }
}
