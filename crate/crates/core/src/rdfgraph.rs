//! RDF terms, triples and graphs with N-Triples input and output.
//!
//! Only the datatype-free subset is supported: literals are plain strings with
//! no datatype or language tag.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Fixed vocabulary IRIs.
pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
    pub const OWL_DIFFERENT_FROM: &str = "http://www.w3.org/2002/07/owl#differentFrom";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
}

/// An IRI, a blank node (label stored without the `_:` prefix) or a literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(String),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term::Iri(s.into())
    }

    pub fn literal(s: impl Into<String>) -> Self {
        Term::Literal(s.into())
    }

    pub fn blank(s: impl Into<String>) -> Self {
        Term::Blank(s.into())
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => write!(f, "<{s}>"),
            Term::Blank(s) => write!(f, "_:{s}"),
            Term::Literal(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// A triple. The subject is an IRI or blank node and the predicate an IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Self {
        debug_assert!(!matches!(subject, Term::Literal(_)));
        Triple {
            subject,
            predicate: predicate.into(),
            object,
        }
    }

    fn sort_key(&self) -> (String, String, String) {
        (
            self.subject.to_string(),
            format!("<{}>", self.predicate),
            self.object.to_string(),
        )
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

/// A finite set of triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RdfGraph {
    triples: BTreeSet<Triple>,
}

impl RdfGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Triples whose predicate is `predicate`.
    pub fn with_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Triple> {
        self.triples.iter().filter(move |t| t.predicate == predicate)
    }

    /// Subjects `s` with a triple `(s, predicate, object)`.
    pub fn subjects_with<'a>(&'a self, predicate: &'a str, object: &'a Term) -> impl Iterator<Item = &'a Term> {
        self.with_predicate(predicate)
            .filter(move |t| &t.object == object)
            .map(|t| &t.subject)
    }
}

impl FromIterator<Triple> for RdfGraph {
    fn from_iter<T: IntoIterator<Item = Triple>>(iter: T) -> Self {
        RdfGraph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl Extend<Triple> for RdfGraph {
    fn extend<T: IntoIterator<Item = Triple>>(&mut self, iter: T) {
        self.triples.extend(iter)
    }
}

impl<'a> IntoIterator for &'a RdfGraph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

/// False exactly when the graph asserts that some term is different from
/// itself.
pub fn is_consistent(graph: &RdfGraph) -> bool {
    !graph
        .with_predicate(vocab::OWL_DIFFERENT_FROM)
        .any(|t| t.subject == t.object)
}

pub fn graph_contained(smaller: &RdfGraph, larger: &RdfGraph) -> bool {
    smaller.triples.is_subset(&larger.triples)
}

/// One triple per line, sorted by the serialized (subject, predicate, object).
pub fn serialize_ntriples(graph: &RdfGraph) -> String {
    let mut triples: Vec<&Triple> = graph.iter().collect();
    triples.sort_by_cached_key(|t| t.sort_key());
    let mut out = String::new();
    for t in triples {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct NTriplesError {
    pub line: usize,
    pub message: String,
}

struct LineCursor<'a> {
    rest: &'a str,
}

impl<'a> LineCursor<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn term(&mut self) -> Result<Term, String> {
        self.skip_ws();
        if let Some(body) = self.rest.strip_prefix('<') {
            let end = body.find('>').ok_or("unterminated IRI")?;
            let iri = &body[..end];
            if iri.is_empty() || iri.chars().any(|c| c.is_whitespace() || c == '<') {
                return Err(format!("invalid IRI <{iri}>"));
            }
            self.rest = &body[end + 1..];
            Ok(Term::Iri(iri.to_string()))
        } else if let Some(body) = self.rest.strip_prefix("_:") {
            let end = body.find([' ', '\t']).unwrap_or(body.len());
            if end == 0 {
                return Err("empty blank node label".into());
            }
            self.rest = &body[end..];
            Ok(Term::Blank(body[..end].to_string()))
        } else if let Some(body) = self.rest.strip_prefix('"') {
            let mut value = String::new();
            let mut chars = body.char_indices();
            loop {
                match chars.next() {
                    None => return Err("unterminated literal".into()),
                    Some((i, '"')) => {
                        self.rest = &body[i + 1..];
                        return Ok(Term::Literal(value));
                    }
                    Some((_, '\\')) => match chars.next() {
                        Some((_, '"')) => value.push('"'),
                        Some((_, '\\')) => value.push('\\'),
                        Some((_, 'n')) => value.push('\n'),
                        Some((_, 'r')) => value.push('\r'),
                        Some((_, 't')) => value.push('\t'),
                        _ => return Err("invalid escape in literal".into()),
                    },
                    Some((_, c)) => value.push(c),
                }
            }
        } else if self.rest.is_empty() {
            Err("unexpected end of line".into())
        } else {
            Err(format!("unexpected `{}`", self.rest.chars().next().unwrap_or(' ')))
        }
    }
}

/// Parses the N-Triples subset produced by [`serialize_ntriples`]. Blank
/// lines and `#` comment lines are ignored.
pub fn parse_ntriples(text: &str) -> Result<RdfGraph, NTriplesError> {
    let mut graph = RdfGraph::new();
    for (index, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| NTriplesError {
            line: index + 1,
            message,
        };
        let mut cursor = LineCursor { rest: trimmed };
        let subject = cursor.term().map_err(err)?;
        if matches!(subject, Term::Literal(_)) {
            return Err(err("literal in subject position".into()));
        }
        let predicate = match cursor.term().map_err(err)? {
            Term::Iri(p) => p,
            _ => return Err(err("predicate must be an IRI".into())),
        };
        let object = cursor.term().map_err(err)?;
        cursor.skip_ws();
        if cursor.rest != "." {
            return Err(err("expected `.` at end of triple".into()));
        }
        graph.insert(Triple::new(subject, predicate, object));
    }
    Ok(graph)
}
