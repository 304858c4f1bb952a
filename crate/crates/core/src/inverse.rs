//! Recovers a relational instance from the graph produced by the direct
//! mapping.
//!
//! Class declarations give relation names and datatype-property domains
//! give their attributes. Rows of a class are read back with a chain of
//! optional triple patterns, one per attribute. Object properties whose
//! IRI names a single relation before `#` come from binary relations; their
//! rows are read back by joining the link triples with the key literals on
//! both ends. Only instances are recovered, not constraints.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::rdfgraph::{vocab, RdfGraph, Term};
use crate::relmodel::{Instance, RelationSchema, RelationalSchema, Tuple, Value, FRESH_PREFIX};
use crate::sparql::{eval_pattern, GraphPattern, PatternTerm, SolutionMapping, SparqlError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InverseError {
    #[error("IRI `{0}` does not start with the base IRI")]
    OutsideBase(String),
    #[error("class IRI `{0}` is not a relation name")]
    MalformedClass(String),
    #[error("property `{0}` cannot be parsed")]
    MalformedProperty(String),
    #[error("property `{property}` has no {which} triple")]
    MissingTriple { property: String, which: &'static str },
    #[error("property `{property}` refers to `{relation}`, which is not a declared class")]
    UnknownClass { property: String, relation: String },
    #[error("relation `{0}` is declared twice")]
    DuplicateRelation(String),
    #[error("relation `{0}` has no attributes")]
    NoAttributes(String),
    #[error("query evaluation failed: {0}")]
    Query(#[from] SparqlError),
}

/// Turns a solution mapping into a tuple over `attributes`; unbound
/// variables become NULL.
pub fn tr_inverse(mu: &SolutionMapping, attributes: &[String]) -> Tuple {
    attributes
        .iter()
        .map(|a| {
            let value = match mu.get(&Var::new(a.clone())) {
                Some(Term::Literal(v)) => Value::Const(v.clone()),
                Some(other) => Value::Const(other.to_string()),
                None => Value::Null,
            };
            (a.clone(), value)
        })
        .collect()
}

fn local_name<'a>(iri: &'a str, base: &str) -> Result<&'a str, InverseError> {
    iri.strip_prefix(base)
        .ok_or_else(|| InverseError::OutsideBase(iri.to_string()))
}

fn object_iri<'a>(graph: &'a RdfGraph, subject: &str, predicate: &'a str) -> Option<&'a str> {
    graph
        .with_predicate(predicate)
        .find(|t| t.subject.as_iri() == Some(subject))
        .and_then(|t| t.object.as_iri())
}

fn iri_term(iri: &str) -> PatternTerm {
    PatternTerm::iri(iri)
}

fn var(name: &str) -> PatternTerm {
    PatternTerm::var(name)
}

/// Rows of a class: `SELECT {?A1..?An} (((?X type R) OPT (?X R#A1 ?A1)) OPT ...)`.
fn class_query(base: &str, relation: &str, attributes: &[String]) -> GraphPattern {
    let subject = format!("{FRESH_PREFIX}0");
    let mut pattern = GraphPattern::triple(
        var(&subject),
        iri_term(vocab::RDF_TYPE),
        iri_term(&format!("{base}{relation}")),
    );
    for a in attributes {
        pattern = pattern.opt(GraphPattern::triple(
            var(&subject),
            iri_term(&format!("{base}{relation}#{a}")),
            var(a),
        ));
    }
    GraphPattern::select(attributes.iter().map(|a| Var::new(a.clone())).collect(), pattern)
}

struct Link {
    relation: String,
    attributes: [String; 2],
    property: String,
    source: String,
    source_attr: String,
    target: String,
    target_attr: String,
}

/// Rows of a binary relation:
/// `SELECT {?A, ?B} ((?T1 p ?T2) AND (?T1 S#C ?A) AND (?T2 T#D ?B))`.
fn link_query(base: &str, link: &Link) -> GraphPattern {
    let (t1, t2) = (format!("{FRESH_PREFIX}0"), format!("{FRESH_PREFIX}1"));
    let [a, b] = &link.attributes;
    let pattern = GraphPattern::triple(var(&t1), iri_term(&link.property), var(&t2))
        .and(GraphPattern::triple(
            var(&t1),
            iri_term(&format!("{base}{}#{}", link.source, link.source_attr)),
            var(a),
        ))
        .and(GraphPattern::triple(
            var(&t2),
            iri_term(&format!("{base}{}#{}", link.target, link.target_attr)),
            var(b),
        ));
    GraphPattern::select(vec![Var::new(a.clone()), Var::new(b.clone())], pattern)
}

fn parse_link(graph: &RdfGraph, base: &str, property: &str) -> Result<Option<Link>, InverseError> {
    let local = local_name(property, base)?;
    let malformed = || InverseError::MalformedProperty(property.to_string());
    let (head, tail) = local.split_once('#').ok_or_else(malformed)?;
    if head.contains(',') {
        // Foreign-key property: carries no rows of its own.
        return Ok(None);
    }
    let parts: Vec<&str> = tail.split(',').collect();
    let [a, b, c, d] = parts.as_slice() else {
        return Err(malformed());
    };
    if [head, a, b, c, d].iter().any(|p| p.is_empty()) || a == b {
        return Err(malformed());
    }
    let endpoint = |predicate, which| {
        let iri = object_iri(graph, property, predicate).ok_or(InverseError::MissingTriple {
            property: property.to_string(),
            which,
        })?;
        local_name(iri, base).map(str::to_string)
    };
    Ok(Some(Link {
        relation: head.to_string(),
        attributes: [a.to_string(), b.to_string()],
        property: property.to_string(),
        source: endpoint(vocab::RDFS_DOMAIN, "domain")?,
        source_attr: c.to_string(),
        target: endpoint(vocab::RDFS_RANGE, "range")?,
        target_attr: d.to_string(),
    }))
}

/// Recovers the schema (names and attributes, attributes sorted) and the
/// instance from a direct-mapping image. Tuple ids are freshly assigned.
pub fn recover_database(graph: &RdfGraph, base: &str) -> Result<(RelationalSchema, Instance), InverseError> {
    // Classes and their attributes.
    let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for iri in graph.subjects_with(vocab::RDF_TYPE, &Term::iri(vocab::OWL_CLASS)) {
        let iri = iri
            .as_iri()
            .ok_or_else(|| InverseError::MalformedClass(iri.to_string()))?;
        let name = local_name(iri, base)?;
        if name.is_empty() || name.contains(['#', ',']) {
            return Err(InverseError::MalformedClass(iri.to_string()));
        }
        classes.insert(name.to_string(), BTreeSet::new());
    }
    for p in graph.subjects_with(vocab::RDF_TYPE, &Term::iri(vocab::OWL_DATATYPE_PROPERTY)) {
        let p = p
            .as_iri()
            .ok_or_else(|| InverseError::MalformedProperty(p.to_string()))?;
        let domain = object_iri(graph, p, vocab::RDFS_DOMAIN).ok_or(InverseError::MissingTriple {
            property: p.to_string(),
            which: "domain",
        })?;
        let relation = local_name(domain, base)?;
        let attribute = local_name(p, base)?
            .strip_prefix(relation)
            .and_then(|rest| rest.strip_prefix('#'))
            .filter(|a| !a.is_empty() && !a.contains(['#', ',']))
            .ok_or_else(|| InverseError::MalformedProperty(p.to_string()))?;
        classes
            .get_mut(relation)
            .ok_or_else(|| InverseError::UnknownClass {
                property: p.to_string(),
                relation: relation.to_string(),
            })?
            .insert(attribute.to_string());
    }

    // Binary relations.
    let mut links = Vec::new();
    for p in graph.subjects_with(vocab::RDF_TYPE, &Term::iri(vocab::OWL_OBJECT_PROPERTY)) {
        let p = p
            .as_iri()
            .ok_or_else(|| InverseError::MalformedProperty(p.to_string()))?;
        if let Some(link) = parse_link(graph, base, p)? {
            for end in [&link.source, &link.target] {
                if !classes.contains_key(end) {
                    return Err(InverseError::UnknownClass {
                        property: p.to_string(),
                        relation: end.clone(),
                    });
                }
            }
            if classes.contains_key(&link.relation) || links.iter().any(|l: &Link| l.relation == link.relation) {
                return Err(InverseError::DuplicateRelation(link.relation));
            }
            links.push(link);
        }
    }

    let mut schema = RelationalSchema::default();
    for (name, attributes) in &classes {
        if attributes.is_empty() {
            return Err(InverseError::NoAttributes(name.clone()));
        }
        schema.relations.push(RelationSchema {
            name: name.clone(),
            attributes: attributes.iter().cloned().collect(),
        });
    }
    for link in &links {
        schema.relations.push(RelationSchema {
            name: link.relation.clone(),
            attributes: link.attributes.to_vec(),
        });
    }

    let mut instance = Instance::empty(&schema);
    for rel in &schema.relations {
        let query = match links.iter().find(|l| l.relation == rel.name) {
            Some(link) => link_query(base, link),
            None => class_query(base, &rel.name, &rel.attributes),
        };
        for mu in eval_pattern(&query, graph)? {
            instance.insert(&rel.name, tr_inverse(&mu, &rel.attributes));
        }
    }
    Ok((schema, instance))
}
