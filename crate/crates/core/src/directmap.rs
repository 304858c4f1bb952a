//! The direct mappings `DM`, `DM_pk` and `DM_pk+fk`.
//!
//! Mapping happens in two phases. [`extract_ontology`] classifies relations
//! into classes and binary relations (many-to-many link tables) and derives
//! object and datatype properties from the schema and constraints. Then
//! [`direct_map`] emits schema triples, one type triple per class row,
//! reference triples along foreign keys and binary relations, and literal
//! triples for non-NULL values. The two stricter variants add the reflexive
//! `owl:differentFrom` triple when a key or foreign key is violated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::rdfgraph::{vocab, RdfGraph, Term, Triple};
use crate::relmodel::{
    ConstraintSet, Database, ForeignKey, RelationalSchema, TupleRow, Value, RESERVED_KEY_VALUE_CHARS,
    RESERVED_NAME_CHARS,
};

/// Which mapping to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Variant {
    /// Plain mapping; ignores constraint violations.
    Dm,
    /// Adds the violation triple for primary-key violations.
    DmPk,
    /// Adds the violation triple for primary- and foreign-key violations.
    DmPkFk,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Dm, Variant::DmPk, Variant::DmPkFk];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Dm => "dm",
            Variant::DmPk => "dm-pk",
            Variant::DmPkFk => "dm-pk-fk",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dm" => Ok(Variant::Dm),
            "dm-pk" => Ok(Variant::DmPk),
            "dm-pk-fk" => Ok(Variant::DmPkFk),
            other => Err(format!("unknown variant `{other}` (expected dm, dm-pk or dm-pk-fk)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingConfig {
    pub base: String,
    pub variant: Variant,
    /// Subject and object of the violation triple.
    pub violation_iri: String,
}

impl MappingConfig {
    pub fn new(base: impl Into<String>, variant: Variant) -> Self {
        let base = base.into();
        MappingConfig {
            violation_iri: format!("{base}violation"),
            base,
            variant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("base IRI is empty")]
    EmptyBase,
    #[error("`{0}` cannot be used in an IRI: it is empty or contains a reserved character")]
    ReservedCharacter(String),
    #[error("relation `{0}` is not in the ontology")]
    UnknownRelation(String),
}

/// `R(A, B)` linking `S` and `T`: `A` references `S.C` and `B` references `T.D`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BinaryRelation {
    pub relation: String,
    pub attr_a: String,
    pub attr_b: String,
    pub source: String,
    pub source_attr: String,
    pub target: String,
    pub target_attr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PropertyOrigin {
    ForeignKey,
    /// Generated by the named binary relation.
    BinaryRelation(String),
}

/// An object property from `source` to `target`. For a foreign key,
/// `attributes` reference `referenced` position by position. For a binary
/// relation `R(A, B)`, `attributes` is `[A, B]` and `referenced` is `[C, D]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ObjectProperty {
    pub attributes: Vec<String>,
    pub referenced: Vec<String>,
    pub source: String,
    pub target: String,
    pub origin: PropertyOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DatatypeProperty {
    pub attribute: String,
    pub relation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OntologyModel {
    pub classes: BTreeSet<String>,
    pub binary_relations: BTreeSet<BinaryRelation>,
    pub object_properties: BTreeSet<ObjectProperty>,
    pub datatype_properties: BTreeSet<DatatypeProperty>,
}

impl OntologyModel {
    pub fn binary_relation(&self, relation: &str) -> Option<&BinaryRelation> {
        self.binary_relations.iter().find(|b| b.relation == relation)
    }

    pub fn is_class(&self, relation: &str) -> bool {
        self.classes.contains(relation)
    }
}

fn single_attribute_fks<'a>(
    constraints: &'a ConstraintSet,
    relation: &'a str,
    attribute: &'a str,
) -> impl Iterator<Item = &'a ForeignKey> {
    constraints
        .foreign_keys
        .iter()
        .filter(move |fk| fk.relation == relation && fk.attributes == [attribute])
}

/// `TwoFKfrom`: the attribute belongs to two distinct single-attribute FKs.
fn in_two_foreign_keys(constraints: &ConstraintSet, relation: &str, attribute: &str) -> bool {
    let targets: BTreeSet<(&str, &[String])> = single_attribute_fks(constraints, relation, attribute)
        .map(|fk| (fk.ref_relation.as_str(), fk.ref_attributes.as_slice()))
        .collect();
    targets.len() > 1
}

fn binary_relation_of(
    schema: &RelationalSchema,
    constraints: &ConstraintSet,
    relation: &str,
) -> Option<BinaryRelation> {
    let rel = schema.relation(relation)?;
    let pk = constraints.primary_key(relation)?;
    let [a, b] = pk.attributes.as_slice() else {
        return None;
    };
    if rel.attributes.len() != 2 {
        return None;
    }
    if in_two_foreign_keys(constraints, relation, a) || in_two_foreign_keys(constraints, relation, b) {
        return None;
    }
    let composite = constraints.foreign_keys.iter().any(|fk| {
        fk.relation == relation && (fk.attributes == [a.clone(), b.clone()] || fk.attributes == [b.clone(), a.clone()])
    });
    let incoming = constraints.foreign_keys.iter().any(|fk| fk.ref_relation == relation);
    if composite || incoming {
        return None;
    }
    let fk_a = single_attribute_fks(constraints, relation, a).find(|fk| fk.ref_relation != relation)?;
    let fk_b = single_attribute_fks(constraints, relation, b).find(|fk| fk.ref_relation != relation)?;
    Some(BinaryRelation {
        relation: relation.to_string(),
        attr_a: a.clone(),
        attr_b: b.clone(),
        source: fk_a.ref_relation.clone(),
        source_attr: fk_a.ref_attributes[0].clone(),
        target: fk_b.ref_relation.clone(),
        target_attr: fk_b.ref_attributes[0].clone(),
    })
}

/// Classifies the schema: binary relations, classes, object and datatype
/// properties.
pub fn extract_ontology(schema: &RelationalSchema, constraints: &ConstraintSet) -> OntologyModel {
    let mut model = OntologyModel::default();
    for rel in &schema.relations {
        match binary_relation_of(schema, constraints, &rel.name) {
            Some(b) => {
                model.object_properties.insert(ObjectProperty {
                    attributes: vec![b.attr_a.clone(), b.attr_b.clone()],
                    referenced: vec![b.source_attr.clone(), b.target_attr.clone()],
                    source: b.source.clone(),
                    target: b.target.clone(),
                    origin: PropertyOrigin::BinaryRelation(b.relation.clone()),
                });
                model.binary_relations.insert(b);
            }
            None => {
                model.classes.insert(rel.name.clone());
                for a in &rel.attributes {
                    model.datatype_properties.insert(DatatypeProperty {
                        attribute: a.clone(),
                        relation: rel.name.clone(),
                    });
                }
            }
        }
    }
    for fk in &constraints.foreign_keys {
        if model.is_class(&fk.relation) {
            model.object_properties.insert(ObjectProperty {
                attributes: fk.attributes.clone(),
                referenced: fk.ref_attributes.clone(),
                source: fk.relation.clone(),
                target: fk.ref_relation.clone(),
                origin: PropertyOrigin::ForeignKey,
            });
        }
    }
    model
}

/// The IRI templates.
#[derive(Debug, Clone, Copy)]
pub enum IriTemplate<'a> {
    /// `base R`
    Class { relation: &'a str },
    /// `base R#A`
    Datatype { relation: &'a str, attribute: &'a str },
    /// `base R#A,B,C,D`
    BinaryRelation(&'a BinaryRelation),
    /// `base S,T#X1,...,Xn,Y1,...,Yn`
    ForeignKey {
        source: &'a str,
        target: &'a str,
        attributes: &'a [String],
        referenced: &'a [String],
    },
    /// `base R#A1=V1,...,An=Vn`
    Row {
        relation: &'a str,
        key: &'a [(&'a str, &'a str)],
    },
}

fn name_part(s: &str) -> Result<&str, MappingError> {
    if s.is_empty()
        || s.chars()
            .any(|c| c.is_whitespace() || c.is_control() || RESERVED_NAME_CHARS.contains(&c))
    {
        return Err(MappingError::ReservedCharacter(s.to_string()));
    }
    Ok(s)
}

fn value_part(s: &str) -> Result<&str, MappingError> {
    if s.chars()
        .any(|c| c.is_whitespace() || c.is_control() || RESERVED_KEY_VALUE_CHARS.contains(&c))
    {
        return Err(MappingError::ReservedCharacter(s.to_string()));
    }
    Ok(s)
}

fn joined(parts: &[String]) -> Result<String, MappingError> {
    let checked: Result<Vec<&str>, _> = parts.iter().map(|p| name_part(p)).collect();
    Ok(checked?.join(","))
}

/// Builds an IRI from its template. Components that would make the result
/// ambiguous (separators, whitespace, characters an IRI cannot hold) are
/// rejected.
pub fn generate_iri(template: IriTemplate<'_>, base: &str) -> Result<String, MappingError> {
    if base.is_empty() {
        return Err(MappingError::EmptyBase);
    }
    Ok(match template {
        IriTemplate::Class { relation } => format!("{base}{}", name_part(relation)?),
        IriTemplate::Datatype { relation, attribute } => {
            format!("{base}{}#{}", name_part(relation)?, name_part(attribute)?)
        }
        IriTemplate::BinaryRelation(b) => format!(
            "{base}{}#{},{},{},{}",
            name_part(&b.relation)?,
            name_part(&b.attr_a)?,
            name_part(&b.attr_b)?,
            name_part(&b.source_attr)?,
            name_part(&b.target_attr)?
        ),
        IriTemplate::ForeignKey {
            source,
            target,
            attributes,
            referenced,
        } => format!(
            "{base}{},{}#{},{}",
            name_part(source)?,
            name_part(target)?,
            joined(attributes)?,
            joined(referenced)?
        ),
        IriTemplate::Row { relation, key } => {
            let mut parts = Vec::with_capacity(key.len());
            for (a, v) in key {
                parts.push(format!("{}={}", name_part(a)?, value_part(v)?));
            }
            format!("{base}{}#{}", name_part(relation)?, parts.join(","))
        }
    })
}

/// IRI of an object property.
pub fn object_property_iri(op: &ObjectProperty, base: &str) -> Result<String, MappingError> {
    match &op.origin {
        PropertyOrigin::BinaryRelation(r) => generate_iri(
            IriTemplate::BinaryRelation(&BinaryRelation {
                relation: r.clone(),
                attr_a: op.attributes[0].clone(),
                attr_b: op.attributes[1].clone(),
                source: op.source.clone(),
                source_attr: op.referenced[0].clone(),
                target: op.target.clone(),
                target_attr: op.referenced[1].clone(),
            }),
            base,
        ),
        PropertyOrigin::ForeignKey => generate_iri(
            IriTemplate::ForeignKey {
                source: &op.source,
                target: &op.target,
                attributes: &op.attributes,
                referenced: &op.referenced,
            },
            base,
        ),
    }
}

/// Identifier of a row: the row IRI built from its primary key, or a blank
/// node labelled by relation name and tuple id when the relation has no key.
/// A NULL key value also yields the blank node (only reachable on instances
/// violating the key).
pub fn tuple_identifier(
    row: &TupleRow,
    relation: &str,
    constraints: &ConstraintSet,
    base: &str,
) -> Result<Term, MappingError> {
    let blank = || Term::Blank(format!("{relation}{}", row.id));
    let Some(pk) = constraints.primary_key(relation) else {
        return Ok(blank());
    };
    let mut key = Vec::with_capacity(pk.attributes.len());
    for a in &pk.attributes {
        match row.get(a) {
            Value::Const(v) => key.push((a.as_str(), v.as_str())),
            Value::Null => return Ok(blank()),
        }
    }
    generate_iri(IriTemplate::Row { relation, key: &key }, base).map(Term::Iri)
}

/// The rule that produced a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    ClassDeclaration,
    ObjectPropertyDeclaration,
    ObjectPropertyDomain,
    ObjectPropertyRange,
    DatatypePropertyDeclaration,
    DatatypePropertyDomain,
    TableTriple,
    BinaryRelationReference,
    ForeignKeyReference,
    LiteralTriple,
    KeyViolation,
    ForeignKeyViolation,
}

impl Rule {
    pub fn is_schema(self) -> bool {
        matches!(
            self,
            Rule::ClassDeclaration
                | Rule::ObjectPropertyDeclaration
                | Rule::ObjectPropertyDomain
                | Rule::ObjectPropertyRange
                | Rule::DatatypePropertyDeclaration
                | Rule::DatatypePropertyDomain
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Every (triple, rule) derivation of a mapping run. A triple derived by
/// several rules, or several times, is listed once per rule.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub derivations: BTreeSet<(Triple, Rule)>,
}

impl Trace {
    /// One `Rule<TAB>triple` line per derivation.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self.derivations.iter().map(|(t, r)| format!("{r}\t{t}")).collect();
        lines.sort();
        lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

struct Emitter {
    graph: RdfGraph,
    trace: Option<Trace>,
}

impl Emitter {
    fn emit(&mut self, rule: Rule, subject: Term, predicate: &str, object: Term) {
        let triple = Triple::new(subject, predicate, object);
        if let Some(trace) = &mut self.trace {
            trace.derivations.insert((triple.clone(), rule));
        }
        self.graph.insert(triple);
    }
}

/// Maps a database to an RDF graph.
pub fn direct_map(db: &Database, config: &MappingConfig) -> Result<RdfGraph, MappingError> {
    run(db, config, false).map(|(g, _)| g)
}

/// Like [`direct_map`], also recording which rule produced each triple.
pub fn direct_map_traced(db: &Database, config: &MappingConfig) -> Result<(RdfGraph, Trace), MappingError> {
    run(db, config, true).map(|(g, t)| (g, t.unwrap_or_default()))
}

fn run(db: &Database, config: &MappingConfig, traced: bool) -> Result<(RdfGraph, Option<Trace>), MappingError> {
    let base = config.base.as_str();
    if base.is_empty() {
        return Err(MappingError::EmptyBase);
    }
    let model = extract_ontology(&db.schema, &db.constraints);
    let mut out = Emitter {
        graph: RdfGraph::new(),
        trace: traced.then(Trace::default),
    };
    let class_iri = |r: &str| generate_iri(IriTemplate::Class { relation: r }, base).map(Term::Iri);
    let rdf_type = vocab::RDF_TYPE;

    // Schema triples.
    for c in &model.classes {
        out.emit(
            Rule::ClassDeclaration,
            class_iri(c)?,
            rdf_type,
            Term::iri(vocab::OWL_CLASS),
        );
    }
    for op in &model.object_properties {
        let iri = Term::Iri(object_property_iri(op, base)?);
        out.emit(
            Rule::ObjectPropertyDeclaration,
            iri.clone(),
            rdf_type,
            Term::iri(vocab::OWL_OBJECT_PROPERTY),
        );
        out.emit(
            Rule::ObjectPropertyDomain,
            iri.clone(),
            vocab::RDFS_DOMAIN,
            class_iri(&op.source)?,
        );
        out.emit(
            Rule::ObjectPropertyRange,
            iri,
            vocab::RDFS_RANGE,
            class_iri(&op.target)?,
        );
    }
    let mut dtp_iris = BTreeMap::new();
    for dtp in &model.datatype_properties {
        let iri = generate_iri(
            IriTemplate::Datatype {
                relation: &dtp.relation,
                attribute: &dtp.attribute,
            },
            base,
        )?;
        out.emit(
            Rule::DatatypePropertyDeclaration,
            Term::iri(iri.clone()),
            rdf_type,
            Term::iri(vocab::OWL_DATATYPE_PROPERTY),
        );
        out.emit(
            Rule::DatatypePropertyDomain,
            Term::iri(iri.clone()),
            vocab::RDFS_DOMAIN,
            class_iri(&dtp.relation)?,
        );
        dtp_iris.insert((dtp.relation.as_str(), dtp.attribute.as_str()), iri);
    }

    // Row identifiers of class relations.
    let mut ids: BTreeMap<(&str, &str), Term> = BTreeMap::new();
    for c in &model.classes {
        for row in db.instance.rows(c) {
            ids.insert(
                (c.as_str(), row.id.as_str()),
                tuple_identifier(row, c, &db.constraints, base)?,
            );
        }
    }
    let id_of = |relation: &str, row: &TupleRow| ids.get(&(relation, row.id.as_str())).cloned();

    // Table and literal triples.
    for c in &model.classes {
        let class = class_iri(c)?;
        let attributes = &db
            .schema
            .relation(c)
            .ok_or_else(|| MappingError::UnknownRelation(c.clone()))?
            .attributes;
        for row in db.instance.rows(c) {
            let Some(subject) = id_of(c, row) else { continue };
            out.emit(Rule::TableTriple, subject.clone(), rdf_type, class.clone());
            for a in attributes {
                if let Value::Const(v) = row.get(a) {
                    out.emit(
                        Rule::LiteralTriple,
                        subject.clone(),
                        &dtp_iris[&(c.as_str(), a.as_str())],
                        Term::literal(v.clone()),
                    );
                }
            }
        }
    }

    // Reference triples. Joins never match NULL.
    for op in &model.object_properties {
        let predicate = object_property_iri(op, base)?;
        match &op.origin {
            PropertyOrigin::BinaryRelation(r) => {
                for link in db.instance.rows(r) {
                    let (Value::Const(va), Value::Const(vb)) =
                        (link.get(&op.attributes[0]), link.get(&op.attributes[1]))
                    else {
                        continue;
                    };
                    for s in db.instance.rows(&op.source) {
                        if s.get(&op.referenced[0]).as_str() != Some(va) {
                            continue;
                        }
                        for t in db.instance.rows(&op.target) {
                            if t.get(&op.referenced[1]).as_str() != Some(vb) {
                                continue;
                            }
                            if let (Some(u), Some(w)) = (id_of(&op.source, s), id_of(&op.target, t)) {
                                out.emit(Rule::BinaryRelationReference, u, &predicate, w);
                            }
                        }
                    }
                }
            }
            PropertyOrigin::ForeignKey => {
                for s in db.instance.rows(&op.source) {
                    let values: Vec<&Value> = op.attributes.iter().map(|a| s.get(a)).collect();
                    if values.iter().any(|v| v.is_null()) {
                        continue;
                    }
                    for t in db.instance.rows(&op.target) {
                        let matches = op.referenced.iter().zip(&values).all(|(b, v)| t.get(b) == *v);
                        if !matches {
                            continue;
                        }
                        if let (Some(u), Some(w)) = (id_of(&op.source, s), id_of(&op.target, t)) {
                            out.emit(Rule::ForeignKeyReference, u, &predicate, w);
                        }
                    }
                }
            }
        }
    }

    // Violation triples.
    let violation = || Term::iri(config.violation_iri.clone());
    if config.variant != Variant::Dm && key_violated(db) {
        out.emit(Rule::KeyViolation, violation(), vocab::OWL_DIFFERENT_FROM, violation());
    }
    if config.variant == Variant::DmPkFk && foreign_key_violated(db) {
        out.emit(
            Rule::ForeignKeyViolation,
            violation(),
            vocab::OWL_DIFFERENT_FROM,
            violation(),
        );
    }
    Ok((out.graph, out.trace))
}

/// Some key column holds NULL, or two rows with distinct ids share a key.
fn key_violated(db: &Database) -> bool {
    db.constraints.primary_keys.iter().any(|pk| {
        let rows = db.instance.rows(&pk.relation);
        let has_null = rows.iter().any(|r| pk.attributes.iter().any(|a| r.get(a).is_null()));
        let mut seen: BTreeMap<Vec<&Value>, &str> = BTreeMap::new();
        let duplicate = rows.iter().any(|r| {
            let key = pk.attributes.iter().map(|a| r.get(a)).collect();
            matches!(seen.insert(key, &r.id), Some(prev) if prev != r.id)
        });
        has_null || duplicate
    })
}

/// Some referencing row has no NULL in the FK columns and no row of the
/// referenced relation carries the same values.
fn foreign_key_violated(db: &Database) -> bool {
    db.constraints.foreign_keys.iter().any(|fk| {
        let present: BTreeSet<Vec<&Value>> = db
            .instance
            .rows(&fk.ref_relation)
            .iter()
            .map(|t| fk.ref_attributes.iter().map(|b| t.get(b)).collect())
            .collect();
        db.instance.rows(&fk.relation).iter().any(|s| {
            let values: Vec<&Value> = fk.attributes.iter().map(|a| s.get(a)).collect();
            values.iter().all(|v| !v.is_null()) && !present.contains(&values)
        })
    })
}
