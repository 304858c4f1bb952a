//! Relational schemas, PK/FK constraint sets and instances with NULLs.
//!
//! Values are plain strings drawn from an abstract domain plus the distinguished
//! [`Value::Null`] marker. Instances have set semantics: rows of one relation
//! never agree on every attribute. Each stored row still carries a tuple
//! identifier (`id1`, `id2`, ...) because the direct mapping needs one to label
//! blank nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A value of the domain, or NULL.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Null,
    Const(String),
}

impl Value {
    pub fn constant(text: impl Into<String>) -> Self {
        Value::Const(text.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Null => None,
            Value::Const(s) => Some(s),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            Value::Const(s) => f.write_str(s),
        }
    }
}

impl From<Option<String>> for Value {
    fn from(v: Option<String>) -> Self {
        v.map_or(Value::Null, Value::Const)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Const(v.to_string())
    }
}

/// A tuple as a total assignment from attribute names to values.
pub type Tuple = BTreeMap<String, Value>;

/// Characters that may not appear in relation or attribute names. They are the
/// separators of the IRI templates (plus `/` and characters an IRI cannot
/// carry), so forbidding them keeps IRI generation injective.
pub const RESERVED_NAME_CHARS: &[char] = &['#', ',', '=', '/', '<', '>', '"', '{', '}', '|', '^', '`', '\\'];

/// Characters that may not appear in a primary-key value used inside a row IRI.
pub const RESERVED_KEY_VALUE_CHARS: &[char] = &['#', ',', '=', '<', '>', '"', '{', '}', '|', '^', '`', '\\'];

/// Prefix reserved for compiler-generated SPARQL variables.
pub const FRESH_PREFIX: &str = "__fresh";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("relation `{0}` is declared twice")]
    DuplicateRelation(String),
    #[error("relation `{0}` has no attributes")]
    NoAttributes(String),
    #[error("attribute `{attribute}` is declared twice in relation `{relation}`")]
    DuplicateAttribute { relation: String, attribute: String },
    #[error("name `{0}` is empty or contains a reserved character")]
    ReservedName(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown attribute `{attribute}` in relation `{relation}`")]
    UnknownAttribute { relation: String, attribute: String },
    #[error("relation `{0}` has more than one primary key")]
    TwoPrimaryKeys(String),
    #[error("key on `{0}` has an empty attribute list")]
    EmptyKey(String),
    #[error("attribute `{attribute}` is repeated in a key of `{relation}`")]
    RepeatedKeyAttribute { relation: String, attribute: String },
    #[error("foreign key from `{relation}` to `{ref_relation}` has attribute lists of different length")]
    ForeignKeyArity { relation: String, ref_relation: String },
    #[error("tuple {index} of `{relation}` has {found} values, expected {expected}")]
    TupleArity {
        relation: String,
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("primary-key value `{value}` of `{relation}`.`{attribute}` contains a reserved character")]
    ReservedKeyValue {
        relation: String,
        attribute: String,
        value: String,
    },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// One relation symbol with its ordered attribute list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSchema {
    pub name: String,
    pub attributes: Vec<String>,
}

impl RelationSchema {
    pub fn new(name: impl Into<String>, attributes: &[&str]) -> Self {
        RelationSchema {
            name: name.into(),
            attributes: attributes.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn has_attribute(&self, attribute: &str) -> bool {
        self.attributes.iter().any(|a| a == attribute)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationalSchema {
    pub relations: Vec<RelationSchema>,
}

impl RelationalSchema {
    pub fn relation(&self, name: &str) -> Option<&RelationSchema> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(|r| r.name.as_str())
    }

    fn validate(&self) -> Result<(), SchemaError> {
        let mut seen = BTreeSet::new();
        for rel in &self.relations {
            check_name(&rel.name)?;
            if !seen.insert(rel.name.as_str()) {
                return Err(SchemaError::DuplicateRelation(rel.name.clone()));
            }
            if rel.attributes.is_empty() {
                return Err(SchemaError::NoAttributes(rel.name.clone()));
            }
            let mut attrs = BTreeSet::new();
            for a in &rel.attributes {
                check_name(a)?;
                if a.starts_with(FRESH_PREFIX) {
                    return Err(SchemaError::ReservedName(a.clone()));
                }
                if !attrs.insert(a.as_str()) {
                    return Err(SchemaError::DuplicateAttribute {
                        relation: rel.name.clone(),
                        attribute: a.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn check_name(name: &str) -> Result<(), SchemaError> {
    if name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || RESERVED_NAME_CHARS.contains(&c))
    {
        return Err(SchemaError::ReservedName(name.to_string()));
    }
    Ok(())
}

/// `R[A1, ..., Am]` declared as the primary key of `R`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimaryKey {
    pub relation: String,
    pub attributes: Vec<String>,
}

/// `R[A1, ..., Am] ⊆ S[B1, ..., Bm]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ForeignKey {
    pub relation: String,
    pub attributes: Vec<String>,
    pub ref_relation: String,
    pub ref_attributes: Vec<String>,
}

impl fmt::Display for PrimaryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PK {}[{}]", self.relation, self.attributes.join(","))
    }
}

impl fmt::Display for ForeignKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FK {}[{}] ⊆ {}[{}]",
            self.relation,
            self.attributes.join(","),
            self.ref_relation,
            self.ref_attributes.join(",")
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(default)]
    pub primary_keys: Vec<PrimaryKey>,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKey>,
}

impl ConstraintSet {
    pub fn primary_key(&self, relation: &str) -> Option<&PrimaryKey> {
        self.primary_keys.iter().find(|pk| pk.relation == relation)
    }

    /// The same set with every foreign key removed.
    pub fn keys_only(&self) -> ConstraintSet {
        ConstraintSet {
            primary_keys: self.primary_keys.clone(),
            foreign_keys: Vec::new(),
        }
    }

    fn validate(&self, schema: &RelationalSchema) -> Result<(), SchemaError> {
        let mut keyed = BTreeSet::new();
        for pk in &self.primary_keys {
            check_key_list(schema, &pk.relation, &pk.attributes)?;
            if !keyed.insert(pk.relation.as_str()) {
                return Err(SchemaError::TwoPrimaryKeys(pk.relation.clone()));
            }
        }
        for fk in &self.foreign_keys {
            check_key_list(schema, &fk.relation, &fk.attributes)?;
            check_key_list(schema, &fk.ref_relation, &fk.ref_attributes)?;
            if fk.attributes.len() != fk.ref_attributes.len() {
                return Err(SchemaError::ForeignKeyArity {
                    relation: fk.relation.clone(),
                    ref_relation: fk.ref_relation.clone(),
                });
            }
        }
        Ok(())
    }
}

fn check_key_list(schema: &RelationalSchema, relation: &str, attributes: &[String]) -> Result<(), SchemaError> {
    let rel = schema
        .relation(relation)
        .ok_or_else(|| SchemaError::UnknownRelation(relation.to_string()))?;
    if attributes.is_empty() {
        return Err(SchemaError::EmptyKey(relation.to_string()));
    }
    let mut seen = BTreeSet::new();
    for a in attributes {
        if !rel.has_attribute(a) {
            return Err(SchemaError::UnknownAttribute {
                relation: relation.to_string(),
                attribute: a.clone(),
            });
        }
        if !seen.insert(a.as_str()) {
            return Err(SchemaError::RepeatedKeyAttribute {
                relation: relation.to_string(),
                attribute: a.clone(),
            });
        }
    }
    Ok(())
}

/// A stored row: tuple identifier plus the values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleRow {
    pub id: String,
    pub values: Tuple,
}

impl TupleRow {
    pub fn get(&self, attribute: &str) -> &Value {
        self.values.get(attribute).unwrap_or(&Value::Null)
    }
}

/// Rows per relation name, in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    relations: BTreeMap<String, Vec<TupleRow>>,
}

impl Instance {
    /// An instance with every relation of `schema` present and empty.
    pub fn empty(schema: &RelationalSchema) -> Self {
        Instance {
            relations: schema.relations.iter().map(|r| (r.name.clone(), Vec::new())).collect(),
        }
    }

    pub fn rows(&self, relation: &str) -> &[TupleRow] {
        self.relations.get(relation).map_or(&[], Vec::as_slice)
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn total_rows(&self) -> usize {
        self.relations.values().map(Vec::len).sum()
    }

    /// Inserts a row under a fresh tuple identifier. Returns `false` (and
    /// stores nothing) when an identical value-row is already present.
    pub fn insert(&mut self, relation: &str, values: Tuple) -> bool {
        let rows = self.relations.entry(relation.to_string()).or_default();
        if rows.iter().any(|r| r.values == values) {
            return false;
        }
        let next = rows
            .iter()
            .filter_map(|r| r.id.strip_prefix("id").and_then(|n| n.parse::<usize>().ok()))
            .max()
            .unwrap_or(0)
            + 1;
        rows.push(TupleRow {
            id: format!("id{next}"),
            values,
        });
        true
    }

    /// Inserts a row keeping its identifier. Duplicate value-rows are dropped.
    pub fn insert_row(&mut self, relation: &str, row: TupleRow) -> bool {
        let rows = self.relations.entry(relation.to_string()).or_default();
        if rows.iter().any(|r| r.values == row.values) {
            return false;
        }
        rows.push(row);
        true
    }

    /// Keeps only the rows for which `keep` returns true; identifiers of the
    /// surviving rows are unchanged.
    pub fn retain(&mut self, mut keep: impl FnMut(&str, &TupleRow) -> bool) {
        for (name, rows) in self.relations.iter_mut() {
            rows.retain(|r| keep(name, r));
        }
    }

    pub fn remove_relation(&mut self, relation: &str) {
        self.relations.remove(relation);
    }

    /// The rows of `relation` as a set of value tuples (identifiers dropped).
    pub fn value_set(&self, relation: &str) -> BTreeSet<Tuple> {
        self.rows(relation).iter().map(|r| r.values.clone()).collect()
    }
}

/// `I1 ⊆ I2`: every value-row of every relation of `I1` occurs in `I2`.
pub fn instance_contained(smaller: &Instance, larger: &Instance) -> bool {
    smaller.relations.iter().all(|(name, rows)| {
        let other = larger.value_set(name);
        rows.iter().all(|r| other.contains(&r.values))
    })
}

/// Schema, constraints and instance together, plus the document's base IRI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    pub base: Option<String>,
    pub schema: RelationalSchema,
    pub constraints: ConstraintSet,
    pub instance: Instance,
}

/// Result of ingesting a document.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub database: Database,
    /// Value-rows dropped because an identical row was already present.
    pub duplicates_removed: usize,
}

impl Database {
    /// Validates the parts against each other and bundles them.
    pub fn new(schema: RelationalSchema, constraints: ConstraintSet, instance: Instance) -> Result<Self, SchemaError> {
        schema.validate()?;
        constraints.validate(&schema)?;
        for name in instance.relation_names() {
            let rel = schema
                .relation(name)
                .ok_or_else(|| SchemaError::UnknownRelation(name.to_string()))?;
            for (index, row) in instance.rows(name).iter().enumerate() {
                let keys: Vec<&String> = row.values.keys().collect();
                let mut expected: Vec<&String> = rel.attributes.iter().collect();
                expected.sort();
                if keys != expected {
                    return Err(SchemaError::TupleArity {
                        relation: name.to_string(),
                        index,
                        expected: rel.attributes.len(),
                        found: row.values.len(),
                    });
                }
            }
        }
        let mut instance = instance;
        for rel in &schema.relations {
            instance.relations.entry(rel.name.clone()).or_default();
        }
        let db = Database {
            base: None,
            schema,
            constraints,
            instance,
        };
        db.check_key_values()?;
        Ok(db)
    }

    pub fn with_base(mut self, base: impl Into<String>) -> Self {
        self.base = Some(base.into());
        self
    }

    fn check_key_values(&self) -> Result<(), SchemaError> {
        for pk in &self.constraints.primary_keys {
            for row in self.instance.rows(&pk.relation) {
                for a in &pk.attributes {
                    if let Value::Const(v) = row.get(a) {
                        if v.chars()
                            .any(|c| c.is_whitespace() || c.is_control() || RESERVED_KEY_VALUE_CHARS.contains(&c))
                        {
                            return Err(SchemaError::ReservedKeyValue {
                                relation: pk.relation.clone(),
                                attribute: a.clone(),
                                value: v.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes back into the JSON input format. Rows are written in
    /// identifier order, NULL as JSON `null`.
    pub fn to_json(&self) -> String {
        let doc = Document {
            base: self.base.clone(),
            relations: self
                .schema
                .relations
                .iter()
                .map(|rel| RelationDocument {
                    name: rel.name.clone(),
                    attributes: rel.attributes.clone(),
                    tuples: self
                        .instance
                        .rows(&rel.name)
                        .iter()
                        .map(|row| {
                            rel.attributes
                                .iter()
                                .map(|a| row.get(a).as_str().map(str::to_string))
                                .collect()
                        })
                        .collect(),
                    csv: None,
                })
                .collect(),
            constraints: self.constraints.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<String>,
    relations: Vec<RelationDocument>,
    #[serde(default)]
    constraints: ConstraintSet,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationDocument {
    name: String,
    attributes: Vec<String>,
    #[serde(default)]
    tuples: Vec<Vec<Option<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

/// Parses a database document in the JSON input format.
pub fn load_database(text: &str) -> Result<Loaded, SchemaError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| SchemaError::Malformed(e.to_string()))?;
    if doc.relations.iter().any(|r| r.csv.is_some()) {
        return Err(SchemaError::Malformed(
            "`csv` sources are only allowed in schema files loaded from disk".into(),
        ));
    }
    build(doc, |_| unreachable!())
}

/// Loads a database document from disk. Relations may name a CSV file
/// (relative to the document) instead of listing tuples inline; the CSV must
/// have a header row naming the attributes, and an empty field is NULL.
pub fn load_database_file(path: &Path) -> Result<Loaded, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let doc: Document = serde_json::from_str(&text).map_err(|e| SchemaError::Malformed(e.to_string()))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    build(doc, |rel| {
        read_csv(&dir.join(rel.csv.as_deref().unwrap_or_default()), rel)
    })
}

fn read_csv(path: &Path, rel: &RelationDocument) -> Result<Vec<Vec<Option<String>>>, SchemaError> {
    let io_err = |e: csv::Error| SchemaError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut reader = csv::Reader::from_path(path).map_err(io_err)?;
    let header: Vec<String> = reader.headers().map_err(io_err)?.iter().map(str::to_string).collect();
    if header != rel.attributes {
        return Err(SchemaError::Malformed(format!(
            "CSV header of `{}` is {:?}, expected {:?}",
            rel.name, header, rel.attributes
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(io_err)?;
        rows.push(
            record
                .iter()
                .map(|f| if f.is_empty() { None } else { Some(f.to_string()) })
                .collect(),
        );
    }
    Ok(rows)
}

fn build(
    doc: Document,
    csv_rows: impl Fn(&RelationDocument) -> Result<Vec<Vec<Option<String>>>, SchemaError>,
) -> Result<Loaded, SchemaError> {
    let schema = RelationalSchema {
        relations: doc
            .relations
            .iter()
            .map(|r| RelationSchema {
                name: r.name.clone(),
                attributes: r.attributes.clone(),
            })
            .collect(),
    };
    schema.validate()?;
    let mut instance = Instance::empty(&schema);
    let mut duplicates_removed = 0;
    for rel in &doc.relations {
        let tuples = if rel.csv.is_some() {
            if !rel.tuples.is_empty() {
                return Err(SchemaError::Malformed(format!(
                    "relation `{}` lists both tuples and a CSV source",
                    rel.name
                )));
            }
            csv_rows(rel)?
        } else {
            rel.tuples.clone()
        };
        for (index, values) in tuples.into_iter().enumerate() {
            if values.len() != rel.attributes.len() {
                return Err(SchemaError::TupleArity {
                    relation: rel.name.clone(),
                    index,
                    expected: rel.attributes.len(),
                    found: values.len(),
                });
            }
            let tuple: Tuple = rel
                .attributes
                .iter()
                .cloned()
                .zip(values.into_iter().map(Value::from))
                .collect();
            if !instance.insert(&rel.name, tuple) {
                duplicates_removed += 1;
            }
        }
    }
    let mut database = Database::new(schema, doc.constraints, instance)?;
    database.base = doc.base;
    Ok(Loaded {
        database,
        duplicates_removed,
    })
}

/// Which constraint a violation refers to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Constraint {
    PrimaryKey(PrimaryKey),
    ForeignKey(ForeignKey),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::PrimaryKey(pk) => pk.fmt(f),
            Constraint::ForeignKey(fk) => fk.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// A key column holds NULL.
    NullInKey { attribute: String },
    /// Two distinct rows agree on every key attribute.
    DuplicateKey,
    /// A referencing row has no NULL in the FK columns and no matching row.
    DanglingReference,
    /// The referenced attribute list does not satisfy the key condition.
    ReferencedNotKey { attribute: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub kind: ViolationKind,
    pub tuple_ids: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match &self.kind {
            ViolationKind::NullInKey { attribute } => format!("NULL in key column {attribute}"),
            ViolationKind::DuplicateKey => "duplicate key".to_string(),
            ViolationKind::DanglingReference => "dangling reference".to_string(),
            ViolationKind::ReferencedNotKey { attribute: Some(a) } => {
                format!("referenced column {a} holds NULL")
            }
            ViolationKind::ReferencedNotKey { attribute: None } => "referenced columns are not unique".to_string(),
        };
        write!(f, "{}: {} ({})", self.constraint, what, self.tuple_ids.join(", "))
    }
}

/// Outcome of [`satisfies`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated(Vec<Violation>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Key check on `relation[attributes]`: no NULL in the key columns and no two
/// distinct rows agreeing on all of them.
fn key_violation(instance: &Instance, relation: &str, attributes: &[String]) -> Option<(ViolationKind, Vec<String>)> {
    let rows = instance.rows(relation);
    for row in rows {
        if let Some(a) = attributes.iter().find(|a| row.get(a).is_null()) {
            return Some((ViolationKind::NullInKey { attribute: a.clone() }, vec![row.id.clone()]));
        }
    }
    let mut first_seen: BTreeMap<Vec<&Value>, &str> = BTreeMap::new();
    for row in rows {
        let key: Vec<&Value> = attributes.iter().map(|a| row.get(a)).collect();
        if let Some(prev) = first_seen.insert(key, &row.id) {
            return Some((ViolationKind::DuplicateKey, vec![prev.to_string(), row.id.clone()]));
        }
    }
    None
}

/// Decides `I ⊨ Σ`, reporting every violated constraint with a witness.
pub fn satisfies(instance: &Instance, constraints: &ConstraintSet) -> Verdict {
    let mut violations = Vec::new();
    for pk in &constraints.primary_keys {
        if let Some((kind, tuple_ids)) = key_violation(instance, &pk.relation, &pk.attributes) {
            violations.push(Violation {
                constraint: Constraint::PrimaryKey(pk.clone()),
                kind,
                tuple_ids,
            });
        }
    }
    for fk in &constraints.foreign_keys {
        if let Some((kind, tuple_ids)) = key_violation(instance, &fk.ref_relation, &fk.ref_attributes) {
            let attribute = match kind {
                ViolationKind::NullInKey { attribute } => Some(attribute),
                _ => None,
            };
            violations.push(Violation {
                constraint: Constraint::ForeignKey(fk.clone()),
                kind: ViolationKind::ReferencedNotKey { attribute },
                tuple_ids,
            });
            continue;
        }
        let targets: BTreeSet<Vec<&Value>> = instance
            .rows(&fk.ref_relation)
            .iter()
            .map(|r| fk.ref_attributes.iter().map(|b| r.get(b)).collect())
            .collect();
        let dangling: Vec<String> = instance
            .rows(&fk.relation)
            .iter()
            .filter(|row| {
                let vals: Vec<&Value> = fk.attributes.iter().map(|a| row.get(a)).collect();
                !vals.iter().any(|v| v.is_null()) && !targets.contains(&vals)
            })
            .map(|row| row.id.clone())
            .collect();
        if !dangling.is_empty() {
            violations.push(Violation {
                constraint: Constraint::ForeignKey(fk.clone()),
                kind: ViolationKind::DanglingReference,
                tuple_ids: dangling,
            });
        }
    }
    if violations.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Violated(violations)
    }
}
