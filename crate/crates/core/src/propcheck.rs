//! Seeded random databases and queries, and the four property checks run
//! over them: information preservation, query preservation, monotonicity
//! and semantics preservation.
//!
//! Everything is deterministic in the seed. A failing trial is shrunk by
//! deleting rows, then whole relations, while the failure persists.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::directmap::{direct_map, extract_ontology, MappingConfig, Variant};
use crate::inverse::recover_database;
use crate::ra2sparql::{tr, Case, Translator};
use crate::rdfgraph::{graph_contained, is_consistent, RdfGraph};
use crate::relalg::{eval, Condition, RaExpr};
use crate::relmodel::{
    satisfies, ConstraintSet, Database, ForeignKey, Instance, PrimaryKey, RelationSchema, RelationalSchema, Tuple,
    Value,
};
use crate::sparql::{eval_pattern, is_non_parametric, Solutions};
use crate::DEFAULT_BASE;

/// Values are drawn from this small pool so that joins and key clashes
/// happen often.
const VALUE_POOL: &[&str] = &["1", "2", "3", "4", "a", "b"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorParams {
    pub seed: u64,
    pub max_relations: usize,
    pub max_attributes: usize,
    pub max_rows: usize,
    pub null_probability: f64,
    pub pk_probability: f64,
    /// Chance that a relation gets a foreign key to a given earlier relation.
    pub fk_density: f64,
    /// Chance that a relation is generated as a two-attribute link table.
    pub link_probability: f64,
    /// Only keep rows that leave the constraints satisfied.
    pub satisfying: bool,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 0,
            max_relations: 5,
            max_attributes: 5,
            max_rows: 8,
            null_probability: 0.2,
            pk_probability: 0.7,
            fk_density: 0.4,
            link_probability: 0.25,
            satisfying: true,
        }
    }
}

impl GeneratorParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("null probability", self.null_probability),
            ("PK probability", self.pk_probability),
            ("FK density", self.fk_density),
            ("link probability", self.link_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.max_relations == 0 || self.max_attributes == 0 {
            return Err("at least one relation with one attribute is needed".into());
        }
        Ok(())
    }
}

fn attribute_pool(max_attributes: usize) -> Vec<String> {
    (0..max_attributes.max(5) + 2)
        .map(|i| {
            let letter = (b'A' + (i % 26) as u8) as char;
            if i < 26 {
                letter.to_string()
            } else {
                format!("{letter}{}", i / 26)
            }
        })
        .collect()
}

fn random_value(rng: &mut impl Rng, null_probability: f64) -> Value {
    if rng.gen_bool(null_probability) {
        Value::Null
    } else {
        Value::constant(*VALUE_POOL.choose(rng).expect("non-empty pool"))
    }
}

/// Generates a schema, constraints and instance. Foreign keys always point
/// to the primary key of an earlier relation. With `satisfying` set, rows
/// that would violate a constraint are discarded as they are generated.
pub fn gen_random_database(p: &GeneratorParams) -> Database {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let pool = attribute_pool(p.max_attributes);
    let n = rng.gen_range(1..=p.max_relations);
    let mut schema = RelationalSchema::default();
    let mut constraints = ConstraintSet::default();
    let mut links = BTreeSet::new();

    for i in 0..n {
        let name = format!("R{}", i + 1);
        let single_key_targets: Vec<usize> = (0..i)
            .filter(|&j| !links.contains(&j))
            .filter(|&j| {
                constraints
                    .primary_key(&schema.relations[j].name)
                    .is_some_and(|pk| pk.attributes.len() == 1)
            })
            .collect();
        if !single_key_targets.is_empty() && p.max_attributes >= 2 && rng.gen_bool(p.link_probability) {
            let attrs: Vec<String> = pool.choose_multiple(&mut rng, 2).cloned().collect();
            for a in &attrs {
                let j = *single_key_targets.choose(&mut rng).expect("non-empty");
                let target = &schema.relations[j].name;
                constraints.foreign_keys.push(ForeignKey {
                    relation: name.clone(),
                    attributes: vec![a.clone()],
                    ref_relation: target.clone(),
                    ref_attributes: constraints.primary_key(target).expect("has key").attributes.clone(),
                });
            }
            constraints.primary_keys.push(PrimaryKey {
                relation: name.clone(),
                attributes: attrs.clone(),
            });
            schema.relations.push(RelationSchema {
                name,
                attributes: attrs,
            });
            links.insert(i);
            continue;
        }

        let arity = rng.gen_range(1..=p.max_attributes.min(pool.len()));
        let mut attrs: Vec<String> = pool.choose_multiple(&mut rng, arity).cloned().collect();
        attrs.sort();
        if rng.gen_bool(p.pk_probability) {
            let key_len = if attrs.len() > 1 && rng.gen_bool(0.25) { 2 } else { 1 };
            let key: Vec<String> = attrs.choose_multiple(&mut rng, key_len).cloned().collect();
            constraints.primary_keys.push(PrimaryKey {
                relation: name.clone(),
                attributes: key,
            });
        }
        for j in 0..i {
            if links.contains(&j) || !rng.gen_bool(p.fk_density) {
                continue;
            }
            let target = &schema.relations[j].name;
            let Some(pk) = constraints.primary_key(target) else {
                continue;
            };
            if pk.attributes.len() > attrs.len() {
                continue;
            }
            let source: Vec<String> = attrs.choose_multiple(&mut rng, pk.attributes.len()).cloned().collect();
            let fk = ForeignKey {
                relation: name.clone(),
                attributes: source,
                ref_relation: target.clone(),
                ref_attributes: pk.attributes.clone(),
            };
            constraints.foreign_keys.push(fk);
        }
        schema.relations.push(RelationSchema {
            name,
            attributes: attrs,
        });
    }

    let mut instance = Instance::empty(&schema);
    for rel in &schema.relations {
        let rows = rng.gen_range(0..=p.max_rows);
        let outgoing: Vec<&ForeignKey> = constraints
            .foreign_keys
            .iter()
            .filter(|fk| fk.relation == rel.name)
            .collect();
        for _ in 0..rows {
            let mut tuple: Tuple = rel
                .attributes
                .iter()
                .map(|a| (a.clone(), random_value(&mut rng, p.null_probability)))
                .collect();
            if p.satisfying {
                for fk in &outgoing {
                    point_at_existing_row(&mut rng, &instance, fk, &mut tuple);
                }
                if !row_fits(&instance, &constraints, &rel.name, &tuple) {
                    continue;
                }
            }
            instance.insert(&rel.name, tuple);
        }
    }
    Database::new(schema, constraints, instance).expect("generated databases are well-formed")
}

/// Usually copies the key of a random referenced row into the foreign-key
/// columns of `tuple`.
fn point_at_existing_row(rng: &mut impl Rng, instance: &Instance, fk: &ForeignKey, tuple: &mut Tuple) {
    let targets = instance.rows(&fk.ref_relation);
    if targets.is_empty() || rng.gen_bool(0.15) {
        return;
    }
    let target = targets.choose(rng).expect("non-empty");
    for (a, b) in fk.attributes.iter().zip(&fk.ref_attributes) {
        tuple.insert(a.clone(), target.get(b).clone());
    }
}

/// Whether adding `tuple` to `relation` keeps every constraint satisfied.
/// Relations are filled in schema order and references only point
/// backwards, so a row accepted here never becomes invalid later.
fn row_fits(instance: &Instance, constraints: &ConstraintSet, relation: &str, tuple: &Tuple) -> bool {
    let value = |a: &String| tuple.get(a).unwrap_or(&Value::Null);
    if let Some(pk) = constraints.primary_key(relation) {
        if pk.attributes.iter().any(|a| value(a).is_null()) {
            return false;
        }
        let clash = instance
            .rows(relation)
            .iter()
            .any(|r| pk.attributes.iter().all(|a| r.get(a) == value(a)));
        if clash {
            return false;
        }
    }
    constraints
        .foreign_keys
        .iter()
        .filter(|fk| fk.relation == relation)
        .all(|fk| {
            let vals: Vec<&Value> = fk.attributes.iter().map(value).collect();
            vals.iter().any(|v| v.is_null())
                || instance
                    .rows(&fk.ref_relation)
                    .iter()
                    .any(|t| fk.ref_attributes.iter().zip(&vals).all(|(b, v)| t.get(b) == *v))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QueryParams {
    pub depth: usize,
    pub difference_arity: usize,
}

impl Default for QueryParams {
    fn default() -> Self {
        QueryParams {
            depth: 4,
            difference_arity: 3,
        }
    }
}

/// Generates a well-formed query of depth at most `q.depth`.
pub fn gen_query(rng: &mut impl Rng, schema: &RelationalSchema, q: &QueryParams) -> RaExpr {
    let pool = attribute_pool(schema.relations.iter().map(|r| r.attributes.len()).max().unwrap_or(1));
    QueryGen {
        rng,
        schema,
        pool,
        params: *q,
    }
    .expr(q.depth)
}

struct QueryGen<'a, R> {
    rng: &'a mut R,
    schema: &'a RelationalSchema,
    pool: Vec<String>,
    params: QueryParams,
}

impl<R: Rng> QueryGen<'_, R> {
    fn attrs(&self, q: &RaExpr) -> Vec<String> {
        q.attributes(self.schema).expect("generated queries are well-formed")
    }

    fn base(&mut self) -> RaExpr {
        if self.rng.gen_bool(0.1) {
            return RaExpr::NullRel(self.pool.choose(self.rng).expect("pool").clone());
        }
        let rel = self.schema.relations.choose(self.rng).expect("schema has relations");
        RaExpr::Relation(rel.name.clone())
    }

    fn expr(&mut self, depth: usize) -> RaExpr {
        if depth == 0 {
            return self.base();
        }
        // base, select, join, project/rename, union, difference
        let weights = WeightedIndex::new([40, 20, 15, 15, 5, 5]).expect("valid weights");
        match weights.sample(self.rng) {
            0 => self.base(),
            1 => {
                let input = self.expr(depth - 1);
                let a = self.attrs(&input).choose(self.rng).expect("non-empty").clone();
                let v = VALUE_POOL.choose(self.rng).expect("pool").to_string();
                let cond = match self.rng.gen_range(0..4) {
                    0 => Condition::Eq(a, v),
                    1 => Condition::Neq(a, v),
                    2 => Condition::IsNull(a),
                    _ => Condition::IsNotNull(a),
                };
                input.select(cond)
            }
            2 => {
                let l = self.expr(depth - 1);
                let r = self.expr(depth - 1);
                l.join(r)
            }
            3 => {
                let input = self.expr(depth - 1);
                let attrs = self.attrs(&input);
                let free: Vec<&String> = self.pool.iter().filter(|a| !attrs.contains(a)).collect();
                if self.rng.gen_bool(0.5) && !free.is_empty() {
                    let from = attrs.choose(self.rng).expect("non-empty").clone();
                    let to = (*free.choose(self.rng).expect("non-empty")).clone();
                    RaExpr::Rename {
                        from,
                        to,
                        input: Box::new(input),
                    }
                } else {
                    let k = self.rng.gen_range(1..=attrs.len());
                    let keep = self.subset(&attrs, k);
                    RaExpr::Project(keep, Box::new(input))
                }
            }
            op => {
                let mut l = self.expr(depth - 1);
                let mut attrs = self.attrs(&l);
                if op == 5 && attrs.len() > self.params.difference_arity {
                    let k = self.rng.gen_range(1..=self.params.difference_arity);
                    attrs = self.subset(&attrs, k);
                    l = RaExpr::Project(attrs.clone(), Box::new(l));
                }
                let r = self.with_attributes(&attrs, depth - 1);
                if op == 4 {
                    l.union(r)
                } else {
                    l.minus(r)
                }
            }
        }
    }

    /// A `k`-element subset of `attrs`, in `attrs` order.
    fn subset(&mut self, attrs: &[String], k: usize) -> Vec<String> {
        let chosen: BTreeSet<String> = attrs.choose_multiple(self.rng, k).cloned().collect();
        attrs.iter().filter(|a| chosen.contains(*a)).cloned().collect()
    }

    /// A query over exactly the attribute set `target`.
    fn with_attributes(&mut self, target: &[String], depth: usize) -> RaExpr {
        let wanted: BTreeSet<&String> = target.iter().collect();
        for _ in 0..8 {
            let q = self.expr(depth);
            let attrs = self.attrs(&q);
            let have: BTreeSet<&String> = attrs.iter().collect();
            if have == wanted {
                return q;
            }
            if have.is_superset(&wanted) {
                return RaExpr::Project(target.to_vec(), Box::new(q));
            }
        }
        target
            .iter()
            .map(|a| RaExpr::NullRel(a.clone()))
            .reduce(RaExpr::join)
            .expect("non-empty attribute list")
    }
}

/// A shrunk failing input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub seed: u64,
    pub database: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    pub expected: Vec<String>,
    pub actual: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub variant: Option<Variant>,
    pub seed: u64,
    pub trials: usize,
    /// Trials skipped because their precondition did not hold.
    pub excluded: usize,
    pub failures: Vec<Counterexample>,
    /// For properties that search for a witness rather than check a law.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Counterexample>,
    pub coverage: BTreeMap<String, usize>,
    pub passed: bool,
}

impl PropertyReport {
    fn new(property: &str, variant: Option<Variant>, seed: u64, trials: usize) -> Self {
        PropertyReport {
            property: property.to_string(),
            variant,
            seed,
            trials,
            excluded: 0,
            failures: Vec::new(),
            witness: None,
            coverage: BTreeMap::new(),
            passed: false,
        }
    }

    fn bump(&mut self, key: impl Into<String>) {
        *self.coverage.entry(key.into()).or_default() += 1;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let variant = self.variant.map(|v| format!(" [{v}]")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}{}: {} (seed {}, {} trials, {} excluded, {} failures)",
            self.property,
            variant,
            if self.passed { "PASS" } else { "FAIL" },
            self.seed,
            self.trials,
            self.excluded,
            self.failures.len()
        );
        for (k, v) in &self.coverage {
            let _ = writeln!(out, "  {k}: {v}");
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness (trial {}): {}", w.trial, w.message);
            let _ = writeln!(out, "{}", w.database);
        }
        for f in &self.failures {
            let _ = writeln!(out, "failure (trial {}, seed {}): {}", f.trial, f.seed, f.message);
            if let Some(q) = &f.query {
                let _ = writeln!(out, "  query: {q}");
            }
            let _ = writeln!(out, "  expected: {:?}", f.expected);
            let _ = writeln!(out, "  actual:   {:?}", f.actual);
            let _ = writeln!(out, "  database: {}", f.database);
        }
        out
    }
}

/// The per-trial seeds every check derives from its master seed.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.gen()).collect()
}

fn database_json(db: &Database) -> serde_json::Value {
    serde_json::from_str(&db.to_json()).expect("own serialization parses")
}

fn describe_rows(instance: &Instance, names: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for name in names {
        for t in instance.value_set(name) {
            let cells: Vec<String> = t.iter().map(|(a, v)| format!("{a}={v}")).collect();
            out.push(format!("{name}({})", cells.join(", ")));
        }
    }
    out
}

fn describe_solutions(s: &Solutions) -> Vec<String> {
    s.iter().map(|m| m.to_string()).collect()
}

/// Deletes rows one at a time, then relations, keeping each deletion for
/// which `fails` still holds.
pub fn minimize(db: &Database, fails: impl Fn(&Database) -> bool) -> Database {
    let mut current = db.clone();
    let names: Vec<String> = current.schema.names().map(str::to_string).collect();
    for name in &names {
        let ids: Vec<String> = current.instance.rows(name).iter().map(|r| r.id.clone()).collect();
        for id in ids {
            let mut candidate = current.clone();
            candidate.instance.retain(|rel, row| rel != name || row.id != id);
            if fails(&candidate) {
                current = candidate;
            }
        }
    }
    for name in &names {
        if let Some(candidate) = without_relation(&current, name) {
            if fails(&candidate) {
                current = candidate;
            }
        }
    }
    current
}

fn without_relation(db: &Database, name: &str) -> Option<Database> {
    let mut schema = db.schema.clone();
    schema.relations.retain(|r| r.name != name);
    if schema.relations.is_empty() {
        return None;
    }
    let mut constraints = db.constraints.clone();
    constraints.primary_keys.retain(|pk| pk.relation != name);
    constraints
        .foreign_keys
        .retain(|fk| fk.relation != name && fk.ref_relation != name);
    let mut instance = db.instance.clone();
    instance.remove_relation(name);
    let mut out = Database::new(schema, constraints, instance).ok()?;
    out.base = db.base.clone();
    Some(out)
}

fn map_with(db: &Database, variant: Variant) -> RdfGraph {
    direct_map(db, &MappingConfig::new(DEFAULT_BASE, variant)).expect("generated names are IRI-safe")
}

/// `None` when the round trip reproduces the instance, otherwise the
/// original and recovered rows.
fn round_trip_mismatch(db: &Database) -> Option<(Vec<String>, Vec<String>, String)> {
    let graph = map_with(db, Variant::Dm);
    let names: Vec<String> = db.schema.names().map(str::to_string).collect();
    let expected = describe_rows(&db.instance, &names);
    match recover_database(&graph, DEFAULT_BASE) {
        Err(e) => Some((expected, Vec::new(), format!("recovery failed: {e}"))),
        Ok((schema, instance)) => {
            let recovered: BTreeSet<&str> = schema.names().collect();
            let original: BTreeSet<&str> = db.schema.names().collect();
            let actual = describe_rows(&instance, &names);
            if recovered != original {
                Some((expected, actual, "recovered relation names differ".into()))
            } else if names.iter().any(|n| instance.value_set(n) != db.instance.value_set(n)) {
                Some((expected, actual, "recovered rows differ".into()))
            } else {
                None
            }
        }
    }
}

/// Round-trips satisfying random databases through mapping and recovery.
pub fn check_information_preservation(p: &GeneratorParams, trials: usize) -> PropertyReport {
    let mut report = PropertyReport::new("information-preservation", Some(Variant::Dm), p.seed, trials);
    for (trial, seed) in trial_seeds(p.seed, trials).into_iter().enumerate() {
        let db = gen_random_database(&GeneratorParams {
            seed,
            satisfying: true,
            ..p.clone()
        });
        if !satisfies(&db.instance, &db.constraints).holds() {
            report.excluded += 1;
            continue;
        }
        record_shape(&mut report, &db);
        if round_trip_mismatch(&db).is_some() {
            let small = minimize(&db, |d| {
                satisfies(&d.instance, &d.constraints).holds() && round_trip_mismatch(d).is_some()
            });
            let (expected, actual, message) = round_trip_mismatch(&small).expect("still failing");
            report.failures.push(Counterexample {
                trial,
                seed,
                database: database_json(&small),
                query: None,
                expected,
                actual,
                message,
            });
        }
    }
    report.passed = report.failures.is_empty();
    report
}

fn record_shape(report: &mut PropertyReport, db: &Database) {
    let ontology = extract_ontology(&db.schema, &db.constraints);
    if !ontology.binary_relations.is_empty() {
        report.bump("databases-with-link-tables");
    }
    if db
        .schema
        .names()
        .any(|n| db.constraints.primary_key(n).is_none() && !db.instance.rows(n).is_empty())
    {
        report.bump("databases-with-keyless-rows");
    }
}

enum QueryOutcome {
    /// Carries the number of answers.
    Agree(usize),
    Disagree {
        expected: Vec<String>,
        actual: Vec<String>,
        message: String,
    },
}

fn compare_query(db: &Database, query: &RaExpr, coverage: Option<&mut BTreeMap<Case, usize>>) -> QueryOutcome {
    let relational = match eval(query, &db.schema, &db.instance) {
        Ok(r) => r,
        Err(e) => {
            return QueryOutcome::Disagree {
                expected: Vec::new(),
                actual: Vec::new(),
                message: format!("query is ill-formed: {e}"),
            }
        }
    };
    let expected: Solutions = relational.tuples.iter().map(tr).collect();
    let mut translator = Translator::new(&db.schema, &db.constraints, DEFAULT_BASE);
    let pattern = match translator.translate(query) {
        Ok(p) => p,
        Err(e) => {
            return QueryOutcome::Disagree {
                expected: describe_solutions(&expected),
                actual: Vec::new(),
                message: format!("translation failed: {e}"),
            }
        }
    };
    if let Some(cov) = coverage {
        for (case, n) in translator.coverage() {
            *cov.entry(*case).or_default() += n;
        }
    }
    if !is_non_parametric(&pattern) {
        return QueryOutcome::Disagree {
            expected: describe_solutions(&expected),
            actual: Vec::new(),
            message: "translation is parametric".into(),
        };
    }
    let graph = map_with(db, Variant::Dm);
    match eval_pattern(&pattern, &graph) {
        Ok(actual) if actual == expected => QueryOutcome::Agree(actual.len()),
        Ok(actual) => QueryOutcome::Disagree {
            expected: describe_solutions(&expected),
            actual: describe_solutions(&actual),
            message: "answers differ".into(),
        },
        Err(e) => QueryOutcome::Disagree {
            expected: describe_solutions(&expected),
            actual: Vec::new(),
            message: format!("evaluation failed: {e}"),
        },
    }
}

/// Compares relational answers with the answers of the compiled pattern
/// over the mapped graph, for random queries on satisfying databases.
pub fn check_query_preservation(p: &GeneratorParams, q: &QueryParams, trials: usize) -> PropertyReport {
    let mut report = PropertyReport::new("query-preservation", Some(Variant::Dm), p.seed, trials);
    let mut cases = BTreeMap::new();
    for (trial, seed) in trial_seeds(p.seed, trials).into_iter().enumerate() {
        let db = gen_random_database(&GeneratorParams {
            seed,
            satisfying: true,
            ..p.clone()
        });
        if !satisfies(&db.instance, &db.constraints).holds() {
            report.excluded += 1;
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let query = gen_query(&mut rng, &db.schema, q);
        let outcome = compare_query(&db, &query, Some(&mut cases));
        if let QueryOutcome::Agree(n) = outcome {
            report.bump(if n > 0 { "nonempty-answers" } else { "empty-answers" });
        } else {
            let small = minimize(&db, |d| {
                satisfies(&d.instance, &d.constraints).holds()
                    && matches!(compare_query(d, &query, None), QueryOutcome::Disagree { .. })
            });
            let QueryOutcome::Disagree {
                expected,
                actual,
                message,
            } = compare_query(&small, &query, None)
            else {
                unreachable!("minimization keeps the failure")
            };
            report.failures.push(Counterexample {
                trial,
                seed,
                database: database_json(&small),
                query: Some(query.to_string()),
                expected,
                actual,
                message,
            });
        }
    }
    for case in Case::ALL {
        report
            .coverage
            .insert(format!("case:{case:?}"), cases.get(&case).copied().unwrap_or(0));
    }
    report.passed = report.failures.is_empty();
    report
}

/// Removes each row with probability one half, keeping row identifiers.
fn random_subinstance(rng: &mut impl Rng, db: &Database) -> Database {
    let mut smaller = db.clone();
    smaller.instance.retain(|_, _| rng.gen_bool(0.5));
    smaller
}

/// Triples of the smaller instance's graph missing from the larger one's.
fn monotonicity_gap(smaller: &Database, larger: &Database, variant: Variant) -> Vec<String> {
    let g1 = map_with(smaller, variant);
    let g2 = map_with(larger, variant);
    if graph_contained(&g1, &g2) {
        return Vec::new();
    }
    g1.iter().filter(|t| !g2.contains(t)).map(|t| t.to_string()).collect()
}

fn monotonicity_trial(report: &mut PropertyReport, trial: usize, seed: u64, larger: &Database, variant: Variant) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ab5e7);
    let smaller = random_subinstance(&mut rng, larger);
    let missing = monotonicity_gap(&smaller, larger, variant);
    if missing.is_empty() {
        report.bump("contained");
        return;
    }
    report.bump("not-contained");
    let example = Counterexample {
        trial,
        seed,
        database: serde_json::json!({
            "smaller": database_json(&smaller),
            "larger": database_json(larger),
        }),
        query: None,
        expected: Vec::new(),
        actual: missing,
        message: "triples of the smaller instance's graph missing from the larger one's".into(),
    };
    if variant == Variant::DmPkFk {
        report.witness.get_or_insert(example);
    } else {
        report.failures.push(example);
    }
}

fn finish_monotonicity(report: &mut PropertyReport, variant: Variant) {
    report.passed = if variant == Variant::DmPkFk {
        report.witness.is_some()
    } else {
        report.failures.is_empty()
    };
}

/// For `DM` and `DM_pk`, checks `DM(I1) ⊆ DM(I2)` whenever `I1 ⊆ I2`. For
/// `DM_pk+fk`, searches for a pair violating that containment and passes
/// when one is found.
pub fn check_monotonicity(p: &GeneratorParams, variant: Variant, trials: usize) -> PropertyReport {
    let mut report = PropertyReport::new("monotonicity", Some(variant), p.seed, trials);
    for (trial, seed) in trial_seeds(p.seed, trials).into_iter().enumerate() {
        let larger = gen_random_database(&GeneratorParams {
            seed,
            satisfying: variant == Variant::DmPkFk || trial % 2 == 0,
            ..p.clone()
        });
        monotonicity_trial(&mut report, trial, seed, &larger, variant);
    }
    finish_monotonicity(&mut report, variant);
    report
}

/// `None` when consistency of the mapped graph matches what `variant` is
/// expected to report about constraint satisfaction.
fn semantics_mismatch(db: &Database, variant: Variant) -> Option<String> {
    let consistent = is_consistent(&map_with(db, variant));
    let holds = satisfies(&db.instance, &db.constraints).holds();
    match variant {
        Variant::Dm if !consistent => Some("plain mapping produced an inconsistent graph".into()),
        Variant::Dm => None,
        _ if consistent != holds => Some(format!(
            "graph consistent = {consistent}, constraints satisfied = {holds}"
        )),
        _ => None,
    }
}

fn semantics_trial(report: &mut PropertyReport, trial: usize, seed: u64, db: &Database, variant: Variant) {
    let mut db = db.clone();
    if variant == Variant::DmPk {
        db.constraints = db.constraints.keys_only();
    }
    let holds = satisfies(&db.instance, &db.constraints).holds();
    report.bump(if holds { "satisfying" } else { "violating" });
    if !holds && satisfies(&db.instance, &db.constraints.keys_only()).holds() {
        report.bump("violating-foreign-keys-only");
    }
    if let Some(message) = semantics_mismatch(&db, variant) {
        let small = minimize(&db, |d| semantics_mismatch(d, variant).is_some());
        report.failures.push(Counterexample {
            trial,
            seed,
            database: database_json(&small),
            query: None,
            expected: Vec::new(),
            actual: Vec::new(),
            message,
        });
    }
}

/// Compares consistency of the mapped graph with constraint satisfaction,
/// over a mix of satisfying and violating instances.
///
/// `DM` is expected to be always consistent. `DM_pk` is compared against
/// the primary keys only. `DM_pk+fk` is compared against all constraints.
pub fn check_semantics_preservation(p: &GeneratorParams, variant: Variant, trials: usize) -> PropertyReport {
    let mut report = PropertyReport::new("semantics-preservation", Some(variant), p.seed, trials);
    for (trial, seed) in trial_seeds(p.seed, trials).into_iter().enumerate() {
        // Cycle through satisfying instances, unconstrained random ones, and
        // random sub-instances of satisfying ones (which break only references).
        let mut db = gen_random_database(&GeneratorParams {
            seed,
            satisfying: trial % 3 != 1,
            ..p.clone()
        });
        if trial % 3 == 2 {
            db = random_subinstance(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xde1e7e), &db);
        }
        semantics_trial(&mut report, trial, seed, &db, variant);
    }
    report.passed = report.failures.is_empty();
    report
}

/// The four checkable properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Property {
    Information,
    Query,
    Monotonicity,
    Semantics,
}

impl std::str::FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "info" => Ok(Property::Information),
            "query" => Ok(Property::Query),
            "mono" => Ok(Property::Monotonicity),
            "sem" => Ok(Property::Semantics),
            other => Err(format!(
                "unknown property `{other}` (expected info, query, mono or sem)"
            )),
        }
    }
}

/// Checks a property on one given database. Query preservation runs
/// `trials` random queries; monotonicity compares against `trials` random
/// sub-instances; the other two properties need a single trial.
pub fn check_database(
    db: &Database,
    property: Property,
    variant: Variant,
    seed: u64,
    trials: usize,
    q: &QueryParams,
) -> PropertyReport {
    let seeds = trial_seeds(seed, trials.max(1));
    let mut report = match property {
        Property::Information => {
            let mut report = PropertyReport::new("information-preservation", Some(Variant::Dm), seed, 1);
            if !satisfies(&db.instance, &db.constraints).holds() {
                report.excluded += 1;
            } else if let Some((expected, actual, message)) = round_trip_mismatch(db) {
                report.failures.push(Counterexample {
                    trial: 0,
                    seed,
                    database: database_json(db),
                    query: None,
                    expected,
                    actual,
                    message,
                });
            }
            report
        }
        Property::Query => {
            let mut report = PropertyReport::new("query-preservation", Some(Variant::Dm), seed, seeds.len());
            if !satisfies(&db.instance, &db.constraints).holds() {
                report.excluded = seeds.len();
            } else {
                for (trial, s) in seeds.into_iter().enumerate() {
                    let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x5eed);
                    let query = gen_query(&mut rng, &db.schema, q);
                    if let QueryOutcome::Disagree {
                        expected,
                        actual,
                        message,
                    } = compare_query(db, &query, None)
                    {
                        report.failures.push(Counterexample {
                            trial,
                            seed: s,
                            database: database_json(db),
                            query: Some(query.to_string()),
                            expected,
                            actual,
                            message,
                        });
                    }
                }
            }
            report
        }
        Property::Monotonicity => {
            let mut report = PropertyReport::new("monotonicity", Some(variant), seed, seeds.len());
            for (trial, s) in seeds.into_iter().enumerate() {
                monotonicity_trial(&mut report, trial, s, db, variant);
            }
            finish_monotonicity(&mut report, variant);
            return report;
        }
        Property::Semantics => {
            let mut report = PropertyReport::new("semantics-preservation", Some(variant), seed, 1);
            semantics_trial(&mut report, 0, seed, db, variant);
            report
        }
    };
    report.passed = report.failures.is_empty();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let p = GeneratorParams::default().with_seed(42);
        let a = gen_random_database(&p);
        let b = gen_random_database(&p);
        assert_eq!(a, b);
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            gen_query(&mut r1, &a.schema, &QueryParams::default()),
            gen_query(&mut r2, &a.schema, &QueryParams::default())
        );
    }

    #[test]
    fn satisfying_flag_is_honoured() {
        for seed in 0..100 {
            let db = gen_random_database(&GeneratorParams::default().with_seed(seed));
            assert!(satisfies(&db.instance, &db.constraints).holds(), "seed {seed}");
        }
    }

    #[test]
    fn zero_rows_gives_empty_instance() {
        let p = GeneratorParams {
            max_rows: 0,
            ..GeneratorParams::default()
        };
        for seed in 0..10 {
            assert_eq!(gen_random_database(&p.clone().with_seed(seed)).instance.total_rows(), 0);
        }
    }

    #[test]
    fn generated_queries_are_well_formed() {
        let db = gen_random_database(&GeneratorParams::default().with_seed(3));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let q = gen_query(&mut rng, &db.schema, &QueryParams::default());
            assert!(q.attributes(&db.schema).is_ok(), "{q}");
            assert!(q.depth() <= 4 + 1 + 3, "{q}");
        }
    }

    #[test]
    fn params_validation() {
        assert!(GeneratorParams::default().validate().is_ok());
        let bad = GeneratorParams {
            null_probability: 1.5,
            ..GeneratorParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn minimize_keeps_failure() {
        let db = gen_random_database(&GeneratorParams::default().with_seed(5));
        let total = db.instance.total_rows();
        let small = minimize(&db, |d| d.instance.total_rows() * 2 >= total);
        assert!(small.instance.total_rows() * 2 >= total);
    }

    #[test]
    fn small_runs_pass() {
        let p = GeneratorParams::default().with_seed(1);
        assert!(check_information_preservation(&p, 10).passed);
        assert!(check_query_preservation(&p, &QueryParams::default(), 10).passed);
        assert!(check_monotonicity(&p, Variant::Dm, 10).passed);
        assert!(check_semantics_preservation(&p, Variant::DmPkFk, 10).passed);
    }
}
