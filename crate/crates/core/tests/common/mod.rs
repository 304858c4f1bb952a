//! Independent reference implementations and fixtures for integration tests.
//!
//! The oracles here are written directly from the textbook definitions with
//! deliberately different data structures from the library: relations are
//! header plus positional rows, solution mappings are string maps keyed by
//! variable name, and graphs are plain vectors.

#![allow(dead_code)]

pub mod worked;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rdb2owl::rdfgraph::{RdfGraph, Term};
use rdb2owl::relalg::{Condition as RaCondition, RaExpr};
use rdb2owl::relmodel::{load_database_file, Database, Value};
use rdb2owl::sparql::{Condition, GraphPattern, PatternTerm, SolutionMapping, Solutions, Var};

pub fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn load(name: &str) -> Database {
    load_database_file(&data_file(name)).expect("fixture loads").database
}

pub fn university() -> Database {
    load("university.json")
}

pub fn duplicate_key() -> Database {
    load("duplicate_key.json")
}

pub fn dangling() -> Database {
    load("dangling.json")
}

// Relational algebra, positional.

pub type Row = Vec<Option<String>>;

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    fn col(&self, a: &str) -> usize {
        self.header.iter().position(|h| h == a).expect("attribute present")
    }

    fn dedup(mut self) -> Table {
        let mut seen = BTreeSet::new();
        self.rows.retain(|r| seen.insert(r.clone()));
        self
    }

    /// Rows keyed by attribute name, for comparison with the library.
    pub fn as_maps(&self) -> BTreeSet<BTreeMap<String, Option<String>>> {
        self.rows
            .iter()
            .map(|r| self.header.iter().cloned().zip(r.iter().cloned()).collect())
            .collect()
    }
}

fn base_table(db: &Database, name: &str) -> Table {
    let rel = db.schema.relation(name).expect("relation exists");
    Table {
        header: rel.attributes.clone(),
        rows: db
            .instance
            .rows(name)
            .iter()
            .map(|r| {
                rel.attributes
                    .iter()
                    .map(|a| r.get(a).as_str().map(str::to_string))
                    .collect()
            })
            .collect(),
    }
    .dedup()
}

/// Reads a row in another table's column order.
fn reorder(t: &Table, header: &[String]) -> Vec<Row> {
    let idx: Vec<usize> = header.iter().map(|a| t.col(a)).collect();
    t.rows
        .iter()
        .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
        .collect()
}

pub fn naive_eval(e: &RaExpr, db: &Database) -> Table {
    match e {
        RaExpr::Relation(n) => base_table(db, n),
        RaExpr::NullRel(a) => Table {
            header: vec![a.clone()],
            rows: vec![vec![None]],
        },
        RaExpr::Select(c, inner) => {
            let t = naive_eval(inner, db);
            let keep = |r: &Row| -> bool {
                match c {
                    RaCondition::Eq(a, v) => r[t.col(a)].as_deref() == Some(v.as_str()),
                    RaCondition::Neq(a, v) => matches!(&r[t.col(a)], Some(x) if x != v),
                    RaCondition::IsNull(a) => r[t.col(a)].is_none(),
                    RaCondition::IsNotNull(a) => r[t.col(a)].is_some(),
                }
            };
            let rows = t.rows.iter().filter(|r| keep(r)).cloned().collect();
            Table { header: t.header, rows }
        }
        RaExpr::Project(keep, inner) => {
            let t = naive_eval(inner, db);
            Table {
                header: keep.clone(),
                rows: reorder(&t, keep),
            }
            .dedup()
        }
        RaExpr::Rename { from, to, input } => {
            let mut t = naive_eval(input, db);
            let i = t.col(from);
            t.header[i] = to.clone();
            t
        }
        RaExpr::Join(l, r) => {
            let a = naive_eval(l, db);
            let b = naive_eval(r, db);
            let shared: Vec<(usize, usize)> = a
                .header
                .iter()
                .enumerate()
                .filter_map(|(i, h)| b.header.iter().position(|x| x == h).map(|j| (i, j)))
                .collect();
            let extra: Vec<usize> = (0..b.header.len())
                .filter(|j| !shared.iter().any(|(_, s)| s == j))
                .collect();
            let mut header = a.header.clone();
            header.extend(extra.iter().map(|&j| b.header[j].clone()));
            let mut rows = Vec::new();
            for x in &a.rows {
                for y in &b.rows {
                    if shared.iter().all(|&(i, j)| x[i].is_some() && x[i] == y[j]) {
                        let mut row = x.clone();
                        row.extend(extra.iter().map(|&j| y[j].clone()));
                        rows.push(row);
                    }
                }
            }
            Table { header, rows }.dedup()
        }
        RaExpr::Union(l, r) => {
            let a = naive_eval(l, db);
            let b = naive_eval(r, db);
            let mut rows = a.rows.clone();
            rows.extend(reorder(&b, &a.header));
            Table { header: a.header, rows }.dedup()
        }
        RaExpr::Difference(l, r) => {
            let a = naive_eval(l, db);
            let b = naive_eval(r, db);
            let gone: BTreeSet<Row> = reorder(&b, &a.header).into_iter().collect();
            let rows = a.rows.iter().filter(|r| !gone.contains(*r)).cloned().collect();
            Table { header: a.header, rows }
        }
    }
}

/// Nested-loop left outer join: every left row joined with each matching
/// right row, or padded with NULLs when none matches. NULL never matches.
pub fn nested_loop_left_outer_join(a: &Table, b: &Table) -> Table {
    let shared: Vec<(usize, usize)> = a
        .header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| b.header.iter().position(|x| x == h).map(|j| (i, j)))
        .collect();
    let extra: Vec<usize> = (0..b.header.len())
        .filter(|j| !shared.iter().any(|(_, s)| s == j))
        .collect();
    let mut header = a.header.clone();
    header.extend(extra.iter().map(|&j| b.header[j].clone()));
    let mut rows = Vec::new();
    for x in &a.rows {
        let mut matched = false;
        for y in &b.rows {
            if shared.iter().all(|&(i, j)| x[i].is_some() && x[i] == y[j]) {
                matched = true;
                let mut row = x.clone();
                row.extend(extra.iter().map(|&j| y[j].clone()));
                rows.push(row);
            }
        }
        if !matched {
            let mut row = x.clone();
            row.extend(extra.iter().map(|_| None));
            rows.push(row);
        }
    }
    Table { header, rows }.dedup()
}

pub fn result_as_maps(tuples: &BTreeSet<BTreeMap<String, Value>>) -> BTreeSet<BTreeMap<String, Option<String>>> {
    tuples
        .iter()
        .map(|t| {
            t.iter()
                .map(|(a, v)| (a.clone(), v.as_str().map(str::to_string)))
                .collect()
        })
        .collect()
}

// SPARQL, over string-keyed mappings.

pub type Mapping = BTreeMap<String, String>;

fn compatible(a: &Mapping, b: &Mapping) -> bool {
    a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v))
}

fn merged(a: &Mapping, b: &Mapping) -> Mapping {
    let mut m = a.clone();
    m.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
    m
}

fn term_text(t: &PatternTerm) -> Result<String, String> {
    match t {
        PatternTerm::Var(v) => Err(v.name().to_string()),
        PatternTerm::Term(t) => Ok(t.to_string()),
    }
}

fn holds(c: &Condition, m: &Mapping) -> bool {
    match c {
        Condition::Bound(v) => m.contains_key(v.name()),
        Condition::EqConst(v, t) => m.get(v.name()) == Some(&t.to_string()),
        Condition::EqVar(a, b) => match (m.get(a.name()), m.get(b.name())) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
        Condition::Not(c) => !holds(c, m),
        Condition::And(a, b) => holds(a, m) && holds(b, m),
        Condition::Or(a, b) => holds(a, m) || holds(b, m),
    }
}

pub fn naive_sparql(p: &GraphPattern, g: &[(String, String, String)]) -> Vec<Mapping> {
    let out: Vec<Mapping> = match p {
        GraphPattern::Empty => {
            if g.is_empty() {
                vec![]
            } else {
                vec![Mapping::new()]
            }
        }
        GraphPattern::Triple(tp) => {
            let parts = [&tp.subject, &tp.predicate, &tp.object].map(term_text);
            let mut out = Vec::new();
            'triples: for (s, pr, o) in g {
                let mut m = Mapping::new();
                for (part, value) in parts.iter().zip([s, pr, o]) {
                    match part {
                        Ok(fixed) if fixed != value => continue 'triples,
                        Ok(_) => {}
                        Err(var) => match m.get(var) {
                            Some(bound) if bound != value => continue 'triples,
                            _ => {
                                m.insert(var.clone(), value.clone());
                            }
                        },
                    }
                }
                out.push(m);
            }
            out
        }
        GraphPattern::And(a, b) => {
            let (x, y) = (naive_sparql(a, g), naive_sparql(b, g));
            let mut out = Vec::new();
            for m1 in &x {
                for m2 in &y {
                    if compatible(m1, m2) {
                        out.push(merged(m1, m2));
                    }
                }
            }
            out
        }
        GraphPattern::Opt(a, b) => {
            let (x, y) = (naive_sparql(a, g), naive_sparql(b, g));
            let mut out = Vec::new();
            for m1 in &x {
                let mut extended = false;
                for m2 in &y {
                    if compatible(m1, m2) {
                        extended = true;
                        out.push(merged(m1, m2));
                    }
                }
                if !extended {
                    out.push(m1.clone());
                }
            }
            out
        }
        GraphPattern::Union(a, b) => {
            let mut out = naive_sparql(a, g);
            out.extend(naive_sparql(b, g));
            out
        }
        GraphPattern::Minus(a, b) => {
            let y = naive_sparql(b, g);
            naive_sparql(a, g)
                .into_iter()
                .filter(|m1| {
                    y.iter()
                        .all(|m2| !compatible(m1, m2) || !m1.keys().any(|k| m2.contains_key(k)))
                })
                .collect()
        }
        GraphPattern::Filter(inner, c) => naive_sparql(inner, g).into_iter().filter(|m| holds(c, m)).collect(),
        GraphPattern::Select { renames, keep, pattern } => naive_sparql(pattern, g)
            .into_iter()
            .map(|m| {
                let mut out = Mapping::new();
                for v in keep {
                    if let Some(x) = m.get(v.name()) {
                        out.insert(v.name().to_string(), x.clone());
                    }
                }
                for (from, to) in renames {
                    if let Some(x) = m.get(from.name()) {
                        out.insert(to.name().to_string(), x.clone());
                    }
                }
                out
            })
            .collect(),
    };
    let set: BTreeSet<Mapping> = out.into_iter().collect();
    set.into_iter().collect()
}

pub fn graph_rows(g: &RdfGraph) -> Vec<(String, String, String)> {
    g.iter()
        .map(|t| {
            (
                t.subject.to_string(),
                Term::iri(t.predicate.clone()).to_string(),
                t.object.to_string(),
            )
        })
        .collect()
}

pub fn solutions_as_maps(s: &Solutions) -> BTreeSet<Mapping> {
    s.iter().map(mapping_as_map).collect()
}

pub fn mapping_as_map(m: &SolutionMapping) -> Mapping {
    m.0.iter()
        .map(|(v, t): (&Var, &Term)| (v.name().to_string(), t.to_string()))
        .collect()
}
