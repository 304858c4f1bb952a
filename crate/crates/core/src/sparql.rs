//! Algebraic SPARQL graph patterns and their set-based evaluation.
//!
//! The fragment covers AND, OPT, UNION, MINUS, FILTER over `bound` and `=`,
//! and nested SELECT with `AS`. Answers are sets of solution mappings.
//! Patterns must be non-parametric: a variable projected away by a nested
//! SELECT may not appear anywhere else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::rdfgraph::{RdfGraph, Term};

/// A variable, stored without the leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// A triple-pattern position: a variable or a concrete term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PatternTerm {
    Var(Var),
    Term(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(Var::new(name))
    }

    pub fn iri(iri: impl Into<String>) -> Self {
        PatternTerm::Term(Term::Iri(iri.into()))
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => v.fmt(f),
            PatternTerm::Term(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

/// Built-in filter condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    Bound(Var),
    EqConst(Var, Term),
    EqVar(Var, Var),
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
}

impl Condition {
    pub fn bound(v: &Var) -> Self {
        Condition::Bound(v.clone())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Condition::Not(Box::new(self))
    }

    pub fn and(self, other: Condition) -> Self {
        Condition::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Condition) -> Self {
        Condition::Or(Box::new(self), Box::new(other))
    }

    fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            Condition::Bound(v) | Condition::EqConst(v, _) => f(v),
            Condition::EqVar(a, b) => {
                f(a);
                f(b)
            }
            Condition::Not(c) => c.visit_vars(f),
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f)
            }
        }
    }

    fn rename_vars(&mut self, map: &BTreeMap<Var, Var>) {
        let sub = |v: &mut Var| {
            if let Some(n) = map.get(v) {
                *v = n.clone();
            }
        };
        match self {
            Condition::Bound(v) | Condition::EqConst(v, _) => sub(v),
            Condition::EqVar(a, b) => {
                sub(a);
                sub(b)
            }
            Condition::Not(c) => c.rename_vars(map),
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.rename_vars(map);
                b.rename_vars(map)
            }
        }
    }
}

/// A graph pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum GraphPattern {
    Empty,
    Triple(TriplePattern),
    And(Box<GraphPattern>, Box<GraphPattern>),
    Opt(Box<GraphPattern>, Box<GraphPattern>),
    Union(Box<GraphPattern>, Box<GraphPattern>),
    Minus(Box<GraphPattern>, Box<GraphPattern>),
    Filter(Box<GraphPattern>, Condition),
    /// `SELECT {?A1 AS ?B1, ..., ?C1, ...} P`; `renames` holds the `(?Ai, ?Bi)`.
    Select {
        renames: Vec<(Var, Var)>,
        keep: Vec<Var>,
        pattern: Box<GraphPattern>,
    },
}

impl GraphPattern {
    pub fn triple(s: PatternTerm, p: PatternTerm, o: PatternTerm) -> Self {
        GraphPattern::Triple(TriplePattern::new(s, p, o))
    }

    pub fn and(self, other: GraphPattern) -> Self {
        GraphPattern::And(Box::new(self), Box::new(other))
    }

    pub fn opt(self, other: GraphPattern) -> Self {
        GraphPattern::Opt(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: GraphPattern) -> Self {
        GraphPattern::Union(Box::new(self), Box::new(other))
    }

    pub fn minus(self, other: GraphPattern) -> Self {
        GraphPattern::Minus(Box::new(self), Box::new(other))
    }

    pub fn filter(self, condition: Condition) -> Self {
        GraphPattern::Filter(Box::new(self), condition)
    }

    pub fn select(keep: Vec<Var>, pattern: GraphPattern) -> Self {
        GraphPattern::Select {
            renames: Vec::new(),
            keep,
            pattern: Box::new(pattern),
        }
    }

    /// Calls `f` on every variable occurrence, in select lists too.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            GraphPattern::Empty => {}
            GraphPattern::Triple(t) => {
                for p in t.positions() {
                    if let PatternTerm::Var(v) = p {
                        f(v)
                    }
                }
            }
            GraphPattern::And(a, b)
            | GraphPattern::Opt(a, b)
            | GraphPattern::Union(a, b)
            | GraphPattern::Minus(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f)
            }
            GraphPattern::Filter(p, c) => {
                p.visit_vars(f);
                c.visit_vars(f)
            }
            GraphPattern::Select { renames, keep, pattern } => {
                for (a, b) in renames {
                    f(a);
                    f(b)
                }
                keep.iter().for_each(&mut *f);
                pattern.visit_vars(f)
            }
        }
    }

    /// `var(P)`: every variable occurring in the pattern.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    /// Substitutes variables everywhere, select lists included.
    pub fn rename_vars(&mut self, map: &BTreeMap<Var, Var>) {
        let sub = |v: &mut Var| {
            if let Some(n) = map.get(v) {
                *v = n.clone();
            }
        };
        match self {
            GraphPattern::Empty => {}
            GraphPattern::Triple(t) => {
                for p in [&mut t.subject, &mut t.predicate, &mut t.object] {
                    if let PatternTerm::Var(v) = p {
                        sub(v)
                    }
                }
            }
            GraphPattern::And(a, b)
            | GraphPattern::Opt(a, b)
            | GraphPattern::Union(a, b)
            | GraphPattern::Minus(a, b) => {
                a.rename_vars(map);
                b.rename_vars(map)
            }
            GraphPattern::Filter(p, c) => {
                p.rename_vars(map);
                c.rename_vars(map)
            }
            GraphPattern::Select { renames, keep, pattern } => {
                for (a, b) in renames.iter_mut() {
                    sub(a);
                    sub(b)
                }
                keep.iter_mut().for_each(sub);
                pattern.rename_vars(map)
            }
        }
    }

    /// Calls `f` on this pattern and every sub-pattern, parents first.
    pub fn visit_subpatterns<'a>(&'a self, f: &mut impl FnMut(&'a GraphPattern)) {
        f(self);
        match self {
            GraphPattern::Empty | GraphPattern::Triple(_) => {}
            GraphPattern::And(a, b)
            | GraphPattern::Opt(a, b)
            | GraphPattern::Union(a, b)
            | GraphPattern::Minus(a, b) => {
                a.visit_subpatterns(f);
                b.visit_subpatterns(f)
            }
            GraphPattern::Filter(p, _) | GraphPattern::Select { pattern: p, .. } => p.visit_subpatterns(f),
        }
    }

    fn occurrence_counts(&self) -> BTreeMap<&Var, usize> {
        let mut counts = BTreeMap::new();
        self.visit_vars(&mut |v| *counts.entry(v).or_insert(0) += 1);
        counts
    }
}

/// A solution mapping: a finite partial function from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SolutionMapping(pub BTreeMap<Var, Term>);

impl SolutionMapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Var, t: Term) {
        self.0.insert(v, t);
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn is_compatible(&self, other: &SolutionMapping) -> bool {
        let (small, large) = if self.0.len() <= other.0.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.0.iter().all(|(v, t)| large.0.get(v).is_none_or(|u| u == t))
    }

    pub fn shares_domain_with(&self, other: &SolutionMapping) -> bool {
        self.0.keys().any(|v| other.0.contains_key(v))
    }

    /// `μ1 ∪ μ2`, assuming the two are compatible.
    pub fn merge(&self, other: &SolutionMapping) -> SolutionMapping {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(v, t)| (v.clone(), t.clone())));
        out
    }
}

impl FromIterator<(Var, Term)> for SolutionMapping {
    fn from_iter<T: IntoIterator<Item = (Var, Term)>>(iter: T) -> Self {
        SolutionMapping(iter.into_iter().collect())
    }
}

impl fmt::Display for SolutionMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}

pub type Solutions = BTreeSet<SolutionMapping>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SparqlError {
    #[error("pattern is parametric: {0} is projected away by a nested SELECT but used outside it")]
    Parametric(Var),
    #[error("malformed SELECT: {0}")]
    MalformedSelect(String),
}

/// `μ ⊨ R`. Equalities over an unbound variable are false.
pub fn satisfies_condition(mu: &SolutionMapping, cond: &Condition) -> bool {
    match cond {
        Condition::Bound(v) => mu.get(v).is_some(),
        Condition::EqConst(v, c) => mu.get(v) == Some(c),
        Condition::EqVar(a, b) => match (mu.get(a), mu.get(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
        Condition::Not(c) => !satisfies_condition(mu, c),
        Condition::And(a, b) => satisfies_condition(mu, a) && satisfies_condition(mu, b),
        Condition::Or(a, b) => satisfies_condition(mu, a) || satisfies_condition(mu, b),
    }
}

/// For every nested `SELECT W P2`, each variable of `P2` not listed in `W`
/// (as a kept variable or as the source of an `AS`) occurs nowhere else in
/// `pattern`.
pub fn is_non_parametric(pattern: &GraphPattern) -> bool {
    first_leaked_variable(pattern).is_none()
}

fn first_leaked_variable(root: &GraphPattern) -> Option<Var> {
    let total = root.occurrence_counts();
    let mut leaked = None;
    root.visit_subpatterns(&mut |sub| {
        if leaked.is_some() {
            return;
        }
        if let GraphPattern::Select { renames, keep, pattern } = sub {
            let listed: BTreeSet<&Var> = renames.iter().map(|(a, _)| a).chain(keep).collect();
            let inside = sub.occurrence_counts();
            for v in pattern.vars() {
                if !listed.contains(&v) && total[&v] > inside[&v] {
                    leaked = Some(v);
                    return;
                }
            }
        }
    });
    leaked
}

fn check_selects(pattern: &GraphPattern) -> Result<(), SparqlError> {
    let mut result = Ok(());
    pattern.visit_subpatterns(&mut |sub| {
        if result.is_err() {
            return;
        }
        if let GraphPattern::Select { renames, keep, pattern } = sub {
            let mut seen = BTreeSet::new();
            let listed = renames.iter().flat_map(|(a, b)| [a, b]).chain(keep.iter());
            for v in listed {
                if !seen.insert(v) {
                    result = Err(SparqlError::MalformedSelect(format!("{v} is listed twice")));
                    return;
                }
            }
            let inner = pattern.vars();
            if let Some((_, b)) = renames.iter().find(|(_, b)| inner.contains(b)) {
                result = Err(SparqlError::MalformedSelect(format!(
                    "AS target {b} is mentioned in the inner pattern"
                )));
            }
        }
    });
    result
}

/// Evaluates a non-parametric pattern over `graph`.
pub fn eval_pattern(pattern: &GraphPattern, graph: &RdfGraph) -> Result<Solutions, SparqlError> {
    check_selects(pattern)?;
    if let Some(v) = first_leaked_variable(pattern) {
        return Err(SparqlError::Parametric(v));
    }
    Ok(eval_unchecked(pattern, graph))
}

fn match_position(mu: &mut SolutionMapping, pos: &PatternTerm, term: &Term) -> bool {
    match pos {
        PatternTerm::Term(t) => t == term,
        PatternTerm::Var(v) => match mu.get(v) {
            Some(bound) => bound == term,
            None => {
                mu.insert(v.clone(), term.clone());
                true
            }
        },
    }
}

fn eval_unchecked(pattern: &GraphPattern, graph: &RdfGraph) -> Solutions {
    match pattern {
        GraphPattern::Empty => {
            if graph.is_empty() {
                Solutions::new()
            } else {
                Solutions::from([SolutionMapping::new()])
            }
        }
        GraphPattern::Triple(tp) => {
            let mut out = Solutions::new();
            for t in graph {
                let mut mu = SolutionMapping::new();
                let predicate = Term::Iri(t.predicate.clone());
                if match_position(&mut mu, &tp.subject, &t.subject)
                    && match_position(&mut mu, &tp.predicate, &predicate)
                    && match_position(&mut mu, &tp.object, &t.object)
                {
                    out.insert(mu);
                }
            }
            out
        }
        GraphPattern::And(a, b) => {
            let left = eval_unchecked(a, graph);
            let right = eval_unchecked(b, graph);
            let mut out = Solutions::new();
            for m1 in &left {
                for m2 in &right {
                    if m1.is_compatible(m2) {
                        out.insert(m1.merge(m2));
                    }
                }
            }
            out
        }
        GraphPattern::Opt(a, b) => {
            let left = eval_unchecked(a, graph);
            let right = eval_unchecked(b, graph);
            let mut out = Solutions::new();
            for m1 in &left {
                let mut extended = false;
                for m2 in &right {
                    if m1.is_compatible(m2) {
                        out.insert(m1.merge(m2));
                        extended = true;
                    }
                }
                if !extended {
                    out.insert(m1.clone());
                }
            }
            out
        }
        GraphPattern::Union(a, b) => {
            let mut out = eval_unchecked(a, graph);
            out.extend(eval_unchecked(b, graph));
            out
        }
        GraphPattern::Minus(a, b) => {
            let right = eval_unchecked(b, graph);
            eval_unchecked(a, graph)
                .into_iter()
                .filter(|m| right.iter().all(|m2| !m.is_compatible(m2) || !m.shares_domain_with(m2)))
                .collect()
        }
        GraphPattern::Filter(p, c) => eval_unchecked(p, graph)
            .into_iter()
            .filter(|m| satisfies_condition(m, c))
            .collect(),
        GraphPattern::Select { renames, keep, pattern } => eval_unchecked(pattern, graph)
            .into_iter()
            .map(|m| {
                let mut out = SolutionMapping::new();
                for (a, b) in renames {
                    if let Some(t) = m.get(a) {
                        out.insert(b.clone(), t.clone());
                    }
                }
                for c in keep {
                    if let Some(t) = m.get(c) {
                        out.insert(c.clone(), t.clone());
                    }
                }
                out
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// SPARQL text

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Bound(v) => write!(f, "bound({v})"),
            Condition::EqConst(v, c) => write!(f, "{v} = {c}"),
            Condition::EqVar(a, b) => write!(f, "{a} = {b}"),
            Condition::Not(c) => write!(f, "!({c})"),
            Condition::And(a, b) => write!(f, "({a} && {b})"),
            Condition::Or(a, b) => write!(f, "({a} || {b})"),
        }
    }
}

fn write_group(out: &mut String, p: &GraphPattern, indent: usize) {
    let pad = "  ".repeat(indent);
    out.push_str("{\n");
    write_body(out, p, indent + 1);
    out.push_str(&pad);
    out.push('}');
}

fn write_body(out: &mut String, p: &GraphPattern, indent: usize) {
    let pad = "  ".repeat(indent);
    let binary = |out: &mut String, a: &GraphPattern, kw: &str, b: &GraphPattern| {
        out.push_str(&pad);
        write_group(out, a, indent);
        out.push_str(kw);
        write_group(out, b, indent);
        out.push('\n');
    };
    match p {
        GraphPattern::Empty => {}
        GraphPattern::Triple(t) => {
            out.push_str(&format!("{pad}{} {} {} .\n", t.subject, t.predicate, t.object));
        }
        GraphPattern::And(a, b) => binary(out, a, " . ", b),
        GraphPattern::Opt(a, b) => binary(out, a, " OPTIONAL ", b),
        GraphPattern::Union(a, b) => binary(out, a, " UNION ", b),
        GraphPattern::Minus(a, b) => binary(out, a, " MINUS ", b),
        GraphPattern::Filter(inner, c) => {
            out.push_str(&pad);
            write_group(out, inner, indent);
            out.push_str(&format!("\n{pad}FILTER ({c})\n"));
        }
        GraphPattern::Select { renames, keep, pattern } => {
            out.push_str(&format!("{pad}{{ SELECT"));
            for (a, b) in renames {
                out.push_str(&format!(" ({a} AS {b})"));
            }
            for c in keep {
                out.push_str(&format!(" {c}"));
            }
            out.push_str(" WHERE ");
            write_group(out, pattern, indent);
            out.push_str(" }\n");
        }
    }
}

/// Renders the pattern as a SPARQL group graph pattern with full IRIs and
/// explicit braces around every operand.
pub fn serialize_sparql(pattern: &GraphPattern) -> String {
    let mut out = String::new();
    write_group(&mut out, pattern, 0);
    out.push('\n');
    out
}

/// A complete query projecting `vars` from `pattern`.
pub fn serialize_query(vars: &[Var], pattern: &GraphPattern) -> String {
    let head: Vec<String> = vars.iter().map(Var::to_string).collect();
    format!("SELECT {} WHERE {}", head.join(" "), serialize_sparql(pattern))
}
