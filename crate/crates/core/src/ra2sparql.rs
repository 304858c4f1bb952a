//! Compiles relational algebra into SPARQL graph patterns that, evaluated
//! over the direct-mapping image of an instance, return exactly the
//! tuples of the relational query converted by [`tr`].
//!
//! Attribute `A` becomes variable `?A`. Helper variables are drawn from the
//! reserved `__fresh<n>` namespace, which schema validation keeps disjoint
//! from attribute names.
//!
//! Every `SELECT` built here renames the inner variables it does not list
//! to fresh ones, and each copy of a subquery duplicated by the difference
//! construction gets its own fresh variables. This keeps every output
//! non-parametric without changing what it evaluates to.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::directmap::{extract_ontology, generate_iri, IriTemplate, MappingError, OntologyModel};
use crate::rdfgraph::{vocab, Term};
use crate::relalg::{Condition as RaCondition, RaError, RaExpr};
use crate::relmodel::{ConstraintSet, RelationalSchema, Tuple, Value, FRESH_PREFIX};
use crate::sparql::{Condition, GraphPattern, PatternTerm, SolutionMapping, Var};

pub const DEFAULT_DIFFERENCE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Query(#[from] RaError),
    #[error(transparent)]
    Iri(#[from] MappingError),
    #[error(
        "difference over {arity} attributes needs {} union branches; the limit is {cap} attributes",
        (1u128 << arity.min(&127)) - 1
    )]
    DifferenceTooWide { arity: usize, cap: usize },
}

/// Converts a tuple into the mapping binding `?A` to each non-NULL value.
pub fn tr(tuple: &Tuple) -> SolutionMapping {
    tuple
        .iter()
        .filter_map(|(a, v)| match v {
            Value::Const(c) => Some((Var::new(a.clone()), Term::literal(c.clone()))),
            Value::Null => None,
        })
        .collect()
}

/// The cases of the translation, for coverage accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Case {
    ClassRelation,
    BinaryRelation,
    NullRelation,
    SelectEq,
    SelectNeq,
    SelectIsNull,
    SelectIsNotNull,
    Projection,
    Rename,
    Join,
    Union,
    Difference,
}

impl Case {
    pub const ALL: [Case; 12] = [
        Case::ClassRelation,
        Case::BinaryRelation,
        Case::NullRelation,
        Case::SelectEq,
        Case::SelectNeq,
        Case::SelectIsNull,
        Case::SelectIsNotNull,
        Case::Projection,
        Case::Rename,
        Case::Join,
        Case::Union,
        Case::Difference,
    ];
}

pub type Coverage = BTreeMap<Case, usize>;

/// Compiles queries over one schema and constraint set.
pub struct Translator<'a> {
    schema: &'a RelationalSchema,
    ontology: OntologyModel,
    base: String,
    difference_cap: usize,
    next_fresh: usize,
    coverage: Coverage,
}

impl<'a> Translator<'a> {
    pub fn new(schema: &'a RelationalSchema, constraints: &ConstraintSet, base: &str) -> Self {
        Translator {
            schema,
            ontology: extract_ontology(schema, constraints),
            base: base.to_string(),
            difference_cap: DEFAULT_DIFFERENCE_CAP,
            next_fresh: 0,
            coverage: Coverage::new(),
        }
    }

    pub fn with_difference_cap(mut self, cap: usize) -> Self {
        self.difference_cap = cap;
        self
    }

    /// How often each case was compiled so far.
    pub fn coverage(&self) -> &Coverage {
        &self.coverage
    }

    pub fn translate(&mut self, query: &RaExpr) -> Result<GraphPattern, TranslateError> {
        query.attributes(self.schema)?;
        self.compile(query)
    }

    fn fresh(&mut self) -> Var {
        let v = Var::new(format!("{FRESH_PREFIX}{}", self.next_fresh));
        self.next_fresh += 1;
        v
    }

    fn count(&mut self, case: Case) {
        *self.coverage.entry(case).or_default() += 1;
    }

    /// `SELECT {renames, keep} inner`, with every unlisted attribute
    /// variable of `inner` renamed apart. Helper variables are unique already.
    fn select(&mut self, renames: Vec<(Var, Var)>, keep: Vec<Var>, mut inner: GraphPattern) -> GraphPattern {
        let listed: BTreeSet<&Var> = renames.iter().map(|(a, _)| a).chain(&keep).collect();
        let hidden: Vec<Var> = inner
            .vars()
            .into_iter()
            .filter(|v| !listed.contains(v) && !v.name().starts_with(FRESH_PREFIX))
            .collect();
        let map: BTreeMap<Var, Var> = hidden.into_iter().map(|v| (v, self.fresh())).collect();
        inner.rename_vars(&map);
        GraphPattern::Select {
            renames,
            keep,
            pattern: Box::new(inner),
        }
    }

    /// A copy of `pattern` with all helper variables replaced by new ones.
    fn refreshed(&mut self, pattern: &GraphPattern) -> GraphPattern {
        let helpers: Vec<Var> = pattern
            .vars()
            .into_iter()
            .filter(|v| v.name().starts_with(FRESH_PREFIX))
            .collect();
        let map: BTreeMap<Var, Var> = helpers.into_iter().map(|v| (v, self.fresh())).collect();
        let mut copy = pattern.clone();
        copy.rename_vars(&map);
        copy
    }

    fn compile(&mut self, query: &RaExpr) -> Result<GraphPattern, TranslateError> {
        match query {
            RaExpr::Relation(name) => self.relation(name),
            RaExpr::NullRel(_) => {
                self.count(Case::NullRelation);
                Ok(GraphPattern::Empty)
            }
            RaExpr::Select(cond, input) => {
                let inner = self.compile(input)?;
                let v = attr_var(cond.attribute());
                let (case, filter) = match cond {
                    RaCondition::Eq(_, value) => (Case::SelectEq, Condition::EqConst(v, Term::literal(value.clone()))),
                    RaCondition::Neq(_, value) => (
                        Case::SelectNeq,
                        Condition::EqConst(v.clone(), Term::literal(value.clone()))
                            .not()
                            .and(Condition::bound(&v)),
                    ),
                    RaCondition::IsNull(_) => (Case::SelectIsNull, Condition::bound(&v).not()),
                    RaCondition::IsNotNull(_) => (Case::SelectIsNotNull, Condition::bound(&v)),
                };
                self.count(case);
                Ok(inner.filter(filter))
            }
            RaExpr::Project(attrs, input) => {
                self.count(Case::Projection);
                let inner = self.compile(input)?;
                Ok(self.select(Vec::new(), attrs.iter().map(|a| attr_var(a)).collect(), inner))
            }
            RaExpr::Rename { from, to, input } => {
                self.count(Case::Rename);
                let rest: Vec<Var> = input
                    .attributes(self.schema)?
                    .iter()
                    .filter(|a| *a != from)
                    .map(|a| attr_var(a))
                    .collect();
                let inner = self.compile(input)?;
                Ok(self.select(vec![(attr_var(from), attr_var(to))], rest, inner))
            }
            RaExpr::Join(l, r) => {
                self.count(Case::Join);
                let left_attrs = l.attributes(self.schema)?;
                let right_attrs = r.attributes(self.schema)?;
                let shared: Vec<&String> = left_attrs.iter().filter(|a| right_attrs.contains(a)).collect();
                let lhs = self.compile(l)?;
                let rhs = self.compile(r)?;
                let all_bound = shared
                    .iter()
                    .map(|a| Condition::bound(&attr_var(a)))
                    .reduce(Condition::and);
                Ok(match all_bound {
                    Some(c) => lhs.filter(c.clone()).and(rhs.filter(c)),
                    None => lhs.and(rhs),
                })
            }
            RaExpr::Union(l, r) => {
                self.count(Case::Union);
                let lhs = self.compile(l)?;
                let rhs = self.compile(r)?;
                Ok(lhs.union(rhs))
            }
            RaExpr::Difference(l, r) => {
                self.count(Case::Difference);
                let attrs = l.attributes(self.schema)?;
                r.attributes(self.schema)?;
                if attrs.len() > self.difference_cap {
                    return Err(TranslateError::DifferenceTooWide {
                        arity: attrs.len(),
                        cap: self.difference_cap,
                    });
                }
                let lhs = self.compile(l)?;
                let rhs = self.compile(r)?;
                Ok(self.difference(&attrs, &lhs, &rhs))
            }
        }
    }

    fn relation(&mut self, name: &str) -> Result<GraphPattern, TranslateError> {
        let base = self.base.clone();
        if let Some(link) = self.ontology.binary_relation(name).cloned() {
            self.count(Case::BinaryRelation);
            let (t1, t2) = (self.fresh(), self.fresh());
            let (a, b) = (attr_var(&link.attr_a), attr_var(&link.attr_b));
            let predicate = generate_iri(IriTemplate::BinaryRelation(&link), &base)?;
            let source_key = generate_iri(
                IriTemplate::Datatype {
                    relation: &link.source,
                    attribute: &link.source_attr,
                },
                &base,
            )?;
            let target_key = generate_iri(
                IriTemplate::Datatype {
                    relation: &link.target,
                    attribute: &link.target_attr,
                },
                &base,
            )?;
            let pattern = GraphPattern::triple(
                PatternTerm::Var(t1.clone()),
                PatternTerm::iri(predicate),
                PatternTerm::Var(t2.clone()),
            )
            .and(GraphPattern::triple(
                PatternTerm::Var(t1),
                PatternTerm::iri(source_key),
                PatternTerm::Var(a.clone()),
            ))
            .and(GraphPattern::triple(
                PatternTerm::Var(t2),
                PatternTerm::iri(target_key),
                PatternTerm::Var(b.clone()),
            ));
            return Ok(self.select(Vec::new(), vec![a, b], pattern));
        }
        self.count(Case::ClassRelation);
        let rel = self
            .schema
            .relation(name)
            .ok_or_else(|| RaError::UnknownRelation(name.to_string()))?;
        let subject = self.fresh();
        let mut pattern = GraphPattern::triple(
            PatternTerm::Var(subject.clone()),
            PatternTerm::iri(vocab::RDF_TYPE),
            PatternTerm::iri(generate_iri(IriTemplate::Class { relation: name }, &base)?),
        );
        for a in &rel.attributes {
            let property = generate_iri(
                IriTemplate::Datatype {
                    relation: name,
                    attribute: a,
                },
                &base,
            )?;
            pattern = pattern.opt(GraphPattern::triple(
                PatternTerm::Var(subject.clone()),
                PatternTerm::iri(property),
                PatternTerm::Var(attr_var(a)),
            ));
        }
        let keep = rel.attributes.iter().map(|a| attr_var(a)).collect();
        Ok(self.select(Vec::new(), keep, pattern))
    }

    /// One `MINUS` branch per non-empty set of bound attributes, plus an
    /// `OPT` branch for the all-unbound mapping.
    fn difference(&mut self, attrs: &[String], lhs: &GraphPattern, rhs: &GraphPattern) -> GraphPattern {
        let vars: Vec<Var> = attrs.iter().map(|a| attr_var(a)).collect();
        let exactly_bound = |mask: usize| {
            vars.iter()
                .enumerate()
                .map(|(i, v)| {
                    if mask >> i & 1 == 1 {
                        Condition::bound(v)
                    } else {
                        Condition::bound(v).not()
                    }
                })
                .reduce(Condition::and)
                .expect("difference operands have attributes")
        };
        let mut branches = Vec::new();
        for mask in 1..(1usize << vars.len()) {
            let cond = exactly_bound(mask);
            let l = self.refreshed(lhs).filter(cond.clone());
            let r = self.refreshed(rhs).filter(cond);
            branches.push(l.minus(r));
        }
        let none_bound = exactly_bound(0);
        let (x, y, z) = (self.fresh(), self.fresh(), self.fresh());
        let witness = GraphPattern::triple(PatternTerm::Var(x.clone()), PatternTerm::Var(y), PatternTerm::Var(z));
        let l = self.refreshed(lhs).filter(none_bound.clone());
        let r = self.refreshed(rhs).filter(none_bound);
        branches.push(l.opt(r.and(witness)).filter(Condition::bound(&x).not()));
        branches
            .into_iter()
            .reduce(GraphPattern::union)
            .expect("at least one branch")
    }
}

fn attr_var(attribute: &str) -> Var {
    Var::new(attribute)
}

/// Compiles `query` with the default difference cap.
pub fn translate(
    query: &RaExpr,
    schema: &RelationalSchema,
    constraints: &ConstraintSet,
    base: &str,
) -> Result<GraphPattern, TranslateError> {
    Translator::new(schema, constraints, base).translate(query)
}
