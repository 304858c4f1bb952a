//! Direct mapping of relational databases into RDF graphs with OWL vocabulary.
//!
//! The crate is organised bottom-up:
//!
//! - [`relmodel`]: schemas, PK/FK constraints and NULL-bearing instances.
//! - [`relalg`]: relational algebra with the NULL-aware evaluation used in
//!   practice by database systems, plus outer-join desugaring.
//! - [`rdfgraph`]: RDF terms, graphs, N-Triples and the consistency test.
//! - [`sparql`]: the algebraic SPARQL fragment (AND, OPT, UNION, MINUS,
//!   FILTER, nested SELECT with AS) and its set-based evaluator.
//! - [`directmap`]: the three direct mappings (`DM`, `DM_pk`, `DM_pk+fk`).
//! - [`inverse`]: recovery of the relational instance from a mapped graph.
//! - [`ra2sparql`]: the relational algebra to SPARQL compiler.
//! - [`propcheck`]: seeded random generators and property checks.

pub mod directmap;
pub mod inverse;
pub mod propcheck;
pub mod ra2sparql;
pub mod rdfgraph;
pub mod relalg;
pub mod relmodel;
pub mod sparql;

pub use directmap::{direct_map, MappingConfig, Variant};
pub use rdfgraph::{RdfGraph, Term, Triple};
pub use relalg::RaExpr;
pub use relmodel::{Database, Value};
pub use sparql::{GraphPattern, SolutionMapping};

/// Base IRI used when neither the document nor the caller provides one.
pub const DEFAULT_BASE: &str = "http://example.edu/db/";
