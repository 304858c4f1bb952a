//! Expected outputs for the worked examples, written out by hand.

use std::collections::BTreeSet;

use rdb2owl::directmap::{
    extract_ontology, generate_iri, object_property_iri, tuple_identifier, BinaryRelation, IriTemplate, ObjectProperty,
    PropertyOrigin,
};
use rdb2owl::rdfgraph::{vocab, Term};
use rdb2owl::relmodel::Database;
use rdb2owl::sparql::{Condition, GraphPattern, PatternTerm, Var};

const BASE: &str = "http://example.edu/db/";

macro_rules! same {
    ($a:expr, $b:expr $(,)?) => {{
        let (a, b) = (&$a, &$b);
        if a != b {
            return Err(format!("{} is {:?}, expected {:?}", stringify!($a), a, b));
        }
    }};
}

/// The eight triples listed for the two-row STUDENT database, in the order given.
pub const DUPLICATE_KEY_LISTED: [&str; 8] = [
    "<http://example.edu/db/STUDENT> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .",
    "<http://example.edu/db/STUDENT#NAME> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#DatatypeProperty> .",
    "<http://example.edu/db/STUDENT#NAME> <http://www.w3.org/2000/01/rdf-schema#domain> <http://example.edu/db/STUDENT> .",
    "<http://example.edu/db/STUDENT#SID> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#DatatypeProperty> .",
    "<http://example.edu/db/STUDENT#SID> <http://www.w3.org/2000/01/rdf-schema#domain> <http://example.edu/db/STUDENT> .",
    "<http://example.edu/db/STUDENT#SID=1> <http://example.edu/db/STUDENT#NAME> \"John\" .",
    "<http://example.edu/db/STUDENT#SID=1> <http://example.edu/db/STUDENT#NAME> \"Peter\" .",
    "<http://example.edu/db/STUDENT#SID=1> <http://example.edu/db/STUDENT#SID> \"1\" .",
];

pub const DUPLICATE_KEY_TABLE_TRIPLE: &str =
    "<http://example.edu/db/STUDENT#SID=1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://example.edu/db/STUDENT> .";

fn var(n: &str) -> PatternTerm {
    PatternTerm::var(n)
}

fn iri(local: &str) -> PatternTerm {
    PatternTerm::iri(format!("{BASE}{local}"))
}

pub fn v(n: &str) -> Var {
    Var::new(n)
}

/// `SELECT {?SID, ?NAME} (((?X type :STUDENT) OPT (?X :STUDENT#SID ?SID)) OPT (?X :STUDENT#NAME ?NAME))`
pub fn expected_student(x: &str) -> GraphPattern {
    GraphPattern::select(
        vec![v("SID"), v("NAME")],
        GraphPattern::triple(var(x), PatternTerm::iri(vocab::RDF_TYPE), iri("STUDENT"))
            .opt(GraphPattern::triple(var(x), iri("STUDENT#SID"), var("SID")))
            .opt(GraphPattern::triple(var(x), iri("STUDENT#NAME"), var("NAME"))),
    )
}

/// `SELECT {?SID, ?CID} ((?T1 :ENROLLED#SID,CID,SID,CID ?T2) AND (?T1 :STUDENT#SID ?SID) AND (?T2 :COURSE#CID ?CID))`
pub fn expected_enrolled(t1: &str, t2: &str) -> GraphPattern {
    GraphPattern::select(
        vec![v("SID"), v("CID")],
        GraphPattern::triple(var(t1), iri("ENROLLED#SID,CID,SID,CID"), var(t2))
            .and(GraphPattern::triple(var(t1), iri("STUDENT#SID"), var("SID")))
            .and(GraphPattern::triple(var(t2), iri("COURSE#CID"), var("CID"))),
    )
}

fn name_is_juan() -> Condition {
    Condition::EqConst(v("NAME"), Term::literal("Juan"))
}

pub fn golden_queries() -> Vec<(&'static str, &'static str, GraphPattern)> {
    let bound_sid = Condition::bound(&v("SID"));
    vec![
        ("student", "STUDENT", expected_student("__fresh0")),
        ("enrolled", "ENROLLED", expected_enrolled("__fresh0", "__fresh1")),
        (
            "select_juan",
            "select(NAME=Juan, STUDENT)",
            expected_student("__fresh0").filter(name_is_juan()),
        ),
        (
            "juan_join_enrolled",
            "join(select(NAME=Juan, STUDENT), ENROLLED)",
            expected_student("__fresh0")
                .filter(name_is_juan())
                .filter(bound_sid.clone())
                .and(expected_enrolled("__fresh1", "__fresh2").filter(bound_sid)),
        ),
    ]
}

/// Compares the university ontology and the five example IRIs with the
/// expected values, reporting the first mismatch.
pub fn check_university_ontology(db: &Database) -> Result<(), String> {
    let m = extract_ontology(&db.schema, &db.constraints);
    let enrolled = BinaryRelation {
        relation: "ENROLLED".into(),
        attr_a: "SID".into(),
        attr_b: "CID".into(),
        source: "STUDENT".into(),
        source_attr: "SID".into(),
        target: "COURSE".into(),
        target_attr: "CID".into(),
    };
    same!(m.binary_relations, BTreeSet::from([enrolled.clone()]));
    let classes: BTreeSet<String> = ["STUDENT", "COURSE", "DEPT"].map(String::from).into();
    same!(m.classes, classes);
    let from_fk = ObjectProperty {
        attributes: vec!["CODE".into()],
        referenced: vec!["DID".into()],
        source: "COURSE".into(),
        target: "DEPT".into(),
        origin: PropertyOrigin::ForeignKey,
    };
    let ops: Vec<&ObjectProperty> = m
        .object_properties
        .iter()
        .filter(|o| o.origin == PropertyOrigin::ForeignKey)
        .collect();
    same!(ops, vec![&from_fk]);
    let dtps: BTreeSet<(String, String)> = m
        .datatype_properties
        .iter()
        .map(|d| (d.relation.clone(), d.attribute.clone()))
        .collect();
    let expected: BTreeSet<(String, String)> = [
        ("STUDENT", "SID"),
        ("STUDENT", "NAME"),
        ("COURSE", "CID"),
        ("COURSE", "TITLE"),
        ("COURSE", "CODE"),
        ("DEPT", "DID"),
        ("DEPT", "NAME"),
    ]
    .iter()
    .map(|(r, a)| (r.to_string(), a.to_string()))
    .collect();
    same!(dtps, expected);

    // The five example IRIs.
    same!(
        generate_iri(IriTemplate::Class { relation: "STUDENT" }, BASE).map_err(|e| e.to_string())?,
        "http://example.edu/db/STUDENT"
    );
    same!(
        generate_iri(
            IriTemplate::Datatype {
                relation: "STUDENT",
                attribute: "NAME"
            },
            BASE
        )
        .map_err(|e| e.to_string())?,
        "http://example.edu/db/STUDENT#NAME"
    );
    same!(
        generate_iri(IriTemplate::BinaryRelation(&enrolled), BASE).map_err(|e| e.to_string())?,
        "http://example.edu/db/ENROLLED#SID,CID,SID,CID"
    );
    same!(
        object_property_iri(&from_fk, BASE).map_err(|e| e.to_string())?,
        "http://example.edu/db/COURSE,DEPT#CODE,DID"
    );
    let row = db
        .instance
        .rows("STUDENT")
        .iter()
        .find(|r| r.get("SID").as_str() == Some("1"))
        .ok_or("STUDENT row with SID 1 missing")?;
    same!(
        tuple_identifier(row, "STUDENT", &db.constraints, BASE).map_err(|e| e.to_string())?,
        Term::iri("http://example.edu/db/STUDENT#SID=1")
    );
    Ok(())
}
