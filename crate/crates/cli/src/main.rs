//! `rdb2owl`: map relational databases to RDF, compile relational algebra
//! to SPARQL, and check the mapping's properties.
//!
//! Exit status is 0 on success, 1 when a checked property or constraint
//! fails, and 2 on usage, input or parse errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rdb2owl::directmap::{direct_map, direct_map_traced, MappingConfig, Variant};
use rdb2owl::inverse::recover_database;
use rdb2owl::propcheck::{
    check_database, check_information_preservation, check_monotonicity, check_query_preservation,
    check_semantics_preservation, GeneratorParams, Property, PropertyReport, QueryParams,
};
use rdb2owl::ra2sparql::Translator;
use rdb2owl::rdfgraph::serialize_ntriples;
use rdb2owl::relalg::parse_query;
use rdb2owl::relmodel::{load_database_file, satisfies, ConstraintSet, Database, Verdict};
use rdb2owl::sparql::{eval_pattern, serialize_query, Var};
use rdb2owl::{Term, DEFAULT_BASE};

const BASE_ENV: &str = "RDB2OWL_BASE";

#[derive(Parser)]
#[command(
    name = "rdb2owl",
    version,
    about = "Direct mapping of relational databases to RDF/OWL"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BaseArg {
    /// Base IRI. Defaults to the document's `base`, then $RDB2OWL_BASE, then http://example.edu/db/.
    #[arg(long)]
    base: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Dm,
    DmPk,
    DmPkFk,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Dm => Variant::Dm,
            VariantArg::DmPk => Variant::DmPk,
            VariantArg::DmPkFk => Variant::DmPkFk,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Info,
    Query,
    Mono,
    Sem,
}

impl From<PropertyArg> for Property {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::Info => Property::Information,
            PropertyArg::Query => Property::Query,
            PropertyArg::Mono => Property::Monotonicity,
            PropertyArg::Sem => Property::Semantics,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Map a database to N-Triples.
    Map {
        db: PathBuf,
        #[arg(long, value_enum, default_value = "dm")]
        variant: VariantArg,
        #[command(flatten)]
        base: BaseArg,
        /// Output file (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write which rule produced each triple. Without a path the trace goes
        /// next to the output file, or to stderr.
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "")]
        trace: Option<String>,
    },
    /// Check the instance against its primary and foreign keys.
    Check { db: PathBuf },
    /// Compile a relational algebra expression to SPARQL.
    CompileQuery {
        db: PathBuf,
        expr: String,
        #[command(flatten)]
        base: BaseArg,
        /// Print the pattern tree as JSON alongside the query text.
        #[arg(long)]
        json: bool,
    },
    /// Answer a relational algebra query through the compiled SPARQL over the mapped graph.
    Query {
        db: PathBuf,
        expr: String,
        #[command(flatten)]
        base: BaseArg,
    },
    /// Map, recover, and compare the recovered instance with the original.
    Roundtrip {
        db: PathBuf,
        #[command(flatten)]
        base: BaseArg,
        /// Write the recovered database here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a property on a database or on seeded random databases.
    Verify {
        /// Database to check (omit with --random).
        db: Option<PathBuf>,
        /// Generate databases from the seed instead of reading one.
        #[arg(long, conflicts_with = "db", required_unless_present = "db")]
        random: bool,
        /// Master seed; trial seeds are derived from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        property: PropertyArg,
        /// Default: dm for monotonicity, dm-pk-fk for semantics.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Maximum depth of random queries.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Maximum rows per relation (default 8, or 6 for query checks).
        #[arg(long)]
        max_rows: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// An error carrying its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn runtime(error: anyhow::Error) -> Failure {
    Failure { code: 1, error }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<Database, Failure> {
    let loaded = load_database_file(path)
        .with_context(|| format!("cannot load {}", path.display()))
        .map_err(usage)?;
    if loaded.duplicates_removed > 0 {
        eprintln!("note: dropped {} duplicate row(s)", loaded.duplicates_removed);
    }
    Ok(loaded.database)
}

/// Flag, then document, then environment, then the built-in default.
fn resolve_base(flag: &BaseArg, db: &Database) -> String {
    flag.base
        .clone()
        .or_else(|| db.base.clone())
        .or_else(|| std::env::var(BASE_ENV).ok().filter(|b| !b.is_empty()))
        .unwrap_or_else(|| DEFAULT_BASE.to_string())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(runtime),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to stdout")
            .map_err(runtime),
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Map {
            db,
            variant,
            base,
            output,
            trace,
        } => {
            let db = load(&db)?;
            let config = MappingConfig::new(resolve_base(&base, &db), variant.into());
            let Some(trace_path) = trace else {
                let graph = direct_map(&db, &config).map_err(|e| usage(e.into()))?;
                write_output(output.as_deref(), &serialize_ntriples(&graph))?;
                return Ok(0);
            };
            let (graph, trace) = direct_map_traced(&db, &config).map_err(|e| usage(e.into()))?;
            write_output(output.as_deref(), &serialize_ntriples(&graph))?;
            let trace_file = match (trace_path.is_empty(), &output) {
                (false, _) => Some(PathBuf::from(trace_path)),
                (true, Some(out)) => {
                    let mut name = out.clone().into_os_string();
                    name.push(".trace");
                    Some(PathBuf::from(name))
                }
                (true, None) => None,
            };
            match trace_file {
                Some(p) => fs::write(&p, trace.to_text())
                    .with_context(|| format!("cannot write {}", p.display()))
                    .map_err(runtime)?,
                None => eprint!("{}", trace.to_text()),
            }
            Ok(0)
        }
        Command::Check { db } => {
            let db = load(&db)?;
            match satisfies(&db.instance, &db.constraints) {
                Verdict::Holds => {
                    println!("satisfied");
                    Ok(0)
                }
                Verdict::Violated(violations) => {
                    println!("violated");
                    for v in violations {
                        println!("  {v}");
                    }
                    Ok(1)
                }
            }
        }
        Command::CompileQuery { db, expr, base, json } => {
            let db = load(&db)?;
            let base = resolve_base(&base, &db);
            let (vars, pattern) = compile(&db, &expr, &base)?;
            let text = serialize_query(&vars, &pattern);
            if json {
                let doc = serde_json::json!({ "sparql": text, "pattern": pattern });
                let mut out = serde_json::to_string_pretty(&doc).map_err(|e| runtime(e.into()))?;
                out.push('\n');
                write_output(None, &out)?;
            } else {
                write_output(None, &text)?;
            }
            Ok(0)
        }
        Command::Query { db, expr, base } => {
            let db = load(&db)?;
            let base = resolve_base(&base, &db);
            let (vars, pattern) = compile(&db, &expr, &base)?;
            let graph = direct_map(&db, &MappingConfig::new(&base, Variant::Dm)).map_err(|e| usage(e.into()))?;
            let answers = eval_pattern(&pattern, &graph).map_err(|e| runtime(e.into()))?;
            let rows: Vec<Vec<String>> = answers
                .iter()
                .map(|mu| {
                    vars.iter()
                        .map(|v| match mu.get(v) {
                            Some(Term::Literal(s)) => s.clone(),
                            Some(other) => other.to_string(),
                            None => "NULL".to_string(),
                        })
                        .collect()
                })
                .collect();
            let header: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
            write_output(None, &render_table(&header, &rows))?;
            Ok(0)
        }
        Command::Roundtrip { db, base, output } => {
            let db = load(&db)?;
            let base = resolve_base(&base, &db);
            let graph = direct_map(&db, &MappingConfig::new(&base, Variant::Dm)).map_err(|e| usage(e.into()))?;
            let (mut schema, instance) = recover_database(&graph, &base).map_err(|e| runtime(e.into()))?;
            // Present recovered columns in the original order when they match.
            for rel in &mut schema.relations {
                if let Some(orig) = db.schema.relation(&rel.name) {
                    let mut a = orig.attributes.clone();
                    let mut b = rel.attributes.clone();
                    a.sort();
                    b.sort();
                    if a == b {
                        rel.attributes = orig.attributes.clone();
                    }
                }
            }
            let identical = {
                let mut names: Vec<&str> = schema.names().collect();
                let mut orig: Vec<&str> = db.schema.names().collect();
                names.sort();
                orig.sort();
                names == orig && orig.iter().all(|n| instance.value_set(n) == db.instance.value_set(n))
            };
            let recovered = Database::new(schema, ConstraintSet::default(), instance)
                .map_err(|e| runtime(e.into()))?
                .with_base(base);
            write_output(output.as_deref(), &(recovered.to_json() + "\n"))?;
            let status = if identical { "identical" } else { "different" };
            if output.is_some() {
                println!("{status}");
            } else {
                eprintln!("{status}");
            }
            Ok(if identical { 0 } else { 1 })
        }
        Command::Verify {
            db,
            random: _,
            seed,
            property,
            variant,
            trials,
            depth,
            max_rows,
            format,
        } => {
            let property = Property::from(property);
            let variant = variant.map(Variant::from).unwrap_or(match property {
                Property::Semantics => Variant::DmPkFk,
                _ => Variant::Dm,
            });
            let q = QueryParams {
                depth,
                ..QueryParams::default()
            };
            let report = match db {
                Some(path) => {
                    let db = load(&path)?;
                    check_database(&db, property, variant, seed, trials, &q)
                }
                None => {
                    let mut p = GeneratorParams::default().with_seed(seed);
                    p.max_rows = max_rows.unwrap_or(if property == Property::Query { 6 } else { p.max_rows });
                    random_report(&p, property, variant, trials, &q)
                }
            };
            emit_report(&report, format)?;
            Ok(if report.passed { 0 } else { 1 })
        }
    }
}

fn random_report(
    p: &GeneratorParams,
    property: Property,
    variant: Variant,
    trials: usize,
    q: &QueryParams,
) -> PropertyReport {
    match property {
        Property::Information => check_information_preservation(p, trials),
        Property::Query => check_query_preservation(p, q, trials),
        Property::Monotonicity => check_monotonicity(p, variant, trials),
        Property::Semantics => check_semantics_preservation(p, variant, trials),
    }
}

fn emit_report(report: &PropertyReport, format: Format) -> Result<(), Failure> {
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    write_output(None, &text)
}

fn compile(db: &Database, expr: &str, base: &str) -> Result<(Vec<Var>, rdb2owl::GraphPattern), Failure> {
    let query = parse_query(expr, &db.schema)
        .with_context(|| format!("cannot parse query `{expr}`"))
        .map_err(usage)?;
    let attributes = query.attributes(&db.schema).map_err(|e| usage(e.into()))?;
    let pattern = Translator::new(&db.schema, &db.constraints, base)
        .translate(&query)
        .map_err(|e| usage(e.into()))?;
    Ok((attributes.into_iter().map(Var::new).collect(), pattern))
}

fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join(" | ").trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&(rule.join("-+-") + "\n"));
    for row in rows {
        out.push_str(&line(row));
    }
    out.push_str(&format!(
        "({} row{})\n",
        rows.len(),
        if rows.len() == 1 { "" } else { "s" }
    ));
    out
}
