//! Relational algebra over NULL-bearing instances.
//!
//! Evaluation follows the NULL-aware reading used throughout the crate:
//! `A ≠ a` and joins never match NULL, while union and difference compare
//! whole tuples, so a NULL there is equal to another NULL. Outer joins are not
//! part of the core tree; [`desugar_left_outer_join`] and friends rewrite them
//! into the eight basic operators.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::relmodel::{Instance, RelationalSchema, Tuple, Value, FRESH_PREFIX};

/// Selection condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Eq(String, String),
    Neq(String, String),
    IsNull(String),
    IsNotNull(String),
}

impl Condition {
    pub fn attribute(&self) -> &str {
        match self {
            Condition::Eq(a, _) | Condition::Neq(a, _) | Condition::IsNull(a) | Condition::IsNotNull(a) => a,
        }
    }

    pub fn holds(&self, tuple: &Tuple) -> bool {
        let v = tuple.get(self.attribute()).unwrap_or(&Value::Null);
        match (self, v) {
            (Condition::Eq(_, c), Value::Const(x)) => x == c,
            (Condition::Neq(_, c), Value::Const(x)) => x != c,
            (Condition::IsNull(_), v) => v.is_null(),
            (Condition::IsNotNull(_), v) => !v.is_null(),
            (Condition::Eq(..) | Condition::Neq(..), Value::Null) => false,
        }
    }
}

/// A relational algebra expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RaExpr {
    Relation(String),
    NullRel(String),
    Select(Condition, Box<RaExpr>),
    Project(Vec<String>, Box<RaExpr>),
    Rename {
        from: String,
        to: String,
        input: Box<RaExpr>,
    },
    Join(Box<RaExpr>, Box<RaExpr>),
    Union(Box<RaExpr>, Box<RaExpr>),
    Difference(Box<RaExpr>, Box<RaExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RaError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("attribute `{attribute}` is not produced by `{expr}`")]
    UnknownAttribute { attribute: String, expr: String },
    #[error("rename target `{0}` already exists")]
    RenameTargetExists(String),
    #[error("projection lists no attributes")]
    EmptyProjection,
    #[error("attribute `{0}` is listed twice in a projection")]
    DuplicateProjection(String),
    #[error("operands of {op} have different attributes: {left:?} vs {right:?}")]
    AttributeMismatch {
        op: &'static str,
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error("outer join operands share no attributes")]
    NoSharedAttributes,
    #[error("attribute name `{0}` is reserved")]
    ReservedAttribute(String),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

impl RaExpr {
    pub fn relation(name: &str) -> Self {
        RaExpr::Relation(name.to_string())
    }

    pub fn null_rel(attribute: &str) -> Self {
        RaExpr::NullRel(attribute.to_string())
    }

    pub fn select(self, condition: Condition) -> Self {
        RaExpr::Select(condition, Box::new(self))
    }

    pub fn project(self, attributes: &[&str]) -> Self {
        RaExpr::Project(attributes.iter().map(|a| a.to_string()).collect(), Box::new(self))
    }

    pub fn rename(self, from: &str, to: &str) -> Self {
        RaExpr::Rename {
            from: from.to_string(),
            to: to.to_string(),
            input: Box::new(self),
        }
    }

    pub fn join(self, other: RaExpr) -> Self {
        RaExpr::Join(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: RaExpr) -> Self {
        RaExpr::Union(Box::new(self), Box::new(other))
    }

    pub fn minus(self, other: RaExpr) -> Self {
        RaExpr::Difference(Box::new(self), Box::new(other))
    }

    /// The attribute list of the expression. Relations contribute their
    /// schema order; a join lists the left attributes followed by the
    /// right-only ones; a rename keeps the renamed attribute in place.
    pub fn attributes(&self, schema: &RelationalSchema) -> Result<Vec<String>, RaError> {
        match self {
            RaExpr::Relation(name) => schema
                .relation(name)
                .map(|r| r.attributes.clone())
                .ok_or_else(|| RaError::UnknownRelation(name.clone())),
            RaExpr::NullRel(a) => {
                check_attribute_name(a)?;
                Ok(vec![a.clone()])
            }
            RaExpr::Select(cond, input) => {
                let attrs = input.attributes(schema)?;
                require(&attrs, cond.attribute(), input)?;
                Ok(attrs)
            }
            RaExpr::Project(keep, input) => {
                let attrs = input.attributes(schema)?;
                if keep.is_empty() {
                    return Err(RaError::EmptyProjection);
                }
                let mut seen = BTreeSet::new();
                for a in keep {
                    require(&attrs, a, input)?;
                    if !seen.insert(a) {
                        return Err(RaError::DuplicateProjection(a.clone()));
                    }
                }
                Ok(keep.clone())
            }
            RaExpr::Rename { from, to, input } => {
                let attrs = input.attributes(schema)?;
                require(&attrs, from, input)?;
                check_attribute_name(to)?;
                if attrs.contains(to) {
                    return Err(RaError::RenameTargetExists(to.clone()));
                }
                Ok(attrs
                    .into_iter()
                    .map(|a| if &a == from { to.clone() } else { a })
                    .collect())
            }
            RaExpr::Join(l, r) => {
                let mut attrs = l.attributes(schema)?;
                for a in r.attributes(schema)? {
                    if !attrs.contains(&a) {
                        attrs.push(a);
                    }
                }
                Ok(attrs)
            }
            RaExpr::Union(l, r) | RaExpr::Difference(l, r) => {
                let left = l.attributes(schema)?;
                let right = r.attributes(schema)?;
                let ls: BTreeSet<_> = left.iter().collect();
                let rs: BTreeSet<_> = right.iter().collect();
                if ls != rs {
                    let op = if matches!(self, RaExpr::Union(..)) {
                        "union"
                    } else {
                        "difference"
                    };
                    return Err(RaError::AttributeMismatch { op, left, right });
                }
                Ok(left)
            }
        }
    }

    /// Number of operator nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            RaExpr::Relation(_) | RaExpr::NullRel(_) => 0,
            RaExpr::Select(_, e) | RaExpr::Project(_, e) | RaExpr::Rename { input: e, .. } => 1 + e.depth(),
            RaExpr::Join(l, r) | RaExpr::Union(l, r) | RaExpr::Difference(l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

fn require(attrs: &[String], attribute: &str, expr: &RaExpr) -> Result<(), RaError> {
    if attrs.iter().any(|a| a == attribute) {
        Ok(())
    } else {
        Err(RaError::UnknownAttribute {
            attribute: attribute.to_string(),
            expr: expr.to_string(),
        })
    }
}

fn check_attribute_name(a: &str) -> Result<(), RaError> {
    if a.starts_with(FRESH_PREFIX) {
        Err(RaError::ReservedAttribute(a.to_string()))
    } else {
        Ok(())
    }
}

/// The answer to a query: an attribute list and a set of tuples over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    pub attributes: Vec<String>,
    pub tuples: BTreeSet<Tuple>,
}

/// Evaluates `expr` over `instance`.
pub fn eval(expr: &RaExpr, schema: &RelationalSchema, instance: &Instance) -> Result<ResultSet, RaError> {
    let attributes = expr.attributes(schema)?;
    let tuples = eval_tuples(expr, instance);
    Ok(ResultSet { attributes, tuples })
}

// Only called on expressions already checked by `attributes`.
fn eval_tuples(expr: &RaExpr, instance: &Instance) -> BTreeSet<Tuple> {
    match expr {
        RaExpr::Relation(name) => instance.value_set(name),
        RaExpr::NullRel(a) => BTreeSet::from([Tuple::from([(a.clone(), Value::Null)])]),
        RaExpr::Select(cond, input) => eval_tuples(input, instance)
            .into_iter()
            .filter(|t| cond.holds(t))
            .collect(),
        RaExpr::Project(keep, input) => eval_tuples(input, instance)
            .into_iter()
            .map(|t| t.into_iter().filter(|(a, _)| keep.contains(a)).collect())
            .collect(),
        RaExpr::Rename { from, to, input } => eval_tuples(input, instance)
            .into_iter()
            .map(|mut t| {
                let v = t.remove(from).unwrap_or(Value::Null);
                t.insert(to.clone(), v);
                t
            })
            .collect(),
        RaExpr::Join(l, r) => {
            let left = eval_tuples(l, instance);
            let right = eval_tuples(r, instance);
            let mut out = BTreeSet::new();
            for t1 in &left {
                for t2 in &right {
                    let joinable = t1.iter().all(|(a, v)| match t2.get(a) {
                        Some(w) => !v.is_null() && v == w,
                        None => true,
                    });
                    if joinable {
                        let mut t = t1.clone();
                        t.extend(t2.iter().map(|(a, v)| (a.clone(), v.clone())));
                        out.insert(t);
                    }
                }
            }
            out
        }
        RaExpr::Union(l, r) => {
            let mut out = eval_tuples(l, instance);
            out.extend(eval_tuples(r, instance));
            out
        }
        RaExpr::Difference(l, r) => {
            let right = eval_tuples(r, instance);
            eval_tuples(l, instance)
                .into_iter()
                .filter(|t| !right.contains(t))
                .collect()
        }
    }
}

fn fold_union(parts: impl IntoIterator<Item = RaExpr>) -> Option<RaExpr> {
    parts.into_iter().reduce(RaExpr::union)
}

/// Rewrites the left outer join of `lhs` and `rhs` into basic operators:
/// the inner join, united with the unmatched left rows padded by a product of
/// `NULL_B` relations for the right-only attributes `B`. Unmatched rows are
/// those with a NULL in some shared attribute plus those whose shared values
/// do not occur in `rhs`.
pub fn desugar_left_outer_join(lhs: &RaExpr, rhs: &RaExpr, schema: &RelationalSchema) -> Result<RaExpr, RaError> {
    let left = lhs.attributes(schema)?;
    let right = rhs.attributes(schema)?;
    let shared: Vec<String> = left.iter().filter(|a| right.contains(a)).cloned().collect();
    if shared.is_empty() {
        return Err(RaError::NoSharedAttributes);
    }
    let extra: Vec<&String> = right.iter().filter(|b| !left.contains(b)).collect();

    let matched = lhs.clone().join(rhs.clone());
    let null_keys = shared.iter().map(|a| lhs.clone().select(Condition::IsNull(a.clone())));
    let keys = RaExpr::Project(shared.clone(), Box::new(lhs.clone()));
    let non_null_keys = shared
        .iter()
        .rev()
        .fold(keys, |e, a| e.select(Condition::IsNotNull(a.clone())));
    let missing_keys = non_null_keys.minus(RaExpr::Project(shared.clone(), Box::new(rhs.clone())));
    let unmatched =
        fold_union(null_keys.chain([lhs.clone().join(missing_keys)])).expect("at least one shared attribute");
    let padded = match extra.iter().map(|b| RaExpr::null_rel(b)).reduce(RaExpr::join) {
        Some(nulls) => unmatched.join(nulls),
        None => unmatched,
    };
    Ok(matched.union(padded))
}

/// Right outer join: the left outer join with the operands swapped.
pub fn desugar_right_outer_join(lhs: &RaExpr, rhs: &RaExpr, schema: &RelationalSchema) -> Result<RaExpr, RaError> {
    desugar_left_outer_join(rhs, lhs, schema)
}

/// Full outer join: union of the left and right outer joins.
pub fn desugar_full_outer_join(lhs: &RaExpr, rhs: &RaExpr, schema: &RelationalSchema) -> Result<RaExpr, RaError> {
    Ok(desugar_left_outer_join(lhs, rhs, schema)?.union(desugar_right_outer_join(lhs, rhs, schema)?))
}

// ---------------------------------------------------------------------------
// Text syntax

fn is_plain_word(s: &str) -> bool {
    !s.is_empty() && !s.contains("->") && s.chars().all(|c| !c.is_whitespace() && !"(){},=!\"".contains(c))
}

fn write_word(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if is_plain_word(s) {
        f.write_str(s)
    } else {
        f.write_str("\"")?;
        for c in s.chars() {
            if c == '"' || c == '\\' {
                f.write_str("\\")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("\"")
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Eq(a, v) => {
                write_word(f, a)?;
                f.write_str("=")?;
                write_word(f, v)
            }
            Condition::Neq(a, v) => {
                write_word(f, a)?;
                f.write_str("!=")?;
                write_word(f, v)
            }
            Condition::IsNull(a) => {
                f.write_str("isnull(")?;
                write_word(f, a)?;
                f.write_str(")")
            }
            Condition::IsNotNull(a) => {
                f.write_str("isnotnull(")?;
                write_word(f, a)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for RaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RaExpr::Relation(name) => write_word(f, name),
            RaExpr::NullRel(a) => {
                f.write_str("nullrel(")?;
                write_word(f, a)?;
                f.write_str(")")
            }
            RaExpr::Select(c, e) => write!(f, "select({c}, {e})"),
            RaExpr::Project(keep, e) => {
                f.write_str("project({")?;
                for (i, a) in keep.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write_word(f, a)?;
                }
                write!(f, "}}, {e})")
            }
            RaExpr::Rename { from, to, input } => {
                f.write_str("rename(")?;
                write_word(f, from)?;
                f.write_str("->")?;
                write_word(f, to)?;
                write!(f, ", {input})")
            }
            RaExpr::Join(l, r) => write!(f, "join({l}, {r})"),
            RaExpr::Union(l, r) => write!(f, "union({l}, {r})"),
            RaExpr::Difference(l, r) => write!(f, "diff({l}, {r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    Quoted(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Eq,
    Neq,
    Arrow,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, RaError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        let single = match c {
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            '{' => Some(Token::LBrace),
            '}' => Some(Token::RBrace),
            ',' => Some(Token::Comma),
            '=' => Some(Token::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((offset, tok));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '!' && next == Some('=') {
            out.push((offset, Token::Neq));
            i += 2;
        } else if c == '-' && next == Some('>') {
            out.push((offset, Token::Arrow));
            i += 2;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => {
                        return Err(RaError::Parse {
                            offset,
                            message: "unterminated string".into(),
                        })
                    }
                    Some((_, '"')) => break,
                    Some((_, '\\')) => {
                        let Some(&(_, esc)) = chars.get(i + 1) else {
                            return Err(RaError::Parse {
                                offset,
                                message: "unterminated string".into(),
                            });
                        };
                        s.push(esc);
                        i += 2;
                    }
                    Some(&(_, ch)) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push((offset, Token::Quoted(s)));
        } else if c == '!' {
            return Err(RaError::Parse {
                offset,
                message: "expected `!=`".into(),
            });
        } else {
            let mut s = String::new();
            while let Some(&(_, ch)) = chars.get(i) {
                let arrow = ch == '-' && chars.get(i + 1).map(|&(_, c)| c) == Some('>');
                if ch.is_whitespace() || "(){},=!\"".contains(ch) || arrow {
                    break;
                }
                s.push(ch);
                i += 1;
            }
            out.push((offset, Token::Word(s)));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    schema: &'a RelationalSchema,
}

impl Parser<'_> {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, RaError> {
        Err(RaError::Parse {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), RaError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, RaError> {
        match self.peek().cloned() {
            Some(Token::Word(w)) | Some(Token::Quoted(w)) => {
                self.pos += 1;
                Ok(w)
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    fn expr(&mut self) -> Result<RaExpr, RaError> {
        let name = match self.peek().cloned() {
            Some(Token::Quoted(w)) => {
                self.pos += 1;
                return Ok(RaExpr::Relation(w));
            }
            Some(Token::Word(w)) => {
                self.pos += 1;
                w
            }
            _ => return self.error("expected an expression"),
        };
        if self.peek() != Some(&Token::LParen) {
            return Ok(RaExpr::Relation(name));
        }
        let op_offset = self.offset();
        self.pos += 1;
        let result = match name.as_str() {
            "select" => {
                let cond = self.condition()?;
                self.expect(Token::Comma, "`,`")?;
                self.expr()?.select(cond)
            }
            "project" => {
                self.expect(Token::LBrace, "`{`")?;
                let mut keep = Vec::new();
                if self.peek() != Some(&Token::RBrace) {
                    keep.push(self.word("an attribute")?);
                    while self.peek() == Some(&Token::Comma) {
                        self.pos += 1;
                        keep.push(self.word("an attribute")?);
                    }
                }
                self.expect(Token::RBrace, "`}`")?;
                self.expect(Token::Comma, "`,`")?;
                RaExpr::Project(keep, Box::new(self.expr()?))
            }
            "rename" => {
                let from = self.word("an attribute")?;
                self.expect(Token::Arrow, "`->`")?;
                let to = self.word("an attribute")?;
                self.expect(Token::Comma, "`,`")?;
                RaExpr::Rename {
                    from,
                    to,
                    input: Box::new(self.expr()?),
                }
            }
            "nullrel" => RaExpr::NullRel(self.word("an attribute")?),
            "join" | "union" | "diff" | "louter" | "router" | "fouter" => {
                let l = self.expr()?;
                self.expect(Token::Comma, "`,`")?;
                let r = self.expr()?;
                let desugared = match name.as_str() {
                    "join" => Ok(l.join(r)),
                    "union" => Ok(l.union(r)),
                    "diff" => Ok(l.minus(r)),
                    "louter" => desugar_left_outer_join(&l, &r, self.schema),
                    "router" => desugar_right_outer_join(&l, &r, self.schema),
                    _ => desugar_full_outer_join(&l, &r, self.schema),
                };
                desugared.map_err(|e| RaError::Parse {
                    offset: op_offset,
                    message: e.to_string(),
                })?
            }
            other => {
                return Err(RaError::Parse {
                    offset: op_offset,
                    message: format!("unknown operator `{other}`"),
                })
            }
        };
        self.expect(Token::RParen, "`)`")?;
        Ok(result)
    }

    fn condition(&mut self) -> Result<Condition, RaError> {
        let head = self.word("a condition")?;
        if self.peek() == Some(&Token::LParen) && (head == "isnull" || head == "isnotnull") {
            self.pos += 1;
            let a = self.word("an attribute")?;
            self.expect(Token::RParen, "`)`")?;
            return Ok(if head == "isnull" {
                Condition::IsNull(a)
            } else {
                Condition::IsNotNull(a)
            });
        }
        match self.peek() {
            Some(Token::Eq) => {
                self.pos += 1;
                Ok(Condition::Eq(head, self.word("a value")?))
            }
            Some(Token::Neq) => {
                self.pos += 1;
                Ok(Condition::Neq(head, self.word("a value")?))
            }
            _ => self.error("expected `=` or `!=`"),
        }
    }
}

/// Parses the textual query syntax. Outer joins (`louter`, `router`,
/// `fouter`) are desugared on the spot, which is why the schema is needed.
/// The result is checked against the schema.
pub fn parse_query(text: &str, schema: &RelationalSchema) -> Result<RaExpr, RaError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        end: text.len(),
        schema,
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return parser.error("trailing input");
    }
    expr.attributes(schema)?;
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relmodel::RelationSchema;

    fn schema() -> RelationalSchema {
        RelationalSchema {
            relations: vec![
                RelationSchema::new("STUDENT", &["SID", "NAME"]),
                RelationSchema::new("ENROLLED", &["SID", "CID"]),
                RelationSchema::new("R", &["A", "B"]),
                RelationSchema::new("S", &["A", "C"]),
            ],
        }
    }

    fn tuple(pairs: &[(&str, Option<&str>)]) -> Tuple {
        pairs
            .iter()
            .map(|(a, v)| (a.to_string(), v.map_or(Value::Null, Value::from)))
            .collect()
    }

    fn instance(rows: &[(&str, Vec<Tuple>)]) -> Instance {
        let mut inst = Instance::empty(&schema());
        for (rel, ts) in rows {
            for t in ts {
                inst.insert(rel, t.clone());
            }
        }
        inst
    }

    #[test]
    fn attribute_rules() {
        let s = schema();
        assert_eq!(RaExpr::null_rel("A").attributes(&s).unwrap(), vec!["A"]);
        assert_eq!(
            RaExpr::relation("STUDENT").rename("SID", "ID").attributes(&s).unwrap(),
            vec!["ID", "NAME"]
        );
        assert_eq!(
            RaExpr::relation("STUDENT")
                .join(RaExpr::relation("ENROLLED"))
                .attributes(&s)
                .unwrap(),
            vec!["SID", "NAME", "CID"]
        );
        assert!(matches!(
            RaExpr::relation("STUDENT").rename("SID", "NAME").attributes(&s),
            Err(RaError::RenameTargetExists(_))
        ));
        assert!(matches!(
            RaExpr::relation("STUDENT")
                .union(RaExpr::relation("ENROLLED"))
                .attributes(&s),
            Err(RaError::AttributeMismatch { .. })
        ));
        assert!(matches!(
            RaExpr::relation("STUDENT").project(&["CID"]).attributes(&s),
            Err(RaError::UnknownAttribute { .. })
        ));
        assert_eq!(
            RaExpr::relation("STUDENT").project(&[]).attributes(&s),
            Err(RaError::EmptyProjection)
        );
        assert!(RaExpr::relation("NOPE").attributes(&s).is_err());
    }

    #[test]
    fn null_relation_holds_one_null_tuple() {
        let s = schema();
        let r = eval(&RaExpr::null_rel("A"), &s, &Instance::empty(&s)).unwrap();
        assert_eq!(r.tuples, BTreeSet::from([tuple(&[("A", None)])]));
    }

    #[test]
    fn neq_skips_null() {
        let s = schema();
        let i = instance(&[(
            "R",
            vec![
                tuple(&[("A", None), ("B", Some("1"))]),
                tuple(&[("A", Some("b")), ("B", Some("1"))]),
            ],
        )]);
        let q = RaExpr::relation("R")
            .select(Condition::Neq("A".into(), "a".into()))
            .project(&["A"]);
        assert_eq!(
            eval(&q, &s, &i).unwrap().tuples,
            BTreeSet::from([tuple(&[("A", Some("b"))])])
        );
        let eq = RaExpr::relation("R").select(Condition::Eq("A".into(), "b".into()));
        assert_eq!(eval(&eq, &s, &i).unwrap().tuples.len(), 1);
    }

    #[test]
    fn join_never_matches_null() {
        let s = schema();
        let i = instance(&[
            ("R", vec![tuple(&[("A", None), ("B", Some("1"))])]),
            ("S", vec![tuple(&[("A", None), ("C", Some("2"))])]),
        ]);
        let q = RaExpr::relation("R").join(RaExpr::relation("S"));
        assert!(eval(&q, &s, &i).unwrap().tuples.is_empty());
    }

    #[test]
    fn union_and_difference_treat_null_as_equal() {
        let s = schema();
        let i = instance(&[("R", vec![tuple(&[("A", None), ("B", Some("1"))])])]);
        let r = RaExpr::relation("R");
        assert!(eval(&r.clone().minus(r.clone()), &s, &i).unwrap().tuples.is_empty());
        assert_eq!(eval(&r.clone().union(r), &s, &i).unwrap().tuples.len(), 1);
    }

    #[test]
    fn projection_and_rename_keep_nulls() {
        let s = schema();
        let i = instance(&[("STUDENT", vec![tuple(&[("SID", Some("1")), ("NAME", None)])])]);
        let q = RaExpr::relation("STUDENT").rename("NAME", "N").project(&["N"]);
        assert_eq!(
            eval(&q, &s, &i).unwrap().tuples,
            BTreeSet::from([tuple(&[("N", None)])])
        );
    }

    #[test]
    fn left_outer_join_examples() {
        let s = schema();
        let loj = desugar_left_outer_join(&RaExpr::relation("R"), &RaExpr::relation("S"), &s).unwrap();
        let matched = instance(&[
            ("R", vec![tuple(&[("A", Some("1")), ("B", Some("x"))])]),
            ("S", vec![tuple(&[("A", Some("1")), ("C", Some("y"))])]),
        ]);
        assert_eq!(
            eval(&loj, &s, &matched).unwrap().tuples,
            BTreeSet::from([tuple(&[("A", Some("1")), ("B", Some("x")), ("C", Some("y"))])])
        );
        let unmatched = instance(&[
            ("R", vec![tuple(&[("A", Some("2")), ("B", Some("x"))])]),
            ("S", vec![tuple(&[("A", Some("1")), ("C", Some("y"))])]),
        ]);
        assert_eq!(
            eval(&loj, &s, &unmatched).unwrap().tuples,
            BTreeSet::from([tuple(&[("A", Some("2")), ("B", Some("x")), ("C", None)])])
        );
        let empty_left = instance(&[("S", vec![tuple(&[("A", Some("1")), ("C", Some("y"))])])]);
        assert!(eval(&loj, &s, &empty_left).unwrap().tuples.is_empty());
        assert_eq!(eval(&loj, &s, &empty_left).unwrap().attributes, vec!["A", "B", "C"]);
    }

    #[test]
    fn outer_join_without_shared_attributes_is_rejected() {
        let s = schema();
        let r = RaExpr::relation("R").project(&["B"]);
        assert_eq!(
            desugar_left_outer_join(&r, &RaExpr::relation("S"), &s),
            Err(RaError::NoSharedAttributes)
        );
    }

    #[test]
    fn outer_join_with_no_extra_attributes_needs_no_padding() {
        let s = schema();
        let keys = RaExpr::relation("S").project(&["A"]);
        let loj = desugar_left_outer_join(&RaExpr::relation("R"), &keys, &s).unwrap();
        let i = instance(&[("R", vec![tuple(&[("A", Some("2")), ("B", Some("x"))])])]);
        assert_eq!(eval(&loj, &s, &i).unwrap().tuples.len(), 1);
    }

    #[test]
    fn parse_and_print() {
        let s = schema();
        let q = parse_query(r#"join(select(NAME=Juan, STUDENT), project({SID,CID}, ENROLLED))"#, &s).unwrap();
        assert_eq!(
            q,
            RaExpr::relation("STUDENT")
                .select(Condition::Eq("NAME".into(), "Juan".into()))
                .join(RaExpr::relation("ENROLLED").project(&["SID", "CID"]))
        );
        assert_eq!(
            q.to_string(),
            "join(select(NAME=Juan, STUDENT), project({SID,CID}, ENROLLED))"
        );

        let q = parse_query(r#"select(NAME!="a b", rename(SID->X, STUDENT))"#, &s).unwrap();
        assert_eq!(parse_query(&q.to_string(), &s).unwrap(), q);

        let q = parse_query("union(select(isnull(A), R), select(isnotnull(A), R))", &s).unwrap();
        assert_eq!(q.depth(), 2);

        let loj = parse_query("louter(R, S)", &s).unwrap();
        assert_eq!(
            loj,
            desugar_left_outer_join(&RaExpr::relation("R"), &RaExpr::relation("S"), &s).unwrap()
        );
        assert!(parse_query("fouter(R, S)", &s).is_ok());
        assert!(parse_query("router(R, S)", &s).is_ok());
        assert!(parse_query("nullrel(A)", &s).is_ok());
    }

    #[test]
    fn parse_errors() {
        let s = schema();
        for bad in [
            "",
            "join(R)",
            "select(A, R)",
            "frob(R)",
            "R S",
            "select(A=\"x, R)",
            "NOPE",
            "project({}, R)",
        ] {
            assert!(parse_query(bad, &s).is_err(), "{bad:?}");
        }
        match parse_query("join(R, S", &s) {
            Err(RaError::Parse { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("{other:?}"),
        }
    }
}
