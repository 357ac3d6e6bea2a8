//! Syntax tree for the supported query subset.

use std::collections::BTreeSet;
use std::fmt;

use super::error::Pos;
use super::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    /// Patterns of every MATCH clause, in textual order.
    pub match_clauses: Vec<Vec<Pattern>>,
    /// Conjunction of comparisons.
    pub where_clause: Vec<Comparison>,
    pub return_items: Vec<ReturnItem>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<Limit>,
    pub create_clauses: Vec<Pattern>,
    pub parameters: BTreeSet<String>,
}

impl Query {
    pub fn is_create(&self) -> bool {
        !self.create_clauses.is_empty()
    }

    pub fn match_patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.match_clauses.iter().flatten()
    }

    pub fn is_aggregating(&self) -> bool {
        self.return_items.iter().any(|i| i.expr.is_aggregate())
    }

    /// Output column names.
    pub fn columns(&self) -> Vec<String> {
        if self.is_create() {
            vec!["nodes_created".into(), "edges_created".into()]
        } else {
            self.return_items.iter().map(ReturnItem::column_name).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub start: NodePattern,
    pub steps: Vec<(RelPattern, NodePattern)>,
}

impl Pattern {
    pub fn nodes(&self) -> impl Iterator<Item = &NodePattern> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|(_, n)| n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodePattern {
    /// Anonymous nodes receive a generated name that cannot clash with
    /// user identifiers.
    pub var: String,
    pub anonymous: bool,
    pub label: Option<String>,
    pub properties: Vec<(String, Operand)>,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelDirection {
    Out,
    In,
    Undirected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelPattern {
    pub etype: String,
    pub direction: RelDirection,
    pub min: u32,
    pub max: u32,
    /// Only allowed in CREATE patterns.
    pub properties: Vec<(String, Operand)>,
    pub pos: Pos,
}

impl RelPattern {
    pub fn is_var_length(&self) -> bool {
        !(self.min == 1 && self.max == 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Property { var: String, key: String, pos: Pos },
    Literal(Value),
    Param(String),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Property { var, key, .. } => write!(f, "{var}.{key}"),
            Operand::Literal(v) => write!(f, "{}", v.to_literal()),
            Operand::Param(p) => write!(f, "${p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Contains,
    StartsWith,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Contains => "CONTAINS",
            CmpOp::StartsWith => "STARTS WITH",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lhs: Operand,
    pub op: CmpOp,
    pub rhs: Operand,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountArg {
    Star,
    Variable(String),
    Property(String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReturnExpr {
    Property { var: String, key: String },
    Variable(String),
    Count(CountArg),
}

impl ReturnExpr {
    pub fn is_aggregate(&self) -> bool {
        matches!(self, ReturnExpr::Count(_))
    }
}

impl fmt::Display for ReturnExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnExpr::Property { var, key } => write!(f, "{var}.{key}"),
            ReturnExpr::Variable(v) => f.write_str(v),
            ReturnExpr::Count(CountArg::Star) => f.write_str("count(*)"),
            ReturnExpr::Count(CountArg::Variable(v)) => write!(f, "count({v})"),
            ReturnExpr::Count(CountArg::Property(v, k)) => write!(f, "count({v}.{k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnItem {
    pub expr: ReturnExpr,
    pub alias: Option<String>,
    pub pos: Pos,
}

impl ReturnItem {
    pub fn column_name(&self) -> String {
        self.alias.clone().unwrap_or_else(|| self.expr.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderBy {
    pub expr: ReturnExpr,
    pub ascending: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Limit {
    Count(u64),
    Param(String),
}
