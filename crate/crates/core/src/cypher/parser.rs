//! Recursive-descent parser and binder for the supported query subset.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::error::{CypherError, Pos};
use super::lexer::{tokenize, Tok, Token};
use super::value::Value;

/// Longest variable-length expansion accepted.
pub const MAX_VAR_LENGTH: u32 = 8;

const RESERVED: &[&str] = &[
    "MATCH", "WHERE", "RETURN", "ORDER", "BY", "LIMIT", "CREATE", "AND", "OR", "NOT", "AS", "CONTAINS", "STARTS",
    "WITH", "TRUE", "FALSE", "NULL", "ASC", "DESC",
];

/// Parses and binds query text.
pub fn parse(text: &str) -> Result<Query, CypherError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        idx: 0,
        expected: Vec::new(),
        anon: 0,
        params: BTreeSet::new(),
    };
    let query = p.query()?;
    bind(&query)?;
    Ok(query)
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
    expected: Vec<String>,
    anon: usize,
    params: BTreeSet<String>,
}

impl Parser {
    // ── Token helpers ───────────────────────────────────────────────────────

    fn peek(&self) -> &Token {
        &self.tokens[self.idx]
    }

    fn pos(&self) -> Pos {
        self.peek().pos
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.idx].clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        self.expected.clear();
        t
    }

    fn at(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            true
        } else {
            self.expected.push(tok.to_string());
            false
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        let hit = self.at(tok);
        if hit {
            self.advance();
        }
        hit
    }

    fn expect(&mut self, tok: &Tok) -> Result<Token, CypherError> {
        if self.at(tok) {
            Ok(self.advance())
        } else {
            Err(self.error())
        }
    }

    fn at_kw(&mut self, kw: &str) -> bool {
        match &self.peek().tok {
            Tok::Ident(s) if s.eq_ignore_ascii_case(kw) => true,
            _ => {
                self.expected.push(kw.to_string());
                false
            }
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.at_kw(kw);
        if hit {
            self.advance();
        }
        hit
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), CypherError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn error(&mut self) -> CypherError {
        let t = self.peek().clone();
        let mut expected = std::mem::take(&mut self.expected);
        expected.dedup();
        let mut seen = BTreeSet::new();
        expected.retain(|e| seen.insert(e.clone()));
        CypherError::Syntax {
            line: t.pos.line,
            column: t.pos.column,
            message: format!("unexpected {}", t.tok),
            expected,
        }
    }

    /// Any identifier, used for labels, types and property keys.
    fn name(&mut self, what: &str) -> Result<(String, Pos), CypherError> {
        if let Tok::Ident(s) | Tok::QuotedIdent(s) = &self.peek().tok {
            let s = s.clone();
            let pos = self.pos();
            self.advance();
            Ok((s, pos))
        } else {
            self.expected.push(what.to_string());
            Err(self.error())
        }
    }

    /// A non-reserved identifier, used for variables and aliases.
    fn variable(&mut self) -> Option<(String, Pos)> {
        match &self.peek().tok {
            Tok::QuotedIdent(s) => {
                let s = s.clone();
                let pos = self.pos();
                self.advance();
                Some((s, pos))
            }
            Tok::Ident(s) if !RESERVED.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                let s = s.clone();
                let pos = self.pos();
                self.advance();
                Some((s, pos))
            }
            _ => {
                self.expected.push("variable".into());
                None
            }
        }
    }

    // ── Clauses ────────────────────────────────────────────────────────────

    fn query(&mut self) -> Result<Query, CypherError> {
        let mut q = Query {
            match_clauses: Vec::new(),
            where_clause: Vec::new(),
            return_items: Vec::new(),
            order_by: None,
            limit: None,
            create_clauses: Vec::new(),
            parameters: BTreeSet::new(),
        };
        while self.eat_kw("MATCH") {
            q.match_clauses.push(self.pattern_list()?);
        }
        if self.eat_kw("CREATE") {
            q.create_clauses = self.pattern_list()?;
        } else if q.match_clauses.is_empty() {
            return Err(self.error());
        } else {
            if self.eat_kw("WHERE") {
                loop {
                    q.where_clause.push(self.comparison()?);
                    if !self.eat_kw("AND") {
                        break;
                    }
                }
            }
            self.expect_kw("RETURN")?;
            loop {
                q.return_items.push(self.return_item()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            if self.eat_kw("ORDER") {
                self.expect_kw("BY")?;
                let pos = self.pos();
                let expr = self.return_expr()?;
                let descending = self.eat_kw("DESC") || self.eat_kw("DESCENDING");
                if !descending && !self.eat_kw("ASC") {
                    self.eat_kw("ASCENDING");
                }
                let ascending = !descending;
                q.order_by = Some(OrderBy { expr, ascending, pos });
            }
            if self.eat_kw("LIMIT") {
                q.limit = Some(match self.peek().tok.clone() {
                    Tok::Int(n) => {
                        self.advance();
                        Limit::Count(n as u64)
                    }
                    Tok::Param(p) => {
                        self.advance();
                        self.params.insert(p.clone());
                        Limit::Param(p)
                    }
                    _ => {
                        self.expected.push("non-negative integer".into());
                        self.expected.push("$parameter".into());
                        return Err(self.error());
                    }
                });
            }
        }
        self.eat(&Tok::Semicolon);
        if !self.at(&Tok::Eof) {
            return Err(self.error());
        }
        q.parameters = std::mem::take(&mut self.params);
        Ok(q)
    }

    fn pattern_list(&mut self) -> Result<Vec<Pattern>, CypherError> {
        let mut patterns = vec![self.pattern()?];
        while self.eat(&Tok::Comma) {
            patterns.push(self.pattern()?);
        }
        Ok(patterns)
    }

    fn pattern(&mut self) -> Result<Pattern, CypherError> {
        let start = self.node_pattern()?;
        let mut steps = Vec::new();
        while self.at(&Tok::Minus) || self.at(&Tok::Lt) {
            let rel = self.rel_pattern()?;
            let node = self.node_pattern()?;
            steps.push((rel, node));
        }
        Ok(Pattern { start, steps })
    }

    fn node_pattern(&mut self) -> Result<NodePattern, CypherError> {
        let open = self.expect(&Tok::LParen)?;
        let (var, anonymous) = match self.variable() {
            Some((v, _)) => (v, false),
            None => {
                self.anon += 1;
                (format!("  anon{}", self.anon), true)
            }
        };
        let label = if self.eat(&Tok::Colon) {
            Some(self.name("label")?.0)
        } else {
            None
        };
        let properties = if self.at(&Tok::LBrace) {
            self.property_map()?
        } else {
            Vec::new()
        };
        self.expect(&Tok::RParen)?;
        Ok(NodePattern {
            var,
            anonymous,
            label,
            properties,
            pos: open.pos,
        })
    }

    fn property_map(&mut self) -> Result<Vec<(String, Operand)>, CypherError> {
        self.expect(&Tok::LBrace)?;
        let mut props = Vec::new();
        loop {
            let (key, _) = self.name("property key")?;
            self.expect(&Tok::Colon)?;
            let value = self.literal_or_param()?;
            props.push((key, value));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(props)
    }

    fn rel_pattern(&mut self) -> Result<RelPattern, CypherError> {
        let pos = self.pos();
        let incoming = self.eat(&Tok::Lt);
        self.expect(&Tok::Minus)?;
        self.expect(&Tok::LBracket)?;
        self.expect(&Tok::Colon)?;
        let (etype, _) = self.name("relationship type")?;
        let (mut min, mut max) = (1, 1);
        if self.at(&Tok::Star) {
            let star = self.advance();
            min = self.bound()?;
            self.expect(&Tok::DotDot)?;
            max = self.bound()?;
            if min < 1 || min > max || max > MAX_VAR_LENGTH {
                return Err(CypherError::InvalidPattern {
                    line: star.pos.line,
                    column: star.pos.column,
                    message: format!("length bounds must satisfy 1 <= min <= max <= {MAX_VAR_LENGTH}"),
                });
            }
        }
        let properties = if self.at(&Tok::LBrace) {
            self.property_map()?
        } else {
            Vec::new()
        };
        self.expect(&Tok::RBracket)?;
        self.expect(&Tok::Minus)?;
        let direction = if incoming {
            if self.at(&Tok::Gt) {
                let t = self.peek().pos;
                return Err(CypherError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: "a relationship cannot point both ways".into(),
                    expected: vec!["'('".into()],
                });
            }
            RelDirection::In
        } else if self.eat(&Tok::Gt) {
            RelDirection::Out
        } else {
            RelDirection::Undirected
        };
        Ok(RelPattern {
            etype,
            direction,
            min,
            max,
            properties,
            pos,
        })
    }

    fn bound(&mut self) -> Result<u32, CypherError> {
        if let Tok::Int(n) = self.peek().tok {
            let pos = self.pos();
            self.advance();
            u32::try_from(n).map_err(|_| CypherError::InvalidPattern {
                line: pos.line,
                column: pos.column,
                message: format!("length bound {n} out of range"),
            })
        } else {
            self.expected.push("integer".into());
            Err(self.error())
        }
    }

    fn literal_or_param(&mut self) -> Result<Operand, CypherError> {
        let tok = self.peek().tok.clone();
        let v = match tok {
            Tok::Str(s) => Value::Text(s),
            Tok::Int(i) => Value::Int(i),
            Tok::Float(f) => Value::Real(f),
            Tok::Param(p) => {
                self.advance();
                self.params.insert(p.clone());
                return Ok(Operand::Param(p));
            }
            Tok::Minus => {
                self.advance();
                match self.peek().tok {
                    Tok::Int(i) => Value::Int(-i),
                    Tok::Float(f) => Value::Real(-f),
                    _ => {
                        self.expected.push("number".into());
                        return Err(self.error());
                    }
                }
            }
            Tok::Ident(ref s) if s.eq_ignore_ascii_case("true") => Value::Bool(true),
            Tok::Ident(ref s) if s.eq_ignore_ascii_case("false") => Value::Bool(false),
            _ => {
                self.expected.extend(["string", "number", "true", "false", "$parameter"].map(String::from));
                return Err(self.error());
            }
        };
        self.advance();
        Ok(Operand::Literal(v))
    }

    fn operand(&mut self) -> Result<Operand, CypherError> {
        if let Some((var, pos)) = self.variable() {
            self.expect(&Tok::Dot)?;
            let (key, _) = self.name("property key")?;
            return Ok(Operand::Property { var, key, pos });
        }
        self.literal_or_param()
    }

    fn comparison(&mut self) -> Result<Comparison, CypherError> {
        let lhs = self.operand()?;
        let op = match self.peek().tok {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => {
                if self.eat_kw("CONTAINS") {
                    let rhs = self.operand()?;
                    return Ok(Comparison {
                        lhs,
                        op: CmpOp::Contains,
                        rhs,
                    });
                }
                if self.eat_kw("STARTS") {
                    self.expect_kw("WITH")?;
                    let rhs = self.operand()?;
                    return Ok(Comparison {
                        lhs,
                        op: CmpOp::StartsWith,
                        rhs,
                    });
                }
                self.expected.extend(["'='", "'<>'", "'<'", "'<='", "'>'", "'>='"].map(String::from));
                return Err(self.error());
            }
        };
        self.advance();
        let rhs = self.operand()?;
        Ok(Comparison { lhs, op, rhs })
    }

    fn return_expr(&mut self) -> Result<ReturnExpr, CypherError> {
        let is_count = matches!(&self.peek().tok, Tok::Ident(s) if s.eq_ignore_ascii_case("count"))
            && self.tokens.get(self.idx + 1).is_some_and(|t| t.tok == Tok::LParen);
        if is_count {
            self.advance();
            self.advance();
            let arg = if self.eat(&Tok::Star) {
                CountArg::Star
            } else {
                let Some((var, _)) = self.variable() else {
                    self.expected.push("'*'".into());
                    return Err(self.error());
                };
                if self.eat(&Tok::Dot) {
                    CountArg::Property(var, self.name("property key")?.0)
                } else {
                    CountArg::Variable(var)
                }
            };
            self.expect(&Tok::RParen)?;
            return Ok(ReturnExpr::Count(arg));
        }
        let Some((var, _)) = self.variable() else {
            self.expected.push("count".into());
            return Err(self.error());
        };
        if self.eat(&Tok::Dot) {
            let (key, _) = self.name("property key")?;
            Ok(ReturnExpr::Property { var, key })
        } else {
            Ok(ReturnExpr::Variable(var))
        }
    }

    fn return_item(&mut self) -> Result<ReturnItem, CypherError> {
        let pos = self.pos();
        let expr = self.return_expr()?;
        let alias = if self.eat_kw("AS") {
            match self.variable() {
                Some((a, _)) => Some(a),
                None => return Err(self.error()),
            }
        } else {
            None
        };
        Ok(ReturnItem { expr, alias, pos })
    }
}

// ── Binding ──────────────────────────────────────────────────────────────

fn unbound(name: &str, pos: Pos) -> CypherError {
    CypherError::UnboundVariable {
        name: name.to_string(),
        line: pos.line,
        column: pos.column,
    }
}

fn invalid(pos: Pos, message: impl Into<String>) -> CypherError {
    CypherError::InvalidPattern {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn expr_vars(expr: &ReturnExpr) -> Option<&str> {
    match expr {
        ReturnExpr::Property { var, .. } | ReturnExpr::Variable(var) => Some(var),
        ReturnExpr::Count(CountArg::Variable(var)) | ReturnExpr::Count(CountArg::Property(var, _)) => Some(var),
        ReturnExpr::Count(CountArg::Star) => None,
    }
}

/// Checks that every variable reference is bound and that CREATE patterns
/// are well formed.
fn bind(q: &Query) -> Result<(), CypherError> {
    let mut bound: HashMap<&str, Pos> = HashMap::new();
    for (rel, _) in q.match_patterns().flat_map(|p| &p.steps) {
        if !rel.properties.is_empty() {
            return Err(invalid(rel.pos, "relationship properties can only be set by CREATE"));
        }
    }
    for n in q.match_patterns().flat_map(Pattern::nodes) {
        bound.entry(n.var.as_str()).or_insert(n.pos);
    }
    for c in &q.where_clause {
        for o in [&c.lhs, &c.rhs] {
            if let Operand::Property { var, pos, .. } = o {
                if !bound.contains_key(var.as_str()) {
                    return Err(unbound(var, *pos));
                }
            }
        }
    }
    for item in &q.return_items {
        if let Some(v) = expr_vars(&item.expr) {
            if !bound.contains_key(v) {
                return Err(unbound(v, item.pos));
            }
        }
    }
    if let Some(order) = &q.order_by {
        let matches_item = q.return_items.iter().any(|i| {
            i.expr == order.expr
                || matches!((&order.expr, &i.alias), (ReturnExpr::Variable(v), Some(a)) if v == a)
        });
        if q.is_aggregating() {
            if !matches_item {
                return Err(invalid(
                    order.pos,
                    "ORDER BY in an aggregating query must name a return column",
                ));
            }
        } else if !matches_item {
            if order.expr.is_aggregate() {
                return Err(invalid(order.pos, "ORDER BY cannot aggregate outside RETURN"));
            }
            if let Some(v) = expr_vars(&order.expr) {
                if !bound.contains_key(v) {
                    return Err(unbound(v, order.pos));
                }
            }
        }
    }
    for p in &q.create_clauses {
        for n in p.nodes() {
            if bound.contains_key(n.var.as_str()) {
                if n.label.is_some() || !n.properties.is_empty() {
                    return Err(invalid(
                        n.pos,
                        format!("variable `{}` is already bound and cannot be redeclared", n.var),
                    ));
                }
            } else {
                if n.label.is_none() {
                    return Err(invalid(n.pos, "a created node needs a label"));
                }
                bound.insert(n.var.as_str(), n.pos);
            }
        }
        for (rel, _) in &p.steps {
            if rel.direction == RelDirection::Undirected {
                return Err(invalid(rel.pos, "a created relationship needs a direction"));
            }
            if rel.is_var_length() {
                return Err(invalid(rel.pos, "a created relationship cannot have variable length"));
            }
        }
    }
    Ok(())
}
