//! Brute-force interpreter used as a conformance oracle: it enumerates every
//! binding by scanning all nodes and all edges, without indexes, plans or
//! joins.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::ast::{CmpOp, CountArg, Limit, NodePattern, Operand, Pattern, Query, RelDirection, RelPattern, ReturnExpr};
use super::error::CypherError;
use super::exec::Params;
use super::value::{compare, total_cmp, NodeValue, Value};
use crate::graph::{Graph, NodeId};

/// Largest graph the interpreter accepts.
pub const REFERENCE_NODE_LIMIT: usize = 5_000;

type Binding = HashMap<String, NodeId>;

pub fn reference_rows(graph: &Graph, q: &Query, params: &Params) -> Result<Vec<Vec<Value>>, CypherError> {
    if graph.node_count() > REFERENCE_NODE_LIMIT {
        return Err(CypherError::SizeGuardExceeded {
            nodes: graph.node_count(),
            limit: REFERENCE_NODE_LIMIT,
        });
    }
    if q.is_create() {
        return Err(CypherError::Unsupported(
            "the reference interpreter only runs read queries".into(),
        ));
    }
    if let Some(p) = q.parameters.iter().find(|p| !params.contains_key(*p)) {
        return Err(CypherError::MissingParameter(p.clone()));
    }
    let r = Reference { graph, params };

    let mut bindings: Vec<Binding> = vec![Binding::new()];
    for pattern in q.match_patterns() {
        let mut next = Vec::new();
        for b in &bindings {
            r.match_pattern(pattern, b, &mut next);
        }
        bindings = next;
    }
    bindings.retain(|b| {
        q.where_clause
            .iter()
            .all(|c| compare(c.op, &r.operand(&c.lhs, b), &r.operand(&c.rhs, b)))
    });

    // Each output row carries an optional sort key next to its values.
    let mut rows: Vec<(Vec<Value>, Option<Value>)>;
    let order_col = q.order_by.as_ref().and_then(|o| {
        q.return_items.iter().position(|i| {
            i.expr == o.expr || matches!((&o.expr, &i.alias), (ReturnExpr::Variable(v), Some(a)) if v == a)
        })
    });
    if q.is_aggregating() {
        let mut groups: Vec<(Vec<Value>, Vec<i64>)> = Vec::new();
        for b in &bindings {
            let key: Vec<Value> = q
                .return_items
                .iter()
                .filter(|i| !i.expr.is_aggregate())
                .map(|i| r.item(&i.expr, b))
                .collect();
            let incr: Vec<i64> = q
                .return_items
                .iter()
                .filter_map(|i| match &i.expr {
                    ReturnExpr::Count(CountArg::Star) | ReturnExpr::Count(CountArg::Variable(_)) => Some(1),
                    ReturnExpr::Count(CountArg::Property(v, k)) => {
                        Some(i64::from(r.graph.node(b[v]).is_some_and(|n| n.properties.contains_key(k))))
                    }
                    _ => None,
                })
                .collect();
            let slot = groups.iter().position(|(k, _)| {
                k.len() == key.len() && k.iter().zip(&key).all(|(x, y)| total_cmp(x, y) == Ordering::Equal)
            });
            match slot {
                Some(i) => {
                    for (c, d) in groups[i].1.iter_mut().zip(&incr) {
                        *c += d;
                    }
                }
                None => groups.push((key, incr)),
            }
        }
        let has_keys = q.return_items.iter().any(|i| !i.expr.is_aggregate());
        if groups.is_empty() && !has_keys {
            let n = q.return_items.len();
            groups.push((Vec::new(), vec![0; n]));
        }
        rows = groups
            .into_iter()
            .map(|(key, counts)| {
                let (mut k, mut c) = (key.into_iter(), counts.into_iter());
                let row: Vec<Value> = q
                    .return_items
                    .iter()
                    .map(|i| {
                        if i.expr.is_aggregate() {
                            Value::Int(c.next().unwrap_or(0))
                        } else {
                            k.next().unwrap_or(Value::Null)
                        }
                    })
                    .collect();
                let sort = order_col.map(|i| row[i].clone());
                (row, sort)
            })
            .collect();
    } else {
        rows = bindings
            .iter()
            .map(|b| {
                let row: Vec<Value> = q.return_items.iter().map(|i| r.item(&i.expr, b)).collect();
                let sort = match (&q.order_by, order_col) {
                    (Some(_), Some(i)) => Some(row[i].clone()),
                    (Some(o), None) => Some(r.item(&o.expr, b)),
                    (None, _) => None,
                };
                (row, sort)
            })
            .collect();
    }

    let ascending = q.order_by.as_ref().is_none_or(|o| o.ascending);
    rows.sort_by(|(ra, ka), (rb, kb)| {
        let by_key = match (ka, kb) {
            (Some(a), Some(b)) => {
                let o = total_cmp(a, b);
                if ascending {
                    o
                } else {
                    o.reverse()
                }
            }
            _ => Ordering::Equal,
        };
        by_key.then_with(|| lexicographic(ra, rb))
    });
    let mut out: Vec<Vec<Value>> = rows.into_iter().map(|(r, _)| r).collect();
    if let Some(limit) = &q.limit {
        let n = match limit {
            Limit::Count(n) => *n as usize,
            Limit::Param(p) => match params.get(p) {
                Some(Value::Int(n)) if *n >= 0 => *n as usize,
                Some(Value::Real(x)) if *x >= 0.0 && x.fract() == 0.0 => *x as usize,
                _ => return Err(CypherError::InvalidLimit(format!("${p} must be a non-negative integer"))),
            },
        };
        out.truncate(n);
    }
    Ok(out)
}

fn lexicographic(a: &[Value], b: &[Value]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match total_cmp(x, y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

struct Reference<'a> {
    graph: &'a Graph,
    params: &'a Params,
}

impl Reference<'_> {
    fn property(&self, id: NodeId, key: &str) -> Value {
        match self.graph.node(id).and_then(|n| n.properties.get(key)) {
            Some(p) => Value::from_property(p),
            None => Value::Null,
        }
    }

    fn operand(&self, o: &Operand, b: &Binding) -> Value {
        match o {
            Operand::Property { var, key, .. } => self.property(b[var], key),
            Operand::Literal(v) => v.clone(),
            Operand::Param(p) => self.params[p].clone(),
        }
    }

    fn item(&self, e: &ReturnExpr, b: &Binding) -> Value {
        match e {
            ReturnExpr::Property { var, key } => self.property(b[var], key),
            ReturnExpr::Variable(v) => Value::Node(NodeValue::from_node(self.graph.node(b[v]).expect("bound node"))),
            ReturnExpr::Count(_) => unreachable!("aggregates handled by grouping"),
        }
    }

    fn node_ok(&self, n: &NodePattern, id: NodeId, b: &Binding) -> bool {
        let node = self.graph.node(id).expect("node exists");
        if let Some(l) = &n.label {
            if !node.labels.iter().any(|x| &**x == l) {
                return false;
            }
        }
        n.properties
            .iter()
            .all(|(k, v)| compare(CmpOp::Eq, &self.property(id, k), &self.operand(v, b)))
    }

    /// Binds `n` to `id` if consistent with `b`.
    fn bind(&self, n: &NodePattern, id: NodeId, b: &Binding) -> Option<Binding> {
        match b.get(&n.var) {
            Some(&existing) if existing != id => return None,
            _ => {}
        }
        if !self.node_ok(n, id, b) {
            return None;
        }
        let mut nb = b.clone();
        nb.insert(n.var.clone(), id);
        Some(nb)
    }

    fn match_pattern(&self, p: &Pattern, b: &Binding, out: &mut Vec<Binding>) {
        let mut partial: Vec<(Binding, NodeId)> = Vec::new();
        for node in self.graph.nodes() {
            if let Some(nb) = self.bind(&p.start, node.id, b) {
                partial.push((nb, node.id));
            }
        }
        for (rel, target) in &p.steps {
            let mut next = Vec::new();
            for (pb, at) in &partial {
                for end in self.reachable(rel, *at) {
                    if let Some(nb) = self.bind(target, end, pb) {
                        next.push((nb, end));
                    }
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|(b, _)| b));
    }

    /// One single-edge step from `at`, one entry per matching edge.
    fn step(&self, rel: &RelPattern, at: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        for e in self.graph.edges() {
            if *e.etype != *rel.etype {
                continue;
            }
            match rel.direction {
                RelDirection::Out if e.src == at => out.push(e.dst),
                RelDirection::In if e.dst == at => out.push(e.src),
                RelDirection::Undirected if e.src == at => out.push(e.dst),
                RelDirection::Undirected if e.dst == at => out.push(e.src),
                _ => {}
            }
        }
        out
    }

    /// Path ends, one entry per path. Variable-length paths never revisit a
    /// node.
    fn reachable(&self, rel: &RelPattern, from: NodeId) -> Vec<NodeId> {
        if !rel.is_var_length() {
            return self.step(rel, from);
        }
        let mut ends = Vec::new();
        let mut stack: Vec<Vec<NodeId>> = vec![vec![from]];
        while let Some(path) = stack.pop() {
            let len = path.len() as u32 - 1;
            if len >= rel.min {
                ends.push(*path.last().expect("non-empty"));
            }
            if len == rel.max {
                continue;
            }
            for t in self.step(rel, *path.last().expect("non-empty")) {
                if !path.contains(&t) {
                    let mut longer = path.clone();
                    longer.push(t);
                    stack.push(longer);
                }
            }
        }
        ends
    }
}
