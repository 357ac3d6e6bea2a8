//! Plan execution over a tenant graph.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use super::ast::{CmpOp, Limit};
use super::error::CypherError;
use super::planner::{AggItem, Expr, NewEdge, NewNode, Operator, Plan, Predicate, ProjExpr, Slot, SortKey};
use super::value::{compare, join_key, row_cmp, total_cmp, JoinKey, NodeValue, Value};
use crate::graph::{Direction, Graph, NodeId, Properties};

/// Named query parameters.
pub type Params = BTreeMap<String, Value>;

/// Query output.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub latency_ms: f64,
}

impl ResultTable {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Value::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "row_count": self.rows.len(),
            "latency_ms": self.latency_ms,
        })
    }
}

const UNBOUND: NodeId = NodeId::MAX;

type Row = Vec<NodeId>;

struct Ctx<'a> {
    graph: &'a Graph,
    params: &'a Params,
    width: usize,
    columns: usize,
}

/// Fails with `MissingParameter` for the first unbound `$name`.
pub fn check_params(plan: &Plan, params: &Params) -> Result<(), CypherError> {
    match plan.parameters.iter().find(|p| !params.contains_key(*p)) {
        Some(missing) => Err(CypherError::MissingParameter(missing.clone())),
        None => Ok(()),
    }
}

/// Runs a read-only plan.
pub fn execute_read(graph: &Graph, plan: &Plan, params: &Params) -> Result<Vec<Vec<Value>>, CypherError> {
    check_params(plan, params)?;
    let ctx = Ctx {
        graph,
        params,
        width: plan.slots.len(),
        columns: plan.columns.len(),
    };
    let mut rows = ctx.output(&plan.root)?;
    let n = plan.columns.len();
    for r in &mut rows {
        r.truncate(n);
    }
    Ok(rows)
}

/// Runs a CREATE plan. All-or-nothing: a failure leaves the graph as it was.
pub fn execute_write(graph: &mut Graph, plan: &Plan, params: &Params) -> Result<Vec<Vec<Value>>, CypherError> {
    check_params(plan, params)?;
    let mut node_specs: &[NewNode] = &[];
    let mut edge_specs: &[NewEdge] = &[];
    let mut op = &plan.root;
    loop {
        match op {
            Operator::CreateEdges { input, edges } => {
                edge_specs = edges;
                op = input;
            }
            Operator::CreateNodes { input, nodes } => {
                node_specs = nodes;
                op = input;
            }
            _ => break,
        }
    }
    let width = plan.slots.len();
    let rows = {
        let ctx = Ctx {
            graph,
            params,
            width,
            columns: plan.columns.len(),
        };
        ctx.bindings(op)?
    };
    let constant = |e: &Expr| match e {
        Expr::Const(v) => v.clone(),
        Expr::Param(p) => params[p].clone(),
        Expr::Prop { .. } => Value::Null,
    };
    let props = |spec: &[(String, Expr)]| -> Result<Properties, CypherError> {
        let mut out = Properties::new();
        for (k, e) in spec {
            if let Some(v) = constant(e).to_property() {
                v.validate().map_err(|reason| CypherError::InvalidProperty {
                    key: k.clone(),
                    reason: reason.to_string(),
                })?;
                out.insert(k.clone(), v);
            }
        }
        Ok(out)
    };
    let node_props: Vec<Properties> = node_specs.iter().map(|n| props(&n.properties)).collect::<Result<_, _>>()?;
    let edge_props: Vec<Properties> = edge_specs.iter().map(|e| props(&e.properties)).collect::<Result<_, _>>()?;

    let checkpoint = graph.checkpoint();
    let mut created = (0i64, 0i64);
    let result = (|| -> Result<(), CypherError> {
        for mut row in rows {
            for (spec, p) in node_specs.iter().zip(&node_props) {
                let id = graph
                    .create_node([spec.label.as_str()], p.clone(), &[])
                    .map_err(|e| CypherError::Unsupported(e.to_string()))?;
                row[spec.slot] = id;
                created.0 += 1;
            }
            for (spec, p) in edge_specs.iter().zip(&edge_props) {
                graph
                    .create_edge(row[spec.src], row[spec.dst], &spec.etype, p.clone())
                    .map_err(|e| CypherError::Unsupported(e.to_string()))?;
                created.1 += 1;
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        graph.rollback(checkpoint);
        return Err(e);
    }
    Ok(vec![vec![Value::Int(created.0), Value::Int(created.1)]])
}

impl Ctx<'_> {
    fn eval(&self, e: &Expr, row: &[NodeId]) -> Value {
        match e {
            Expr::Prop { slot, key } => self.prop(row[*slot], key),
            Expr::Const(v) => v.clone(),
            Expr::Param(p) => self.params.get(p).cloned().unwrap_or(Value::Null),
        }
    }

    fn prop(&self, id: NodeId, key: &str) -> Value {
        self.graph
            .node(id)
            .and_then(|n| n.properties.get(key))
            .map_or(Value::Null, Value::from_property)
    }

    fn holds(&self, p: &Predicate, row: &[NodeId]) -> bool {
        match p {
            Predicate::HasLabel { slot, label } => self.graph.node(row[*slot]).is_some_and(|n| n.has_label(label)),
            Predicate::Compare { lhs, op, rhs } => compare(*op, &self.eval(lhs, row), &self.eval(rhs, row)),
        }
    }

    fn project(&self, p: &ProjExpr, row: &[NodeId]) -> Value {
        match p {
            ProjExpr::Prop { slot, key } => self.prop(row[*slot], key),
            ProjExpr::Node(slot) => self
                .graph
                .node(row[*slot])
                .map_or(Value::Null, |n| Value::Node(NodeValue::from_node(n))),
        }
    }

    fn unit_row(&self, slot: Slot, id: NodeId) -> Row {
        let mut r = vec![UNBOUND; self.width];
        r[slot] = id;
        r
    }

    /// Calls `emit` with the far endpoint of every edge of type `etype`
    /// leaving `from` in `direction`, one call per edge.
    fn each_neighbor(&self, from: NodeId, direction: Direction, etype: &str, mut emit: impl FnMut(NodeId)) {
        let g = self.graph;
        if matches!(direction, Direction::Out | Direction::Both) {
            for &eid in g.out_edges(from) {
                let e = &g.edges()[eid as usize];
                if &*e.etype == etype {
                    emit(e.dst);
                }
            }
        }
        if matches!(direction, Direction::In | Direction::Both) {
            for &eid in g.in_edges(from) {
                let e = &g.edges()[eid as usize];
                if &*e.etype == etype && !(direction == Direction::Both && e.src == e.dst) {
                    emit(e.src);
                }
            }
        }
    }

    fn walk(
        &self,
        path: &mut Vec<NodeId>,
        direction: Direction,
        etype: &str,
        min: u32,
        max: u32,
        emit: &mut dyn FnMut(NodeId),
    ) {
        let here = *path.last().expect("path starts at a node");
        let depth = path.len() as u32;
        let mut next = Vec::new();
        self.each_neighbor(here, direction, etype, |t| next.push(t));
        for t in next {
            if path.contains(&t) {
                continue;
            }
            if depth >= min {
                emit(t);
            }
            if depth < max {
                path.push(t);
                self.walk(path, direction, etype, min, max, emit);
                path.pop();
            }
        }
    }

    fn bindings(&self, op: &Operator) -> Result<Vec<Row>, CypherError> {
        let g = self.graph;
        Ok(match op {
            Operator::Unit => vec![vec![UNBOUND; self.width]],
            Operator::AllNodesScan { slot, .. } => g.nodes().iter().map(|n| self.unit_row(*slot, n.id)).collect(),
            Operator::ScanByLabel { slot, label, .. } => {
                g.nodes_by_label(label).iter().map(|&id| self.unit_row(*slot, id)).collect()
            }
            Operator::IndexSeek {
                slot,
                label,
                property,
                value,
                ..
            } => {
                let probe = self.eval(value, &[]);
                let candidates: &[NodeId] = match join_key(&probe) {
                    Some(JoinKey::Scalar(k)) => g
                        .index_lookup(label, property, &k)
                        .unwrap_or_else(|| g.nodes_by_label(label)),
                    _ => g.nodes_by_label(label),
                };
                candidates
                    .iter()
                    .filter(|&&id| compare(CmpOp::Eq, &self.prop(id, property), &probe))
                    .map(|&id| self.unit_row(*slot, id))
                    .collect()
            }
            Operator::Expand {
                input,
                from,
                to,
                direction,
                etype,
                min,
                max,
                to_label,
                into,
            } => {
                let rows = self.bindings(input)?;
                let mut out = Vec::new();
                let label_ok = |t: NodeId| to_label.as_ref().is_none_or(|l| g.node(t).is_some_and(|n| n.has_label(l)));
                for row in rows {
                    let src = row[*from];
                    let mut emit = |t: NodeId| {
                        if *into {
                            if row[*to] == t {
                                out.push(row.clone());
                            }
                        } else if label_ok(t) {
                            let mut r = row.clone();
                            r[*to] = t;
                            out.push(r);
                        }
                    };
                    if (*min, *max) == (1, 1) {
                        self.each_neighbor(src, *direction, etype, emit);
                    } else {
                        let mut path = vec![src];
                        self.walk(&mut path, *direction, etype, *min, *max, &mut emit);
                    }
                }
                out
            }
            Operator::Filter { input, predicates } => {
                let mut rows = self.bindings(input)?;
                rows.retain(|r| predicates.iter().all(|p| self.holds(p, r)));
                rows
            }
            Operator::HashJoin {
                left,
                right,
                left_key,
                right_key,
            } => {
                let l = self.bindings(left)?;
                let r = self.bindings(right)?;
                let mut table: HashMap<JoinKey, Vec<usize>> = HashMap::new();
                for (i, row) in r.iter().enumerate() {
                    if let Some(k) = join_key(&self.eval(right_key, row)) {
                        table.entry(k).or_default().push(i);
                    }
                }
                let mut out = Vec::new();
                for lrow in &l {
                    let Some(k) = join_key(&self.eval(left_key, lrow)) else {
                        continue;
                    };
                    if let Some(matches) = table.get(&k) {
                        for &i in matches {
                            out.push(merge(lrow, &r[i]));
                        }
                    }
                }
                out
            }
            Operator::CartesianProduct { left, right } => {
                let l = self.bindings(left)?;
                let r = self.bindings(right)?;
                let mut out = Vec::with_capacity(l.len() * r.len());
                for a in &l {
                    for b in &r {
                        out.push(merge(a, b));
                    }
                }
                out
            }
            other => {
                return Err(CypherError::Unsupported(format!(
                    "{} cannot appear below a projection",
                    other.name()
                )))
            }
        })
    }

    fn output(&self, op: &Operator) -> Result<Vec<Vec<Value>>, CypherError> {
        Ok(match op {
            Operator::Project { input, items } => self
                .bindings(input)?
                .iter()
                .map(|r| items.iter().map(|p| self.project(p, r)).collect())
                .collect(),
            Operator::Aggregate { input, items } => {
                let rows = self.bindings(input)?;
                let keys: Vec<&ProjExpr> = items
                    .iter()
                    .filter_map(|i| match i {
                        AggItem::Key(p) => Some(p),
                        _ => None,
                    })
                    .collect();
                let counters = items.len() - keys.len();
                let mut groups: BTreeMap<GroupKey, Vec<i64>> = BTreeMap::new();
                for r in &rows {
                    let key = GroupKey(keys.iter().map(|p| self.project(p, r)).collect());
                    let counts = groups.entry(key).or_insert_with(|| vec![0; counters]);
                    let mut c = 0;
                    for item in items {
                        match item {
                            AggItem::Key(_) => continue,
                            AggItem::CountRows => counts[c] += 1,
                            AggItem::CountProp { slot, key } => {
                                if g_has(self.graph, r[*slot], key) {
                                    counts[c] += 1;
                                }
                            }
                        }
                        c += 1;
                    }
                }
                if groups.is_empty() && keys.is_empty() {
                    groups.insert(GroupKey(Vec::new()), vec![0; counters]);
                }
                groups
                    .into_iter()
                    .map(|(GroupKey(key), counts)| {
                        let mut key = key.into_iter();
                        let mut counts = counts.into_iter();
                        items
                            .iter()
                            .map(|i| match i {
                                AggItem::Key(_) => key.next().expect("group key"),
                                _ => Value::Int(counts.next().expect("counter")),
                            })
                            .collect()
                    })
                    .collect()
            }
            Operator::Sort { input, key, ascending } => {
                let mut rows = self.output(input)?;
                match key {
                    SortKey::Row => rows.sort_by(|a, b| row_cmp(a, b)),
                    SortKey::Column(c) => {
                        let c = *c;
                        let asc = *ascending;
                        // Ties fall back to the visible row, ascending.
                        rows.sort_by(|a, b| {
                            let o = total_cmp(&a[c], &b[c]);
                            let o = if asc { o } else { o.reverse() };
                            o.then_with(|| row_cmp(&a[..self.columns.min(a.len())], &b[..self.columns.min(b.len())]))
                        });
                    }
                }
                rows
            }
            Operator::Limit { input, count } => {
                let n = resolve_limit(count, self.params)?;
                let mut rows = self.output(input)?;
                rows.truncate(n);
                rows
            }
            other => {
                return Err(CypherError::Unsupported(format!(
                    "{} cannot produce output rows",
                    other.name()
                )))
            }
        })
    }
}

fn g_has(g: &Graph, id: NodeId, key: &str) -> bool {
    g.node(id).is_some_and(|n| n.properties.contains_key(key))
}

fn merge(a: &[NodeId], b: &[NodeId]) -> Row {
    a.iter().zip(b).map(|(&x, &y)| if x == UNBOUND { y } else { x }).collect()
}

pub(crate) fn resolve_limit(limit: &Limit, params: &Params) -> Result<usize, CypherError> {
    match limit {
        Limit::Count(n) => Ok(usize::try_from(*n).unwrap_or(usize::MAX)),
        Limit::Param(p) => match params.get(p) {
            Some(Value::Int(n)) if *n >= 0 => Ok(*n as usize),
            Some(Value::Real(r)) if *r >= 0.0 && r.fract() == 0.0 => Ok(*r as usize),
            Some(other) => Err(CypherError::InvalidLimit(format!(
                "${p} must be a non-negative integer, got {}",
                other.to_literal()
            ))),
            None => Err(CypherError::MissingParameter(p.clone())),
        },
    }
}

/// Row of values ordered by [`row_cmp`], used as a grouping key.
struct GroupKey(Vec<Value>);

impl PartialEq for GroupKey {
    fn eq(&self, other: &Self) -> bool {
        row_cmp(&self.0, &other.0) == Ordering::Equal
    }
}

impl Eq for GroupKey {}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> Ordering {
        row_cmp(&self.0, &other.0)
    }
}
