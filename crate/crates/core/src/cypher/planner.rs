//! Operator-tree planning and plan rendering.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use super::ast::{CmpOp, CountArg, Limit, Operand, Pattern, Query, RelDirection, ReturnExpr};
use super::value::Value;
use crate::graph::{Direction, GraphSchema};

pub type Slot = usize;

/// Planner switches, used to check that plan choice never changes results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerOptions {
    pub use_indexes: bool,
    pub use_hash_joins: bool,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            use_indexes: true,
            use_hash_joins: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Prop { slot: Slot, key: String },
    Const(Value),
    Param(String),
}

impl Expr {
    fn slot(&self) -> Option<Slot> {
        match self {
            Expr::Prop { slot, .. } => Some(*slot),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Compare { lhs: Expr, op: CmpOp, rhs: Expr },
    HasLabel { slot: Slot, label: String },
}

impl Predicate {
    fn slots(&self) -> Vec<Slot> {
        match self {
            Predicate::Compare { lhs, rhs, .. } => lhs.slot().into_iter().chain(rhs.slot()).collect(),
            Predicate::HasLabel { slot, .. } => vec![*slot],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjExpr {
    Prop { slot: Slot, key: String },
    Node(Slot),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AggItem {
    Key(ProjExpr),
    CountRows,
    CountProp { slot: Slot, key: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortKey {
    /// Full-row ascending order.
    Row,
    Column(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewNode {
    pub slot: Slot,
    pub label: String,
    pub properties: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewEdge {
    pub src: Slot,
    pub dst: Slot,
    pub etype: String,
    pub properties: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    /// One empty row.
    Unit,
    AllNodesScan {
        slot: Slot,
        est: usize,
    },
    ScanByLabel {
        slot: Slot,
        label: String,
        est: usize,
    },
    IndexSeek {
        slot: Slot,
        label: String,
        property: String,
        value: Expr,
        est: usize,
    },
    Expand {
        input: Box<Operator>,
        from: Slot,
        to: Slot,
        direction: Direction,
        etype: String,
        min: u32,
        max: u32,
        to_label: Option<String>,
        into: bool,
    },
    Filter {
        input: Box<Operator>,
        predicates: Vec<Predicate>,
    },
    HashJoin {
        left: Box<Operator>,
        right: Box<Operator>,
        left_key: Expr,
        right_key: Expr,
    },
    CartesianProduct {
        left: Box<Operator>,
        right: Box<Operator>,
    },
    Project {
        input: Box<Operator>,
        items: Vec<ProjExpr>,
    },
    Aggregate {
        input: Box<Operator>,
        items: Vec<AggItem>,
    },
    Sort {
        input: Box<Operator>,
        key: SortKey,
        ascending: bool,
    },
    Limit {
        input: Box<Operator>,
        count: Limit,
    },
    CreateNodes {
        input: Box<Operator>,
        nodes: Vec<NewNode>,
    },
    CreateEdges {
        input: Box<Operator>,
        edges: Vec<NewEdge>,
    },
}

impl Operator {
    pub fn children(&self) -> Vec<&Operator> {
        match self {
            Operator::Unit
            | Operator::AllNodesScan { .. }
            | Operator::ScanByLabel { .. }
            | Operator::IndexSeek { .. } => vec![],
            Operator::Expand { input, .. }
            | Operator::Filter { input, .. }
            | Operator::Project { input, .. }
            | Operator::Aggregate { input, .. }
            | Operator::Sort { input, .. }
            | Operator::Limit { input, .. }
            | Operator::CreateNodes { input, .. }
            | Operator::CreateEdges { input, .. } => vec![input],
            Operator::HashJoin { left, right, .. } | Operator::CartesianProduct { left, right } => {
                vec![left, right]
            }
        }
    }

    /// Pre-order walk over the tree.
    pub fn walk<'a>(&'a self, out: &mut Vec<&'a Operator>) {
        out.push(self);
        for c in self.children() {
            c.walk(out);
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Operator::Unit => "Unit",
            Operator::AllNodesScan { .. } => "AllNodesScan",
            Operator::ScanByLabel { .. } => "ScanByLabel",
            Operator::IndexSeek { .. } => "IndexSeek",
            Operator::Expand { into: false, .. } => "ExpandAll",
            Operator::Expand { into: true, .. } => "ExpandInto",
            Operator::Filter { .. } => "Filter",
            Operator::HashJoin { .. } => "HashJoin",
            Operator::CartesianProduct { .. } => "CartesianProduct",
            Operator::Project { .. } => "Project",
            Operator::Aggregate { .. } => "Aggregate",
            Operator::Sort { .. } => "Sort",
            Operator::Limit { .. } => "Limit",
            Operator::CreateNodes { .. } => "CreateNodes",
            Operator::CreateEdges { .. } => "CreateEdges",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub root: Operator,
    /// Variable name per row slot.
    pub slots: Vec<String>,
    pub columns: Vec<String>,
    pub parameters: BTreeSet<String>,
    pub writes: bool,
}

impl Plan {
    pub fn operators(&self) -> Vec<&Operator> {
        let mut out = Vec::new();
        self.root.walk(&mut out);
        out
    }

    pub fn count(&self, name: &str) -> usize {
        self.operators().iter().filter(|o| o.name() == name).count()
    }

    /// Indented operator tree, one operator per line.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        self.render(&self.root, 0, &mut out);
        out
    }

    fn var(&self, slot: Slot) -> &str {
        self.slots[slot].trim_start()
    }

    fn expr(&self, e: &Expr) -> String {
        match e {
            Expr::Prop { slot, key } => format!("{}.{key}", self.var(*slot)),
            Expr::Const(v) => v.to_literal(),
            Expr::Param(p) => format!("${p}"),
        }
    }

    fn proj(&self, p: &ProjExpr) -> String {
        match p {
            ProjExpr::Prop { slot, key } => format!("{}.{key}", self.var(*slot)),
            ProjExpr::Node(slot) => self.var(*slot).to_string(),
        }
    }

    fn pred(&self, p: &Predicate) -> String {
        match p {
            Predicate::Compare { lhs, op, rhs } => format!("{} {op} {}", self.expr(lhs), self.expr(rhs)),
            Predicate::HasLabel { slot, label } => format!("{}:{label}", self.var(*slot)),
        }
    }

    fn render(&self, op: &Operator, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let line = match op {
            Operator::Unit => "Unit".to_string(),
            Operator::AllNodesScan { slot, est } => format!("AllNodesScan→{est} est. ({})", self.var(*slot)),
            Operator::ScanByLabel { slot, label, est } => {
                format!("ScanByLabel({label})→{est} est. ({})", self.var(*slot))
            }
            Operator::IndexSeek {
                slot,
                label,
                property,
                value,
                est,
            } => format!(
                "IndexSeek({label}.{property})→{est} est. ({}.{property} = {})",
                self.var(*slot),
                self.expr(value)
            ),
            Operator::Expand {
                from,
                to,
                direction,
                etype,
                min,
                max,
                to_label,
                ..
            } => {
                let range = if (*min, *max) == (1, 1) {
                    String::new()
                } else {
                    format!("*{min}..{max}")
                };
                let (l, r) = match direction {
                    Direction::Out => ("-", "->"),
                    Direction::In => ("<-", "-"),
                    Direction::Both => ("-", "-"),
                };
                let label = to_label.as_ref().map(|l| format!(":{l}")).unwrap_or_default();
                format!(
                    "{} ({}){l}[:{etype}{range}]{r}({}{label})",
                    op.name(),
                    self.var(*from),
                    self.var(*to)
                )
            }
            Operator::Filter { predicates, .. } => {
                let preds: Vec<String> = predicates.iter().map(|p| self.pred(p)).collect();
                format!("Filter({})", preds.join(" AND "))
            }
            Operator::HashJoin {
                left_key, right_key, ..
            } => format!("HashJoin({} = {})", self.expr(left_key), self.expr(right_key)),
            Operator::CartesianProduct { .. } => "CartesianProduct".to_string(),
            Operator::Project { items, .. } => {
                let items: Vec<String> = items.iter().map(|p| self.proj(p)).collect();
                format!("Project({})", items.join(", "))
            }
            Operator::Aggregate { items, .. } => {
                let items: Vec<String> = items
                    .iter()
                    .map(|i| match i {
                        AggItem::Key(p) => self.proj(p),
                        AggItem::CountRows => "count(*)".to_string(),
                        AggItem::CountProp { slot, key } => format!("count({}.{key})", self.var(*slot)),
                    })
                    .collect();
                format!("Aggregate({})", items.join(", "))
            }
            Operator::Sort { key, ascending, .. } => match key {
                SortKey::Row => "Sort(row order)".to_string(),
                SortKey::Column(i) => {
                    let name = self.columns.get(*i).map_or("hidden key", String::as_str);
                    format!("Sort({name} {})", if *ascending { "ASC" } else { "DESC" })
                }
            },
            Operator::Limit { count, .. } => match count {
                Limit::Count(n) => format!("Limit({n})"),
                Limit::Param(p) => format!("Limit(${p})"),
            },
            Operator::CreateNodes { nodes, .. } => {
                let n: Vec<String> = nodes.iter().map(|n| format!("{}:{}", self.var(n.slot), n.label)).collect();
                format!("CreateNodes({})", n.join(", "))
            }
            Operator::CreateEdges { edges, .. } => {
                let e: Vec<String> = edges
                    .iter()
                    .map(|e| format!("({})-[:{}]->({})", self.var(e.src), e.etype, self.var(e.dst)))
                    .collect();
                format!("CreateEdges({})", e.join(", "))
            }
        };
        let _ = writeln!(out, "{pad}{line}");
        for c in op.children() {
            self.render(c, depth + 1, out);
        }
    }
}

// ── Planning ───────────────────────────────────────────────────────────────

struct Pending {
    pred: Predicate,
    slots: Vec<Slot>,
    done: bool,
}

struct Rel {
    a: Slot,
    b: Slot,
    etype: String,
    direction: RelDirection,
    min: u32,
    max: u32,
}

struct Planner<'a> {
    schema: &'a GraphSchema,
    opts: PlannerOptions,
    slots: Vec<String>,
    slot_of: HashMap<String, Slot>,
    pending: Vec<Pending>,
}

impl Planner<'_> {
    fn slot(&mut self, var: &str) -> Slot {
        if let Some(&s) = self.slot_of.get(var) {
            return s;
        }
        let s = self.slots.len();
        self.slots.push(var.to_string());
        self.slot_of.insert(var.to_string(), s);
        s
    }

    fn operand(&self, o: &Operand) -> Expr {
        match o {
            Operand::Property { var, key, .. } => Expr::Prop {
                slot: self.slot_of[var],
                key: key.clone(),
            },
            Operand::Literal(v) => Expr::Const(v.clone()),
            Operand::Param(p) => Expr::Param(p.clone()),
        }
    }

    fn push_pred(&mut self, pred: Predicate) {
        let slots = pred.slots();
        self.pending.push(Pending {
            pred,
            slots,
            done: false,
        });
    }

    /// Wraps `op` in a Filter holding every pending predicate whose
    /// variables are all bound.
    fn apply_ready(&mut self, op: Operator, bound: &BTreeSet<Slot>) -> Operator {
        let mut ready = Vec::new();
        for p in self.pending.iter_mut().filter(|p| !p.done) {
            if p.slots.iter().all(|s| bound.contains(s)) {
                p.done = true;
                ready.push(p.pred.clone());
            }
        }
        if ready.is_empty() {
            op
        } else {
            Operator::Filter {
                input: Box::new(op),
                predicates: ready,
            }
        }
    }

    fn take_label(&mut self, slot: Slot) -> Option<String> {
        self.pending.iter_mut().find_map(|p| match &p.pred {
            Predicate::HasLabel { slot: s, label } if *s == slot && !p.done => {
                p.done = true;
                Some(label.clone())
            }
            _ => None,
        })
    }

    /// Picks the leaf for one component: an index seek when possible, else
    /// the smallest label scan, else a scan over all nodes.
    fn leaf(&mut self, candidates: &[Slot]) -> Operator {
        // (rank, estimate), candidate order, operator, consumed predicates
        type Choice = ((u8, usize), usize, Operator, Vec<usize>);
        let mut best: Option<Choice> = None;
        for (order, &slot) in candidates.iter().enumerate() {
            let labels: Vec<(usize, String)> = self
                .pending
                .iter()
                .enumerate()
                .filter_map(|(i, p)| match &p.pred {
                    Predicate::HasLabel { slot: s, label } if *s == slot && !p.done => Some((i, label.clone())),
                    _ => None,
                })
                .collect();
            let mut option: Option<((u8, usize), Operator, Vec<usize>)> = None;
            if self.opts.use_indexes {
                'seek: for (li, label) in &labels {
                    for (pi, p) in self.pending.iter().enumerate() {
                        if p.done {
                            continue;
                        }
                        let Predicate::Compare { lhs, op: CmpOp::Eq, rhs } = &p.pred else {
                            continue;
                        };
                        let probe = match (lhs, rhs) {
                            (Expr::Prop { slot: s, key }, v @ (Expr::Const(_) | Expr::Param(_)))
                            | (v @ (Expr::Const(_) | Expr::Param(_)), Expr::Prop { slot: s, key })
                                if *s == slot =>
                            {
                                Some((key.clone(), v.clone()))
                            }
                            _ => None,
                        };
                        if let Some((key, value)) = probe {
                            if self.schema.is_indexed(label, &key) {
                                option = Some((
                                    (0, 1),
                                    Operator::IndexSeek {
                                        slot,
                                        label: label.clone(),
                                        property: key,
                                        value,
                                        est: 1,
                                    },
                                    vec![*li, pi],
                                ));
                                break 'seek;
                            }
                        }
                    }
                }
            }
            if option.is_none() {
                option = labels
                    .iter()
                    .map(|(li, label)| {
                        let est = self.schema.label(label).map_or(0, |l| l.count);
                        (
                            (1, est),
                            Operator::ScanByLabel {
                                slot,
                                label: label.clone(),
                                est,
                            },
                            vec![*li],
                        )
                    })
                    .min_by_key(|(score, ..)| *score);
            }
            let (score, op, used) = option.unwrap_or_else(|| {
                let est = self.schema.total_nodes();
                ((2, est), Operator::AllNodesScan { slot, est }, vec![])
            });
            if best.as_ref().is_none_or(|(b, bo, ..)| (score, order) < (*b, *bo)) {
                best = Some((score, order, op, used));
            }
        }
        let (_, _, op, used) = best.expect("component has at least one node");
        for i in used {
            self.pending[i].done = true;
        }
        op
    }

    fn component(&mut self, vars: &[Slot], rels: Vec<Rel>) -> (Operator, BTreeSet<Slot>) {
        let mut op = self.leaf(vars);
        let mut bound = BTreeSet::new();
        match &op {
            Operator::AllNodesScan { slot, .. }
            | Operator::ScanByLabel { slot, .. }
            | Operator::IndexSeek { slot, .. } => {
                bound.insert(*slot);
            }
            _ => unreachable!("leaf is a scan"),
        }
        op = self.apply_ready(op, &bound);
        let mut remaining = rels;
        while !remaining.is_empty() {
            let pos = remaining
                .iter()
                .position(|r| bound.contains(&r.a) || bound.contains(&r.b))
                .expect("component is connected");
            let rel = remaining.remove(pos);
            let (from, to, direction) = if bound.contains(&rel.a) {
                let d = match rel.direction {
                    RelDirection::Out => Direction::Out,
                    RelDirection::In => Direction::In,
                    RelDirection::Undirected => Direction::Both,
                };
                (rel.a, rel.b, d)
            } else {
                let d = match rel.direction {
                    RelDirection::Out => Direction::In,
                    RelDirection::In => Direction::Out,
                    RelDirection::Undirected => Direction::Both,
                };
                (rel.b, rel.a, d)
            };
            let into = bound.contains(&to);
            let to_label = if into { None } else { self.take_label(to) };
            op = Operator::Expand {
                input: Box::new(op),
                from,
                to,
                direction,
                etype: rel.etype,
                min: rel.min,
                max: rel.max,
                to_label,
                into,
            };
            bound.insert(to);
            op = self.apply_ready(op, &bound);
        }
        (op, bound)
    }
}

/// Builds an operator tree for a bound query.
pub fn plan(query: &Query, schema: &GraphSchema, opts: PlannerOptions) -> Plan {
    let mut p = Planner {
        schema,
        opts,
        slots: Vec::new(),
        slot_of: HashMap::new(),
        pending: Vec::new(),
    };
    let patterns: Vec<&Pattern> = query.match_patterns().collect();
    for pat in &patterns {
        for n in pat.nodes() {
            p.slot(&n.var);
        }
    }

    // Node constraints become pending predicates; scans and expands consume
    // the ones they can check themselves.
    for pat in &patterns {
        for n in pat.nodes() {
            let slot = p.slot_of[&n.var];
            if let Some(label) = &n.label {
                p.push_pred(Predicate::HasLabel {
                    slot,
                    label: label.clone(),
                });
            }
            for (key, value) in &n.properties {
                let rhs = p.operand(value);
                p.push_pred(Predicate::Compare {
                    lhs: Expr::Prop { slot, key: key.clone() },
                    op: CmpOp::Eq,
                    rhs,
                });
            }
        }
    }
    for c in &query.where_clause {
        let lhs = p.operand(&c.lhs);
        let rhs = p.operand(&c.rhs);
        p.push_pred(Predicate::Compare { lhs, op: c.op, rhs });
    }

    // Connected components over shared variables, in order of appearance.
    let mut comp_of: HashMap<Slot, usize> = HashMap::new();
    let mut comps: Vec<(Vec<Slot>, Vec<Rel>)> = Vec::new();
    for pat in &patterns {
        let slots: Vec<Slot> = pat.nodes().map(|n| p.slot_of[&n.var]).collect();
        let mut hit: Vec<usize> = slots.iter().filter_map(|s| comp_of.get(s).copied()).collect();
        hit.sort_unstable();
        hit.dedup();
        let target = match hit.first() {
            Some(&t) => t,
            None => {
                comps.push((Vec::new(), Vec::new()));
                comps.len() - 1
            }
        };
        for &other in hit.iter().skip(1).rev() {
            let (vars, rels) = std::mem::take(&mut comps[other]);
            for v in &vars {
                comp_of.insert(*v, target);
            }
            comps[target].0.extend(vars);
            comps[target].1.extend(rels);
        }
        for &s in &slots {
            if comp_of.insert(s, target) != Some(target) {
                comps[target].0.push(s);
            }
        }
        let mut prev = slots[0];
        for ((rel, _), &s) in pat.steps.iter().zip(&slots[1..]) {
            comps[target].1.push(Rel {
                a: prev,
                b: s,
                etype: rel.etype.clone(),
                direction: rel.direction,
                min: rel.min,
                max: rel.max,
            });
            prev = s;
        }
    }
    comps.retain(|(vars, _)| !vars.is_empty());
    for (vars, _) in comps.iter_mut() {
        vars.sort_unstable();
        vars.dedup();
    }

    let mut built: Vec<Option<(Operator, BTreeSet<Slot>)>> = Vec::new();
    for (vars, rels) in comps {
        built.push(Some(p.component(&vars, rels)));
    }

    let mut root: Option<(Operator, BTreeSet<Slot>)> = None;
    if !built.is_empty() {
        let (first_op, first_bound) = built[0].take().expect("first component");
        let mut op = first_op;
        let mut bound = first_bound;
        while built.iter().any(Option::is_some) {
            let mut join: Option<(usize, usize, Expr, Expr)> = None;
            if opts.use_hash_joins {
                for (pi, pend) in p.pending.iter().enumerate() {
                    if pend.done {
                        continue;
                    }
                    let Predicate::Compare {
                        lhs: lhs @ Expr::Prop { slot: ls, .. },
                        op: CmpOp::Eq,
                        rhs: rhs @ Expr::Prop { slot: rs, .. },
                    } = &pend.pred
                    else {
                        continue;
                    };
                    let side = |s: &Slot| built.iter().position(|b| b.as_ref().is_some_and(|(_, vs)| vs.contains(s)));
                    if bound.contains(ls) {
                        if let Some(c) = side(rs) {
                            join = Some((pi, c, lhs.clone(), rhs.clone()));
                            break;
                        }
                    } else if bound.contains(rs) {
                        if let Some(c) = side(ls) {
                            join = Some((pi, c, rhs.clone(), lhs.clone()));
                            break;
                        }
                    }
                }
            }
            op = match join {
                Some((pi, c, left_key, right_key)) => {
                    p.pending[pi].done = true;
                    let (right, rb) = built[c].take().expect("component");
                    bound.extend(rb);
                    Operator::HashJoin {
                        left: Box::new(op),
                        right: Box::new(right),
                        left_key,
                        right_key,
                    }
                }
                None => {
                    let c = built.iter().position(Option::is_some).expect("component");
                    let (right, rb) = built[c].take().expect("component");
                    bound.extend(rb);
                    Operator::CartesianProduct {
                        left: Box::new(op),
                        right: Box::new(right),
                    }
                }
            };
            op = p.apply_ready(op, &bound);
        }
        root = Some((op, bound));
    }

    if query.is_create() {
        let mut input = root.map_or(Operator::Unit, |(op, _)| op);
        let mut nodes = Vec::new();
        for pat in &query.create_clauses {
            for n in pat.nodes() {
                if p.slot_of.contains_key(&n.var) {
                    continue;
                }
                let slot = p.slot(&n.var);
                let properties = n.properties.iter().map(|(k, v)| (k.clone(), p.operand(v))).collect();
                nodes.push(NewNode {
                    slot,
                    label: n.label.clone().expect("binder checked labels"),
                    properties,
                });
            }
        }
        let mut edges = Vec::new();
        for pat in &query.create_clauses {
            let mut prev = p.slot_of[&pat.start.var];
            for (rel, n) in &pat.steps {
                let next = p.slot_of[&n.var];
                let (src, dst) = match rel.direction {
                    RelDirection::In => (next, prev),
                    _ => (prev, next),
                };
                edges.push(NewEdge {
                    src,
                    dst,
                    etype: rel.etype.clone(),
                    properties: rel.properties.iter().map(|(k, v)| (k.clone(), p.operand(v))).collect(),
                });
                prev = next;
            }
        }
        if !nodes.is_empty() {
            input = Operator::CreateNodes {
                input: Box::new(input),
                nodes,
            };
        }
        if !edges.is_empty() {
            input = Operator::CreateEdges {
                input: Box::new(input),
                edges,
            };
        }
        return Plan {
            root: input,
            slots: p.slots,
            columns: query.columns(),
            parameters: query.parameters.clone(),
            writes: true,
        };
    }

    let input = root.expect("read query has a MATCH").0;
    let columns = query.columns();
    let proj = |p: &Planner, e: &ReturnExpr| -> ProjExpr {
        match e {
            ReturnExpr::Property { var, key } => ProjExpr::Prop {
                slot: p.slot_of[var],
                key: key.clone(),
            },
            ReturnExpr::Variable(v) => ProjExpr::Node(p.slot_of[v]),
            ReturnExpr::Count(_) => unreachable!("aggregates are not projections"),
        }
    };
    let sort_column = query.order_by.as_ref().map(|o| {
        query.return_items.iter().position(|i| {
            i.expr == o.expr || matches!((&o.expr, &i.alias), (ReturnExpr::Variable(v), Some(a)) if v == a)
        })
    });
    let mut op = if query.is_aggregating() {
        let items = query
            .return_items
            .iter()
            .map(|i| match &i.expr {
                ReturnExpr::Count(CountArg::Star) | ReturnExpr::Count(CountArg::Variable(_)) => AggItem::CountRows,
                ReturnExpr::Count(CountArg::Property(v, k)) => AggItem::CountProp {
                    slot: p.slot_of[v],
                    key: k.clone(),
                },
                other => AggItem::Key(proj(&p, other)),
            })
            .collect();
        Operator::Aggregate {
            input: Box::new(input),
            items,
        }
    } else {
        let mut items: Vec<ProjExpr> = query.return_items.iter().map(|i| proj(&p, &i.expr)).collect();
        if let (Some(None), Some(order)) = (sort_column, &query.order_by) {
            items.push(proj(&p, &order.expr));
        }
        Operator::Project {
            input: Box::new(input),
            items,
        }
    };
    op = Operator::Sort {
        input: Box::new(op),
        key: match sort_column {
            None => SortKey::Row,
            Some(Some(i)) => SortKey::Column(i),
            Some(None) => SortKey::Column(columns.len()),
        },
        ascending: query.order_by.as_ref().is_none_or(|o| o.ascending),
    };
    if let Some(limit) = &query.limit {
        op = Operator::Limit {
            input: Box::new(op),
            count: limit.clone(),
        };
    }
    Plan {
        root: op,
        slots: p.slots,
        columns,
        parameters: query.parameters.clone(),
        writes: false,
    }
}
