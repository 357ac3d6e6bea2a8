//! Random graphs and queries for differential testing of the engine.

use kgfed::cypher::{Params, Value};
use kgfed::graph::{GraphStore, Properties, PropertyValue, TenantHandle};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const LABELS: [&str; 3] = ["A", "B", "C"];
const TYPES: [&str; 2] = ["R", "S"];
const NAMES: [&str; 6] = ["alpha", "beta", "gamma", "delta", "alphabet", "be"];

/// A graph of at most 100 nodes over labels A, B, C and edge types R, S.
pub fn random_graph(rng: &mut ChaCha8Rng) -> TenantHandle {
    let store = GraphStore::new();
    let t = store.create_tenant("t").unwrap();
    {
        let g = &mut *t.write();
        let n = if rng.gen_bool(0.05) { rng.gen_range(0..5) } else { rng.gen_range(20..=100) };
        for _ in 0..n {
            let mut labels: Vec<&str> = LABELS.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
            if labels.is_empty() {
                labels.push(LABELS.choose(rng).unwrap());
            }
            let mut p = Properties::new();
            if rng.gen_bool(0.8) {
                p.insert("name".into(), (*NAMES.choose(rng).unwrap()).into());
            }
            if rng.gen_bool(0.7) {
                let v = if rng.gen_bool(0.7) {
                    PropertyValue::Integer(rng.gen_range(0..5))
                } else if rng.gen_bool(0.5) {
                    PropertyValue::Real(rng.gen_range(0..8) as f64 / 2.0)
                } else {
                    PropertyValue::Text(rng.gen_range(0..5).to_string())
                };
                p.insert("v".into(), v);
            }
            if rng.gen_bool(0.3) {
                let k = rng.gen_range(0..3);
                let tags: Vec<String> = NAMES.choose_multiple(rng, k).map(|s| s.to_string()).collect();
                p.insert("tags".into(), tags.into());
            }
            if rng.gen_bool(0.3) {
                p.insert("flag".into(), rng.gen_bool(0.5).into());
            }
            g.create_node(labels, p, &[]).unwrap();
        }
        if g.node_count() > 0 {
            let m = rng.gen_range(0..=2 * g.node_count());
            for _ in 0..m {
                let a = rng.gen_range(0..g.node_count()) as u64;
                let b = rng.gen_range(0..g.node_count()) as u64;
                g.create_edge(a, b, TYPES.choose(rng).unwrap(), Properties::new()).unwrap();
            }
        }
        if rng.gen_bool(0.5) {
            g.declare_index("A", "v");
        }
        if rng.gen_bool(0.5) {
            g.declare_index("B", "flag");
        }
    }
    t
}

/// Generates one query per instance from the supported grammar.
pub struct QueryGen<'a> {
    rng: &'a mut ChaCha8Rng,
    vars: Vec<String>,
    next: usize,
    pub params: Params,
}

impl<'a> QueryGen<'a> {
    pub fn new(rng: &'a mut ChaCha8Rng) -> Self {
        QueryGen {
            rng,
            vars: Vec::new(),
            next: 0,
            params: Params::new(),
        }
    }

    fn literal(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 | 1 => format!("'{}'", NAMES.choose(self.rng).unwrap()),
            2 | 3 => self.rng.gen_range(-1..5).to_string(),
            4 => format!("{:.1}", self.rng.gen_range(0..8) as f64 / 2.0),
            _ => if self.rng.gen_bool(0.5) { "true" } else { "false" }.to_string(),
        }
    }

    fn value_or_param(&mut self) -> String {
        if self.rng.gen_bool(0.2) {
            let name = format!("p{}", self.params.len());
            let v = match self.rng.gen_range(0..3) {
                0 => Value::Text(NAMES.choose(self.rng).unwrap().to_string()),
                1 => Value::Int(self.rng.gen_range(0..5)),
                _ => Value::Bool(self.rng.gen_bool(0.5)),
            };
            self.params.insert(name.clone(), v);
            format!("${name}")
        } else {
            self.literal()
        }
    }

    fn var(&mut self) -> String {
        self.vars.choose(self.rng).unwrap().clone()
    }

    fn key(&mut self) -> &'static str {
        ["name", "v", "tags", "flag", "missing"][self.rng.gen_range(0..5)]
    }

    fn node(&mut self, allow_reuse: bool) -> String {
        let var = if allow_reuse && !self.vars.is_empty() && self.rng.gen_bool(0.12) {
            self.vars.choose(self.rng).unwrap().clone()
        } else if self.rng.gen_bool(0.15) {
            String::new()
        } else {
            let v = format!("v{}", self.next);
            self.next += 1;
            self.vars.push(v.clone());
            v
        };
        let label = if self.rng.gen_bool(0.5) {
            format!(":{}", LABELS.choose(self.rng).unwrap())
        } else {
            String::new()
        };
        let props = if self.rng.gen_bool(0.12) {
            let k = if self.rng.gen_bool(0.6) { "name" } else { self.key() };
            format!(" {{{k}: {}}}", self.value_or_param())
        } else {
            String::new()
        };
        format!("({var}{label}{props})")
    }

    fn rel(&mut self) -> String {
        let t = TYPES.choose(self.rng).unwrap();
        let range = match self.rng.gen_range(0..6) {
            0 => "*1..2".to_string(),
            1 => format!("*{}..3", self.rng.gen_range(1..=3)),
            _ => String::new(),
        };
        match self.rng.gen_range(0..3) {
            0 => format!("-[:{t}{range}]->"),
            1 => format!("<-[:{t}{range}]-"),
            _ => format!("-[:{t}{range}]-"),
        }
    }

    fn pattern(&mut self, must_share: bool) -> String {
        let mut s = if must_share && !self.vars.is_empty() {
            let v = self.vars.choose(self.rng).unwrap().clone();
            format!("({v})")
        } else {
            self.node(true)
        };
        for _ in 0..self.rng.gen_range(0..=2) {
            let r = self.rel();
            let n = self.node(true);
            s.push_str(&r);
            s.push_str(&n);
        }
        s
    }

    /// A comparison whose operands usually share a type.
    fn condition(&mut self, first: &[String], last: &[String]) -> String {
        if !first.is_empty() && !last.is_empty() && self.rng.gen_bool(0.35) {
            let a = first.choose(self.rng).unwrap().clone();
            let b = last.choose(self.rng).unwrap().clone();
            let k = ["name", "name", "v", "flag"][self.rng.gen_range(0..4)];
            return format!("{a}.{k} = {b}.{k}");
        }
        let v = self.var();
        if self.rng.gen_bool(0.1) {
            let op = ["=", "<>", "<", ">=", "CONTAINS"][self.rng.gen_range(0..5)];
            let k = self.key();
            let rhs = self.value_or_param();
            return format!("{v}.{k} {op} {rhs}");
        }
        let other = if self.rng.gen_bool(0.3) { Some(self.var()) } else { None };
        match self.rng.gen_range(0..3) {
            0 => {
                let op = ["=", "<>", "<", ">", "CONTAINS", "STARTS WITH"][self.rng.gen_range(0..6)];
                let rhs = match other {
                    Some(o) => format!("{o}.name"),
                    None => format!("'{}'", ["al", "be", "alpha", "ta", "gamma"][self.rng.gen_range(0..5)]),
                };
                format!("{v}.name {op} {rhs}")
            }
            1 => {
                let op = ["=", "<>", "<", "<=", ">", ">="][self.rng.gen_range(0..6)];
                let rhs = match other {
                    Some(o) => format!("{o}.v"),
                    None if self.rng.gen_bool(0.3) => format!("{:.1}", self.rng.gen_range(0..8) as f64 / 2.0),
                    None => self.rng.gen_range(0..5).to_string(),
                };
                if self.rng.gen_bool(0.3) {
                    format!("{rhs} {op} {v}.v")
                } else {
                    format!("{v}.v {op} {rhs}")
                }
            }
            _ => {
                let op = ["=", "<>"][self.rng.gen_range(0..2)];
                let rhs = match other {
                    Some(o) => format!("{o}.flag"),
                    None => self.rng.gen_bool(0.5).to_string(),
                };
                format!("{v}.flag {op} {rhs}")
            }
        }
    }

    pub fn query(&mut self) -> String {
        let mut text = String::new();
        let clauses = self.rng.gen_range(1..=3);
        let mut disconnected = 0;
        let mut first: Vec<String> = Vec::new();
        let mut last: Vec<String> = Vec::new();
        for c in 0..clauses {
            let share = c > 0 && (disconnected >= 1 || self.rng.gen_bool(0.4));
            if c > 0 && !share {
                disconnected += 1;
            }
            let before = self.vars.len();
            let p = self.pattern(share);
            let fresh = self.vars[before..].to_vec();
            if c == 0 {
                first = fresh;
            } else if !share {
                last = fresh;
            }
            text.push_str(&format!("MATCH {p}\n"));
        }
        if self.vars.is_empty() {
            // Every node was anonymous; bind one more.
            let v = format!("v{}", self.next);
            self.next += 1;
            self.vars.push(v.clone());
            text.push_str(&format!("MATCH ({v})\n"));
        }
        let n_conds = [0, 0, 1, 1, 2, 3][self.rng.gen_range(0..6)];
        let conds: Vec<String> = (0..n_conds).map(|_| self.condition(&first, &last)).collect();
        if !conds.is_empty() {
            text.push_str(&format!("WHERE {}\n", conds.join(" AND ")));
        }
        let aggregate = self.rng.gen_bool(0.3);
        let mut items = Vec::new();
        for _ in 0..self.rng.gen_range(1..=3) {
            let v = self.vars.choose(self.rng).unwrap().clone();
            items.push(if self.rng.gen_bool(0.2) { v } else { format!("{v}.{}", self.key()) });
        }
        let mut order: Option<String> = None;
        if aggregate {
            let count = match self.rng.gen_range(0..3) {
                0 => "count(*)".to_string(),
                1 => format!("count({})", self.vars.choose(self.rng).unwrap()),
                _ => {
                    let v = self.var();
                    format!("count({v}.{})", self.key())
                },
            };
            if self.rng.gen_bool(0.3) {
                items.clear();
            }
            items.push(format!("{count} AS total"));
            if self.rng.gen_bool(0.5) {
                order = Some("total".into());
            }
        } else if self.rng.gen_bool(0.4) {
            order = Some(if self.rng.gen_bool(0.5) {
                items[0].clone()
            } else {
                let v = self.var();
                format!("{v}.{}", self.key())
            });
        }
        text.push_str(&format!("RETURN {}", items.join(", ")));
        if let Some(o) = order {
            let dir = ["", " ASC", " DESC"][self.rng.gen_range(0..3)];
            text.push_str(&format!("\nORDER BY {o}{dir}"));
        }
        if self.rng.gen_bool(0.35) {
            if self.rng.gen_bool(0.3) {
                self.params.insert("lim".into(), Value::Int(self.rng.gen_range(0..6)));
                text.push_str("\nLIMIT $lim");
            } else {
                text.push_str(&format!("\nLIMIT {}", self.rng.gen_range(0..6)));
            }
        }
        text
    }
}
