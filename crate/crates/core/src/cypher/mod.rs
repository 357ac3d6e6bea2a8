//! openCypher subset: parsing, planning, execution and a reference
//! interpreter.
//!
//! ```
//! use kgfed::cypher::{execute_text, Params};
//! use kgfed::graph::GraphStore;
//!
//! let store = GraphStore::new();
//! let t = store.create_tenant("demo").unwrap();
//! execute_text(&t, "CREATE (a:Drug {name: 'Metformin'})-[:TARGETS]->(g:Gene {name: 'PRKAA1'})", &Params::new()).unwrap();
//! let out = execute_text(&t, "MATCH (d:Drug)-[:TARGETS]->(g) RETURN g.name", &Params::new()).unwrap();
//! assert_eq!(out.rows[0][0].to_string(), "PRKAA1");
//! ```

pub mod ast;
mod error;
mod exec;
mod lexer;
mod parser;
mod planner;
mod reference;
mod value;

use std::time::Instant;

pub use ast::Query;
pub use error::{CypherError, Pos};
pub use exec::{check_params, Params, ResultTable};
pub use parser::{parse, MAX_VAR_LENGTH};
pub use planner::{
    AggItem, Expr, NewEdge, NewNode, Operator, Plan, PlannerOptions, Predicate, ProjExpr, Slot, SortKey,
};
pub use reference::REFERENCE_NODE_LIMIT;
pub use value::{compare, equals, join_key, row_cmp, total_cmp, JoinKey, NodeValue, Value};

use crate::graph::{Graph, GraphSchema, TenantHandle};

/// Plans a parsed query with default options.
pub fn plan(query: &Query, schema: &GraphSchema) -> Plan {
    planner::plan(query, schema, PlannerOptions::default())
}

pub fn plan_with(query: &Query, schema: &GraphSchema, opts: PlannerOptions) -> Plan {
    planner::plan(query, schema, opts)
}

fn elapsed_ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1000.0).max(1e-6)
}

/// Runs a plan against a graph the caller has locked for reading.
pub fn execute_on(graph: &Graph, plan: &Plan, params: &Params) -> Result<ResultTable, CypherError> {
    let start = Instant::now();
    if plan.writes {
        return Err(CypherError::Unsupported("CREATE needs write access to the tenant".into()));
    }
    let rows = exec::execute_read(graph, plan, params)?;
    Ok(ResultTable {
        columns: plan.columns.clone(),
        rows,
        latency_ms: elapsed_ms(start),
    })
}

/// Runs a plan against a graph the caller has locked for writing.
pub fn execute_on_mut(graph: &mut Graph, plan: &Plan, params: &Params) -> Result<ResultTable, CypherError> {
    if !plan.writes {
        return execute_on(graph, plan, params);
    }
    let start = Instant::now();
    let rows = exec::execute_write(graph, plan, params)?;
    Ok(ResultTable {
        columns: plan.columns.clone(),
        rows,
        latency_ms: elapsed_ms(start),
    })
}

/// Runs a plan, holding the tenant's read lock for queries and its write
/// lock for CREATE.
pub fn execute(tenant: &TenantHandle, plan: &Plan, params: &Params) -> Result<ResultTable, CypherError> {
    if plan.writes {
        execute_on_mut(&mut tenant.write(), plan, params)
    } else {
        execute_on(&tenant.read(), plan, params)
    }
}

/// Parses, plans and runs query text under the appropriate tenant lock.
pub fn execute_text(tenant: &TenantHandle, text: &str, params: &Params) -> Result<ResultTable, CypherError> {
    execute_text_with(tenant, text, params, PlannerOptions::default())
}

pub fn execute_text_with(
    tenant: &TenantHandle,
    text: &str,
    params: &Params,
    opts: PlannerOptions,
) -> Result<ResultTable, CypherError> {
    let start = Instant::now();
    let query = parse(text)?;
    let mut table = if query.is_create() {
        let mut g = tenant.write();
        let plan = plan_with(&query, &g.schema(), opts);
        execute_on_mut(&mut g, &plan, params)?
    } else {
        let g = tenant.read();
        let plan = plan_with(&query, &g.schema(), opts);
        execute_on(&g, &plan, params)?
    };
    table.latency_ms = elapsed_ms(start);
    Ok(table)
}

/// Read-only convenience for callers already holding a graph reference.
pub fn query_graph(graph: &Graph, text: &str, params: &Params) -> Result<ResultTable, CypherError> {
    let start = Instant::now();
    let query = parse(text)?;
    let plan = plan(&query, &graph.schema());
    let mut table = execute_on(graph, &plan, params)?;
    table.latency_ms = elapsed_ms(start);
    Ok(table)
}

/// Indented operator tree for query text.
pub fn explain(tenant: &TenantHandle, text: &str) -> Result<String, CypherError> {
    let query = parse(text)?;
    let g = tenant.read();
    Ok(plan(&query, &g.schema()).describe())
}

/// Runs a read query with the brute-force interpreter.
pub fn reference_execute(tenant: &TenantHandle, query: &Query, params: &Params) -> Result<ResultTable, CypherError> {
    reference_execute_on(&tenant.read(), query, params)
}

pub fn reference_execute_on(graph: &Graph, query: &Query, params: &Params) -> Result<ResultTable, CypherError> {
    let start = Instant::now();
    let rows = reference::reference_rows(graph, query, params)?;
    Ok(ResultTable {
        columns: query.columns(),
        rows,
        latency_ms: elapsed_ms(start),
    })
}

/// Builds a parameter map from JSON object entries.
pub fn params_from_json(v: &serde_json::Value) -> Result<Params, String> {
    match v {
        serde_json::Value::Null => Ok(Params::new()),
        serde_json::Value::Object(map) => map
            .iter()
            .map(|(k, v)| Value::from_json(v).map(|v| (k.clone(), v)).map_err(|e| format!("${k}: {e}")))
            .collect(),
        _ => Err("parameters must be a JSON object".into()),
    }
}
