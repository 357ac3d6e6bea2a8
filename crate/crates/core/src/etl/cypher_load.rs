//! Loader that writes through a Cypher query endpoint in batched CREATE
//! statements.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use serde_json::{json, Map, Value as Json};

use super::load::run_load;
use super::registry::{DedupRegistry, NodeSink};
use super::{EtlError, LoadOptions, LoadStats, MappingConfig};
use crate::cypher;
use crate::graph::{NodeId, Properties, PropertyValue, TenantHandle, ValueKey};

pub const DEFAULT_BATCH_SIZE: usize = 100;
pub const MAX_BATCH_SIZE: usize = 1000;

/// Result table of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryReply {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Json>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EndpointError {
    Unreachable(String),
    Rejected { code: String, message: String },
}

/// Something that runs Cypher text with JSON parameters against one tenant.
pub trait QueryEndpoint {
    fn query(&mut self, text: &str, params: &Map<String, Json>) -> Result<QueryReply, EndpointError>;
    fn declare_index(&mut self, label: &str, property: &str) -> Result<(), EndpointError>;
}

/// Runs queries in-process against a tenant.
pub struct LocalEndpoint {
    tenant: TenantHandle,
}

impl LocalEndpoint {
    pub fn new(tenant: TenantHandle) -> Self {
        LocalEndpoint { tenant }
    }
}

impl QueryEndpoint for LocalEndpoint {
    fn query(&mut self, text: &str, params: &Map<String, Json>) -> Result<QueryReply, EndpointError> {
        let params = cypher::params_from_json(&Json::Object(params.clone())).map_err(|message| {
            EndpointError::Rejected {
                code: "invalid-parameter".into(),
                message,
            }
        })?;
        let table = cypher::execute_text(&self.tenant, text, &params).map_err(|e| EndpointError::Rejected {
            code: e.kind().into(),
            message: e.to_string(),
        })?;
        Ok(QueryReply {
            columns: table.columns,
            rows: table.rows.iter().map(|r| r.iter().map(cypher::Value::to_json).collect()).collect(),
        })
    }

    fn declare_index(&mut self, label: &str, property: &str) -> Result<(), EndpointError> {
        self.tenant.write().declare_index(label, property);
        Ok(())
    }
}

/// Talks to a running server's HTTP API.
pub struct HttpEndpoint {
    agent: ureq::Agent,
    base_url: String,
    tenant: String,
}

impl HttpEndpoint {
    /// `base_url` like `http://127.0.0.1:7070`.
    pub fn new(base_url: &str, tenant: &str) -> Self {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        HttpEndpoint {
            agent,
            base_url: base_url.trim_end_matches('/').to_string(),
            tenant: tenant.to_string(),
        }
    }

    fn post(&self, path: &str, body: &Json) -> Result<Json, EndpointError> {
        let url = format!("{}{}", self.base_url, path);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| EndpointError::Unreachable(e.to_string()))?;
        let status = resp.status();
        let body: Json = resp
            .body_mut()
            .with_config()
            .limit(1 << 30)
            .read_json()
            .map_err(|e| EndpointError::Unreachable(e.to_string()))?;
        if status.is_success() {
            return Ok(body);
        }
        let err = &body["error"];
        Err(EndpointError::Rejected {
            code: err["code"].as_str().unwrap_or("http-error").to_string(),
            message: err["message"].as_str().map_or_else(|| format!("HTTP {status}"), String::from),
        })
    }
}

impl QueryEndpoint for HttpEndpoint {
    fn query(&mut self, text: &str, params: &Map<String, Json>) -> Result<QueryReply, EndpointError> {
        let body = json!({"tenant": self.tenant, "query": text, "params": params});
        let out = self.post("/api/query", &body)?;
        let columns = out["columns"]
            .as_array()
            .map(|c| c.iter().filter_map(|v| v.as_str().map(String::from)).collect())
            .unwrap_or_default();
        let rows = out["rows"]
            .as_array()
            .map(|rows| rows.iter().map(|r| r.as_array().cloned().unwrap_or_default()).collect())
            .unwrap_or_default();
        Ok(QueryReply { columns, rows })
    }

    fn declare_index(&mut self, label: &str, property: &str) -> Result<(), EndpointError> {
        let body = json!({"tenant": self.tenant, "label": label, "property": property});
        self.post("/api/index", &body).map(|_| ())
    }
}

/// Loads sources through `endpoint`, `batch_size` entities per request.
///
/// Nodes go out as multi-pattern CREATE statements. Edges go out as one
/// MATCH per distinct endpoint, by its key property, followed by one CREATE
/// for the whole batch. A rejected batch aborts the load; earlier batches
/// stay committed.
pub fn load_cypher<E: QueryEndpoint + ?Sized>(
    endpoint: &mut E,
    mapping: &MappingConfig,
    batch_size: usize,
    registry: &mut DedupRegistry,
    opts: &LoadOptions,
) -> Result<LoadStats, EtlError> {
    if !(1..=MAX_BATCH_SIZE).contains(&batch_size) {
        return Err(EtlError::InvalidBatchSize(batch_size));
    }
    let started = Instant::now();
    let mut sink = CypherSink {
        endpoint,
        batch_size,
        nodes: Vec::new(),
        lookup_pairs: mapping.lookup_pairs().into_iter().collect(),
        index: HashMap::new(),
        sent: 0,
        edges: Vec::new(),
        batches: 0,
        requests: 0,
    };
    let mut stats = run_load(&mut sink, mapping, registry, opts)?;
    sink.flush_nodes()?;
    sink.flush_edges()?;
    stats.requests = sink.requests;
    stats.duration_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(stats)
}

struct LocalNode {
    label: String,
    key_property: String,
    properties: Properties,
}

struct PendingEdge {
    src: NodeId,
    dst: NodeId,
    etype: String,
    properties: Properties,
}

/// Mirrors the nodes this load creates so endpoint lookups and MATCH keys
/// can be resolved client-side. Node ids are positions in `nodes`.
struct CypherSink<'e, E: QueryEndpoint + ?Sized> {
    endpoint: &'e mut E,
    batch_size: usize,
    nodes: Vec<LocalNode>,
    lookup_pairs: HashSet<(String, String)>,
    index: HashMap<(String, String), HashMap<ValueKey, Vec<NodeId>>>,
    /// Nodes before this position have been sent.
    sent: usize,
    edges: Vec<PendingEdge>,
    batches: u64,
    requests: u64,
}

impl<E: QueryEndpoint + ?Sized> CypherSink<'_, E> {
    fn index_node(&mut self, id: NodeId, keys: impl IntoIterator<Item = String>) {
        let node = &self.nodes[id as usize];
        for key in keys {
            let pair = (node.label.clone(), key);
            if !self.lookup_pairs.contains(&pair) {
                continue;
            }
            if let Some(value) = node.properties.get(&pair.1) {
                let slot = self.index.entry(pair).or_default();
                for k in value.index_keys() {
                    slot.entry(k).or_default().push(id);
                }
            }
        }
    }

    fn send(&mut self, text: &str, params: &Map<String, Json>, nodes: usize, edges: usize) -> Result<(), EtlError> {
        let batch = self.batches;
        self.batches += 1;
        self.requests += 1;
        let reply = self.endpoint.query(text, params).map_err(|e| endpoint_error(batch, e))?;
        let got = reply.rows.first().map(|r| (r.first().and_then(Json::as_u64), r.get(1).and_then(Json::as_u64)));
        if got != Some((Some(nodes as u64), Some(edges as u64))) {
            return Err(EtlError::BatchMismatch {
                batch,
                message: format!("expected {nodes} nodes and {edges} edges created, server reported {:?}", reply.rows),
            });
        }
        Ok(())
    }

    fn flush_nodes(&mut self) -> Result<(), EtlError> {
        while self.sent < self.nodes.len() {
            let end = (self.sent + self.batch_size).min(self.nodes.len());
            let mut text = String::from("CREATE ");
            let mut params = Map::new();
            for (i, node) in self.nodes[self.sent..end].iter().enumerate() {
                if i > 0 {
                    text.push_str(", ");
                }
                let _ = write!(text, "(n{i}:{}", quote(&node.label));
                write_props(&mut text, &mut params, &node.properties, &format!("n{i}_"));
                text.push(')');
            }
            let count = end - self.sent;
            self.send(&text, &params, count, 0)?;
            self.sent = end;
        }
        Ok(())
    }

    fn flush_edges(&mut self) -> Result<(), EtlError> {
        if self.edges.is_empty() {
            return Ok(());
        }
        self.flush_nodes()?;
        let edges = std::mem::take(&mut self.edges);
        let mut vars: HashMap<NodeId, usize> = HashMap::new();
        let mut matches = String::new();
        let mut params = Map::new();
        for e in &edges {
            for id in [e.src, e.dst] {
                if vars.contains_key(&id) {
                    continue;
                }
                let v = vars.len();
                vars.insert(id, v);
                let node = &self.nodes[id as usize];
                let key = &node.properties[&node.key_property];
                matches.push_str(if v == 0 { "MATCH " } else { ", " });
                let _ = write!(matches, "(m{v}:{} {{{}: $k{v}}})", quote(&node.label), quote(&node.key_property));
                params.insert(format!("k{v}"), property_json(key));
            }
        }
        let mut text = matches;
        text.push_str(" CREATE ");
        for (i, e) in edges.iter().enumerate() {
            if i > 0 {
                text.push_str(", ");
            }
            let _ = write!(text, "(m{})-[:{}", vars[&e.src], quote(&e.etype));
            write_props(&mut text, &mut params, &e.properties, &format!("e{i}_"));
            let _ = write!(text, "]->(m{})", vars[&e.dst]);
        }
        self.send(&text, &params, 0, edges.len())
    }
}

impl<E: QueryEndpoint + ?Sized> NodeSink for CypherSink<'_, E> {
    fn declare_index(&mut self, label: &str, property: &str) -> Result<(), EtlError> {
        self.requests += 1;
        self.endpoint
            .declare_index(label, property)
            .map_err(|e| endpoint_error(self.batches, e))
    }

    fn create_node(
        &mut self,
        label: &str,
        key_property: &str,
        properties: Properties,
        _indexed: &[&str],
    ) -> Result<NodeId, EtlError> {
        for (k, v) in &properties {
            v.validate().map_err(|reason| EtlError::Graph(crate::graph::GraphError::InvalidProperty {
                key: k.clone(),
                reason,
            }))?;
        }
        let id = self.nodes.len() as NodeId;
        let keys: Vec<String> = properties.keys().cloned().collect();
        self.nodes.push(LocalNode {
            label: label.to_string(),
            key_property: key_property.to_string(),
            properties,
        });
        self.index_node(id, keys);
        Ok(id)
    }

    fn merge_absent(&mut self, id: NodeId, properties: Properties) -> Result<(), EtlError> {
        let node = &mut self.nodes[id as usize];
        let fresh: Vec<(String, PropertyValue)> =
            properties.into_iter().filter(|(k, _)| !node.properties.contains_key(k)).collect();
        if fresh.is_empty() {
            return Ok(());
        }
        if (id as usize) < self.sent {
            return Err(EtlError::Config(format!(
                "cannot add properties to {} node {id} after it was sent",
                node.label
            )));
        }
        let keys: Vec<String> = fresh.iter().map(|(k, _)| k.clone()).collect();
        node.properties.extend(fresh);
        self.index_node(id, keys);
        Ok(())
    }

    fn lookup(&self, label: &str, property: &str, value: &PropertyValue, out: &mut Vec<NodeId>) {
        let Some(key) = value.scalar_key() else {
            return;
        };
        if let Some(ids) = self.index.get(&(label.to_string(), property.to_string())).and_then(|m| m.get(&key)) {
            out.extend_from_slice(ids);
        }
    }

    fn create_edge(&mut self, src: NodeId, dst: NodeId, etype: &str, properties: Properties) -> Result<(), EtlError> {
        self.edges.push(PendingEdge {
            src,
            dst,
            etype: etype.to_string(),
            properties,
        });
        if self.edges.len() >= self.batch_size {
            self.flush_edges()?;
        }
        Ok(())
    }
}

fn endpoint_error(batch: u64, e: EndpointError) -> EtlError {
    match e {
        EndpointError::Unreachable(message) => EtlError::Unreachable { batch, message },
        EndpointError::Rejected { code, message } => EtlError::BatchRejected { batch, code, message },
    }
}

fn quote(name: &str) -> String {
    format!("`{name}`")
}

fn write_props(text: &mut String, params: &mut Map<String, Json>, props: &Properties, prefix: &str) {
    if props.is_empty() {
        return;
    }
    text.push_str(" {");
    for (j, (k, v)) in props.iter().enumerate() {
        if j > 0 {
            text.push_str(", ");
        }
        let _ = write!(text, "{}: ${prefix}{j}", quote(k));
        params.insert(format!("{prefix}{j}"), property_json(v));
    }
    text.push('}');
}

fn property_json(v: &PropertyValue) -> Json {
    serde_json::to_value(v).expect("property values serialize")
}
