//! Mapping-driven ETL: delimited sources into tenant graphs.
//!
//! Both loaders read the same mapping the same way: every node mapping in
//! order, then every edge mapping. Entities are deduplicated through a
//! [`DedupRegistry`]; edge endpoints are found by indexed properties of
//! nodes created by the same load.

mod corpus;
mod cypher_load;
mod load;
mod mapping;
mod registry;

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId, Properties, PropertyValue, TenantHandle};

pub use corpus::{
    check_corpus, gen_corpus, CorpusManifest, ExpectedQuery, KgManifest, Scale, DRUG_KG, FEDERATION_QUERIES, PATHWAYS_KG,
    TRIALS_KG,
};
pub use cypher_load::{
    load_cypher, EndpointError, HttpEndpoint, LocalEndpoint, QueryEndpoint, QueryReply, DEFAULT_BATCH_SIZE,
    MAX_BATCH_SIZE,
};
pub use mapping::{
    ColumnType, EdgeMapping, EndpointLookup, FilterOp, KeyColumn, MappingConfig, MissingEndpoint, NodeMapping,
    PropertyColumn, RowFilter,
};
pub use registry::{DedupRegistry, NodeSink};

#[derive(Debug, Error)]
pub enum EtlError {
    #[error("invalid mapping: {0}")]
    Config(String),
    #[error("source file `{}` does not exist", .0.display())]
    FileMissing(PathBuf),
    #[error("cannot read `{}`: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("`{}` has no column `{column}`", file.display())]
    MissingColumn { file: PathBuf, column: String },
    #[error("{file}:{line}: malformed row: {reason}")]
    MalformedRow { file: String, line: u64, reason: String },
    #[error("{file}:{line}: no {label} node with {property} = `{value}`")]
    MissingEndpoint {
        file: String,
        line: u64,
        label: String,
        property: String,
        value: String,
    },
    #[error("empty key value for {label}.{property}")]
    EmptyKey { label: String, property: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("batch size {0} is outside 1..=1000")]
    InvalidBatchSize(usize),
    #[error("batch {batch}: endpoint unreachable: {message}")]
    Unreachable { batch: u64, message: String },
    #[error("batch {batch}: server rejected the batch ({code}): {message}")]
    BatchRejected { batch: u64, code: String, message: String },
    #[error("batch {batch}: {message}")]
    BatchMismatch { batch: u64, message: String },
}

impl EtlError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        EtlError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub(crate) fn csv(path: &Path, e: csv::Error) -> Self {
        Self::io(path, e)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Abort on the first malformed row instead of skipping it.
    pub strict: bool,
}

/// A skipped row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowIssue {
    pub file: String,
    pub line: u64,
    pub reason: String,
}

/// Counters for one mapping over one file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FileStats {
    pub file: String,
    /// `node:<Label>` or `edge:<TYPE>`.
    pub mapping: String,
    pub rows_read: u64,
    pub rows_filtered: u64,
    /// Malformed rows plus edge rows that produced nothing because an
    /// endpoint was missing.
    pub rows_skipped: u64,
    pub nodes_created: u64,
    pub nodes_deduped: u64,
    pub edges_created: u64,
    /// Lookup values with no matching node under the skip policy.
    pub endpoints_missing: u64,
}

impl FileStats {
    fn new(file: &str, mapping: String) -> Self {
        FileStats {
            file: file.to_string(),
            mapping,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadStats {
    pub nodes_created: u64,
    pub nodes_deduped: u64,
    pub edges_created: u64,
    pub rows_read: u64,
    pub rows_filtered: u64,
    pub rows_skipped: u64,
    pub endpoints_missing: u64,
    /// Registry calls made by this load; equals created plus deduped.
    pub key_lookups: u64,
    /// Requests sent to a query endpoint; zero for native loads.
    pub requests: u64,
    pub duration_ms: f64,
    pub files: Vec<FileStats>,
    pub issues: Vec<RowIssue>,
}

impl LoadStats {
    fn absorb(&mut self, f: FileStats) {
        self.nodes_created += f.nodes_created;
        self.nodes_deduped += f.nodes_deduped;
        self.edges_created += f.edges_created;
        self.rows_read += f.rows_read;
        self.rows_filtered += f.rows_filtered;
        self.rows_skipped += f.rows_skipped;
        self.endpoints_missing += f.endpoints_missing;
        self.files.push(f);
    }
}

/// Store-backed sink whose lookups only see nodes created after it was made.
struct JobGraph<'a> {
    graph: &'a mut Graph,
    first: NodeId,
}

impl NodeSink for JobGraph<'_> {
    fn declare_index(&mut self, label: &str, property: &str) -> Result<(), EtlError> {
        NodeSink::declare_index(self.graph, label, property)
    }

    fn create_node(
        &mut self,
        label: &str,
        key_property: &str,
        properties: Properties,
        indexed: &[&str],
    ) -> Result<NodeId, EtlError> {
        NodeSink::create_node(self.graph, label, key_property, properties, indexed)
    }

    fn merge_absent(&mut self, id: NodeId, properties: Properties) -> Result<(), EtlError> {
        NodeSink::merge_absent(self.graph, id, properties)
    }

    fn lookup(&self, label: &str, property: &str, value: &PropertyValue, out: &mut Vec<NodeId>) {
        let start = out.len();
        NodeSink::lookup(&*self.graph, label, property, value, out);
        let mut kept = start;
        for i in start..out.len() {
            if out[i] >= self.first {
                out[kept] = out[i];
                kept += 1;
            }
        }
        out.truncate(kept);
    }

    fn create_edge(&mut self, src: NodeId, dst: NodeId, etype: &str, properties: Properties) -> Result<(), EtlError> {
        NodeSink::create_edge(self.graph, src, dst, etype, properties)
    }
}

/// Loads sources straight into the store, without any query language.
///
/// A failed load stops at the failing row; rows before it stay loaded.
pub fn load_native(
    graph: &mut Graph,
    mapping: &MappingConfig,
    registry: &mut DedupRegistry,
    opts: &LoadOptions,
) -> Result<LoadStats, EtlError> {
    let first = graph.node_count() as NodeId;
    let mut sink = JobGraph { graph, first };
    load::run_load(&mut sink, mapping, registry, opts)
}

/// [`load_native`] under the tenant's write lock.
pub fn load_native_tenant(
    tenant: &TenantHandle,
    mapping: &MappingConfig,
    registry: &mut DedupRegistry,
    opts: &LoadOptions,
) -> Result<LoadStats, EtlError> {
    load_native(&mut tenant.write(), mapping, registry, opts)
}
