//! Row-by-row load driver shared by the native and Cypher loaders.

use std::time::Instant;

use csv::StringRecord;

use super::mapping::{BoundColumns, BoundFilter, BoundLookup, EdgeMapping, EndpointLookup, MissingEndpoint, NodeMapping, SourceFile};
use super::registry::{DedupRegistry, NodeSink};
use super::{EtlError, FileStats, LoadOptions, LoadStats, MappingConfig, RowIssue};
use crate::graph::{NodeId, Properties, PropertyValue};

/// Loads every node mapping, then every edge mapping, in file order.
pub(crate) fn run_load<S: NodeSink + ?Sized>(
    sink: &mut S,
    mapping: &MappingConfig,
    registry: &mut DedupRegistry,
    opts: &LoadOptions,
) -> Result<LoadStats, EtlError> {
    mapping.validate()?;
    let started = Instant::now();
    let lookups_before = registry.hits() + registry.misses();
    for (label, property) in mapping.indexed_pairs() {
        sink.declare_index(&label, &property)?;
    }
    let mut stats = LoadStats::default();
    for m in &mapping.node_mappings {
        let file = load_nodes(sink, mapping, m, registry, opts, &mut stats.issues)?;
        stats.absorb(file);
    }
    for m in &mapping.edge_mappings {
        let file = load_edges(sink, mapping, m, registry, opts, &mut stats.issues)?;
        stats.absorb(file);
    }
    stats.key_lookups = registry.hits() + registry.misses() - lookups_before;
    stats.duration_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(stats)
}

struct RowContext<'a> {
    strict: bool,
    stats: &'a mut FileStats,
    issues: &'a mut Vec<RowIssue>,
}

impl RowContext<'_> {
    fn malformed(&mut self, line: u64, reason: String) -> Result<(), EtlError> {
        if self.strict {
            return Err(EtlError::MalformedRow {
                file: self.stats.file.clone(),
                line,
                reason,
            });
        }
        self.stats.rows_skipped += 1;
        self.issues.push(RowIssue {
            file: self.stats.file.clone(),
            line,
            reason,
        });
        Ok(())
    }
}

fn load_nodes<S: NodeSink + ?Sized>(
    sink: &mut S,
    mapping: &MappingConfig,
    m: &NodeMapping,
    registry: &mut DedupRegistry,
    opts: &LoadOptions,
    issues: &mut Vec<RowIssue>,
) -> Result<FileStats, EtlError> {
    let mut source = SourceFile::open(mapping, &m.file, m.delimiter.as_deref())?;
    let key_col = source.column(&m.key.column)?;
    let columns = BoundColumns::bind(&m.properties, &source)?;
    let filter = BoundFilter::bind(m.filter.as_ref(), &source)?;
    let indexed: Vec<&str> = m.indexed.iter().map(String::as_str).collect();
    let mut stats = FileStats::new(&m.file, format!("node:{}", m.label));
    let mut ctx = RowContext {
        strict: opts.strict,
        stats: &mut stats,
        issues,
    };
    let mut fields = StringRecord::new();
    while let Some(line) = source.next_row(&mut fields)? {
        ctx.stats.rows_read += 1;
        if fields.len() != source.width() {
            ctx.malformed(line, format!("expected {} fields, found {}", source.width(), fields.len()))?;
            continue;
        }
        if let Some(f) = &filter {
            match f.keep(&fields) {
                Ok(true) => {}
                Ok(false) => {
                    ctx.stats.rows_filtered += 1;
                    continue;
                }
                Err(reason) => {
                    ctx.malformed(line, reason)?;
                    continue;
                }
            }
        }
        let key = match super::mapping::parse_cell(m.key.kind, None, fields.get(key_col).unwrap_or("")) {
            Ok(Some(k)) => k,
            Ok(None) => {
                ctx.malformed(line, format!("empty key column `{}`", m.key.column))?;
                continue;
            }
            Err(e) => {
                ctx.malformed(line, format!("key column `{}`: {e}", m.key.column))?;
                continue;
            }
        };
        let props = match columns.extract(&fields) {
            Ok(p) => p,
            Err(reason) => {
                ctx.malformed(line, reason)?;
                continue;
            }
        };
        let (_, created) = registry.get_or_create(sink, &m.label, &m.key.property, &key, props, &indexed)?;
        if created {
            ctx.stats.nodes_created += 1;
        } else {
            ctx.stats.nodes_deduped += 1;
        }
    }
    Ok(stats)
}

fn load_edges<S: NodeSink + ?Sized>(
    sink: &mut S,
    mapping: &MappingConfig,
    m: &EdgeMapping,
    registry: &mut DedupRegistry,
    opts: &LoadOptions,
    issues: &mut Vec<RowIssue>,
) -> Result<FileStats, EtlError> {
    let mut source = SourceFile::open(mapping, &m.file, m.delimiter.as_deref())?;
    let src_col = BoundLookup::bind(&m.source, &source)?;
    let dst_col = BoundLookup::bind(&m.target, &source)?;
    let columns = BoundColumns::bind(&m.properties, &source)?;
    let filter = BoundFilter::bind(m.filter.as_ref(), &source)?;
    let mut stats = FileStats::new(&m.file, format!("edge:{}", m.etype));
    let mut ctx = RowContext {
        strict: opts.strict,
        stats: &mut stats,
        issues,
    };
    let mut fields = StringRecord::new();
    while let Some(line) = source.next_row(&mut fields)? {
        ctx.stats.rows_read += 1;
        if fields.len() != source.width() {
            ctx.malformed(line, format!("expected {} fields, found {}", source.width(), fields.len()))?;
            continue;
        }
        if let Some(f) = &filter {
            match f.keep(&fields) {
                Ok(true) => {}
                Ok(false) => {
                    ctx.stats.rows_filtered += 1;
                    continue;
                }
                Err(reason) => {
                    ctx.malformed(line, reason)?;
                    continue;
                }
            }
        }
        let parsed = src_col
            .values(&fields)
            .and_then(|s| dst_col.values(&fields).map(|d| (s, d)))
            .and_then(|(s, d)| columns.extract(&fields).map(|p| (s, d, p)));
        let (srcs, dsts, props) = match parsed {
            Ok(v) => v,
            Err(reason) => {
                ctx.malformed(line, reason)?;
                continue;
            }
        };
        if srcs.is_empty() || dsts.is_empty() {
            let column = if srcs.is_empty() { &m.source.column } else { &m.target.column };
            ctx.malformed(line, format!("empty lookup column `{column}`"))?;
            continue;
        }
        let mut missed = false;
        let src_ids = resolve_all(sink, registry, m, &m.source, &srcs, line, &mut ctx, &mut missed)?;
        let dst_ids = resolve_all(sink, registry, m, &m.target, &dsts, line, &mut ctx, &mut missed)?;
        let mut made = 0;
        for &s in &src_ids {
            for &d in &dst_ids {
                sink.create_edge(s, d, &m.etype, props.clone())?;
                made += 1;
            }
        }
        ctx.stats.edges_created += made;
        if missed && made == 0 {
            ctx.stats.rows_skipped += 1;
        }
    }
    Ok(stats)
}

#[allow(clippy::too_many_arguments)]
fn resolve_all<S: NodeSink + ?Sized>(
    sink: &mut S,
    registry: &mut DedupRegistry,
    m: &EdgeMapping,
    lookup: &EndpointLookup,
    values: &[PropertyValue],
    line: u64,
    ctx: &mut RowContext<'_>,
    missed: &mut bool,
) -> Result<Vec<NodeId>, EtlError> {
    let mut ids = Vec::new();
    for value in values {
        let before = ids.len();
        sink.lookup(&lookup.label, &lookup.property, value, &mut ids);
        if ids.len() > before {
            continue;
        }
        match m.on_missing_endpoint {
            MissingEndpoint::Skip => {
                *missed = true;
                ctx.stats.endpoints_missing += 1;
            }
            MissingEndpoint::Create => {
                let (id, created) =
                    registry.get_or_create(sink, &lookup.label, &lookup.property, value, Properties::new(), &[])?;
                if created {
                    ctx.stats.nodes_created += 1;
                } else {
                    ctx.stats.nodes_deduped += 1;
                }
                ids.push(id);
            }
            MissingEndpoint::Error => {
                return Err(EtlError::MissingEndpoint {
                    file: ctx.stats.file.clone(),
                    line,
                    label: lookup.label.clone(),
                    property: lookup.property.clone(),
                    value: value_text(value),
                })
            }
        }
    }
    Ok(ids)
}

fn value_text(v: &PropertyValue) -> String {
    match v {
        PropertyValue::Text(s) => s.clone(),
        other => serde_json::to_string(other).unwrap_or_default(),
    }
}
