//! `.sgsnap` snapshots: gzip-compressed JSON lines.
//!
//! ```text
//! {"t":"h","v":1,"tenant":"<name>","nodes":N,"edges":M,"exported_at":"<ISO8601Z>"}
//! {"t":"n","id":<uint>,"l":["Label",...],"p":{"k":<value>,...}}
//! {"t":"e","id":<uint>,"s":<src>,"d":<dst>,"y":"TYPE","p":{...}}
//! ```
//!
//! One header line, then all nodes, then all edges. Ids in the file are the
//! exporting tenant's ids; an import assigns fresh ids and remaps edges.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::time::Instant;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId, Properties, PropertyValue, TenantHandle};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format_version: u32,
    pub node_count: u64,
    pub edge_count: u64,
    pub source_tenant: String,
    pub exported_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportStats {
    pub nodes_imported: u64,
    pub edges_imported: u64,
    pub id_offset_mapping_size: u64,
    pub duration_ms: f64,
}

/// Index declarations applied to the target tenant before an import.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportConfig {
    #[serde(default)]
    pub indexes: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed record at line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("unsupported snapshot version {version} at line {line}")]
    UnsupportedVersion { line: u64, version: u64 },
    #[error("node record at line {line} follows edge records")]
    EdgeBeforeNodes { line: u64 },
    #[error("edge at line {line} references unknown node {id}")]
    DanglingEdge { line: u64, id: u64 },
    #[error("duplicate {kind} id {id} at line {line}")]
    DuplicateId { line: u64, kind: &'static str, id: u64 },
    #[error("header declares {expected_nodes} nodes / {expected_edges} edges but the file holds {found_nodes} / {found_edges}")]
    HeaderCountMismatch {
        expected_nodes: u64,
        expected_edges: u64,
        found_nodes: u64,
        found_edges: u64,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl SnapshotError {
    /// 1-based line of the fault, when it has one.
    pub fn line(&self) -> Option<u64> {
        match self {
            SnapshotError::Malformed { line, .. }
            | SnapshotError::UnsupportedVersion { line, .. }
            | SnapshotError::EdgeBeforeNodes { line }
            | SnapshotError::DanglingEdge { line, .. }
            | SnapshotError::DuplicateId { line, .. } => Some(*line),
            _ => None,
        }
    }
}

// ── Records ────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct HeaderOut<'a> {
    t: &'static str,
    v: u32,
    tenant: &'a str,
    nodes: u64,
    edges: u64,
    exported_at: &'a str,
}

#[derive(Serialize)]
struct NodeOut<'a> {
    t: &'static str,
    id: u64,
    l: Vec<&'a str>,
    p: &'a Properties,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    t: &'static str,
    id: u64,
    s: u64,
    d: u64,
    y: &'a str,
    p: &'a Properties,
}

/// Union of every record shape; `t` picks which fields must be present.
#[derive(Deserialize)]
struct RecordIn {
    t: String,
    v: Option<u64>,
    tenant: Option<String>,
    nodes: Option<u64>,
    edges: Option<u64>,
    exported_at: Option<String>,
    id: Option<u64>,
    l: Option<Vec<String>>,
    p: Option<Properties>,
    s: Option<u64>,
    d: Option<u64>,
    y: Option<String>,
}

enum Record {
    Header(SnapshotHeader),
    Node {
        id: u64,
        labels: Vec<String>,
        props: Properties,
    },
    Edge {
        id: u64,
        src: u64,
        dst: u64,
        etype: String,
        props: Properties,
    },
}

fn malformed(line: u64, reason: impl Into<String>) -> SnapshotError {
    SnapshotError::Malformed {
        line,
        reason: reason.into(),
    }
}

fn parse_record(text: &str, line: u64) -> Result<Record, SnapshotError> {
    let raw: RecordIn = serde_json::from_str(text).map_err(|e| malformed(line, e.to_string()))?;
    let need = |v: Option<u64>, field: &str| v.ok_or_else(|| malformed(line, format!("missing `{field}`")));
    match raw.t.as_str() {
        "h" => {
            let version = need(raw.v, "v")?;
            if version != FORMAT_VERSION as u64 {
                return Err(SnapshotError::UnsupportedVersion { line, version });
            }
            Ok(Record::Header(SnapshotHeader {
                format_version: FORMAT_VERSION,
                node_count: need(raw.nodes, "nodes")?,
                edge_count: need(raw.edges, "edges")?,
                source_tenant: raw.tenant.ok_or_else(|| malformed(line, "missing `tenant`"))?,
                exported_at: raw.exported_at.unwrap_or_default(),
            }))
        }
        "n" => {
            let labels = raw.l.ok_or_else(|| malformed(line, "missing `l`"))?;
            if labels.is_empty() || labels.iter().any(String::is_empty) {
                return Err(malformed(line, "node needs non-empty labels"));
            }
            Ok(Record::Node {
                id: need(raw.id, "id")?,
                labels,
                props: raw.p.unwrap_or_default(),
            })
        }
        "e" => {
            let etype = raw.y.ok_or_else(|| malformed(line, "missing `y`"))?;
            if etype.is_empty() {
                return Err(malformed(line, "edge type must be non-empty"));
            }
            Ok(Record::Edge {
                id: need(raw.id, "id")?,
                src: need(raw.s, "s")?,
                dst: need(raw.d, "d")?,
                etype,
                props: raw.p.unwrap_or_default(),
            })
        }
        other => Err(malformed(line, format!("unknown record type `{other}`"))),
    }
}

// ── Export ─────────────────────────────────────────────────────────────────

fn now_iso8601() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string()
}

/// Writes `graph` as a snapshot. Nodes by id, then edges by id.
pub fn export_snapshot<W: Write>(graph: &Graph, sink: W) -> Result<SnapshotHeader, SnapshotError> {
    let header = SnapshotHeader {
        format_version: FORMAT_VERSION,
        node_count: graph.node_count() as u64,
        edge_count: graph.edge_count() as u64,
        source_tenant: graph.name().to_string(),
        exported_at: now_iso8601(),
    };
    let mut out = BufWriter::with_capacity(1 << 16, GzEncoder::new(sink, Compression::default()));
    write_line(
        &mut out,
        &HeaderOut {
            t: "h",
            v: FORMAT_VERSION,
            tenant: &header.source_tenant,
            nodes: header.node_count,
            edges: header.edge_count,
            exported_at: &header.exported_at,
        },
    )?;
    for node in graph.nodes() {
        write_line(
            &mut out,
            &NodeOut {
                t: "n",
                id: node.id,
                l: node.labels.iter().map(|l| &**l).collect(),
                p: &node.properties,
            },
        )?;
    }
    for edge in graph.edges() {
        write_line(
            &mut out,
            &EdgeOut {
                t: "e",
                id: edge.id,
                s: edge.src,
                d: edge.dst,
                y: &edge.etype,
                p: &edge.properties,
            },
        )?;
    }
    let encoder = out.into_inner().map_err(|e| e.into_error())?;
    encoder.finish()?.flush()?;
    Ok(header)
}

/// Export under the tenant's read lock.
pub fn export_tenant<W: Write>(tenant: &TenantHandle, sink: W) -> Result<SnapshotHeader, SnapshotError> {
    export_snapshot(&tenant.read(), sink)
}

fn write_line<W: Write, T: Serialize>(out: &mut W, record: &T) -> Result<(), SnapshotError> {
    serde_json::to_writer(&mut *out, record).map_err(std::io::Error::other)?;
    out.write_all(b"\n")?;
    Ok(())
}

// ── Import ─────────────────────────────────────────────────────────────────

fn lines<R: Read>(source: R) -> impl Iterator<Item = (u64, std::io::Result<String>)> {
    BufReader::with_capacity(1 << 16, MultiGzDecoder::new(source))
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l))
}

/// Appends the snapshot's contents to `graph` with fresh ids.
///
/// On any fault the graph is rolled back to its state before the call.
pub fn import_snapshot<R: Read>(
    graph: &mut Graph,
    source: R,
    config: &ImportConfig,
) -> Result<ImportStats, SnapshotError> {
    let started = Instant::now();
    let checkpoint = graph.checkpoint();
    match import_inner(graph, source, config) {
        Ok((nodes, edges, mapped)) => Ok(ImportStats {
            nodes_imported: nodes,
            edges_imported: edges,
            id_offset_mapping_size: mapped,
            duration_ms: started.elapsed().as_secs_f64() * 1e3,
        }),
        Err(e) => {
            graph.rollback(checkpoint);
            Err(e)
        }
    }
}

/// Import under the tenant's write lock.
pub fn import_into_tenant<R: Read>(
    tenant: &TenantHandle,
    source: R,
    config: &ImportConfig,
) -> Result<ImportStats, SnapshotError> {
    import_snapshot(&mut tenant.write(), source, config)
}

fn import_inner<R: Read>(
    graph: &mut Graph,
    source: R,
    config: &ImportConfig,
) -> Result<(u64, u64, u64), SnapshotError> {
    for (label, props) in &config.indexes {
        for prop in props {
            graph.declare_index(label, prop);
        }
    }
    let mut header: Option<SnapshotHeader> = None;
    let mut id_map: HashMap<u64, NodeId> = HashMap::new();
    let mut seen_edges: HashSet<u64> = HashSet::new();
    let (mut nodes, mut edges) = (0u64, 0u64);

    for (line, text) in lines(source) {
        let text = text.map_err(|e| malformed(line, e.to_string()))?;
        if header.is_none() {
            match parse_record(&text, line)? {
                Record::Header(h) => {
                    header = Some(h);
                    continue;
                }
                _ => return Err(malformed(line, "first line must be a header record")),
            }
        }
        match parse_record(&text, line)? {
            Record::Header(_) => return Err(malformed(line, "duplicate header record")),
            Record::Node { id, labels, props } => {
                if edges > 0 {
                    return Err(SnapshotError::EdgeBeforeNodes { line });
                }
                if id_map.contains_key(&id) {
                    return Err(SnapshotError::DuplicateId { line, kind: "node", id });
                }
                let new_id = graph
                    .create_node(&labels, props, &[])
                    .map_err(|e| malformed(line, e.to_string()))?;
                id_map.insert(id, new_id);
                nodes += 1;
            }
            Record::Edge {
                id,
                src,
                dst,
                etype,
                props,
            } => {
                if !seen_edges.insert(id) {
                    return Err(SnapshotError::DuplicateId { line, kind: "edge", id });
                }
                let s = *id_map.get(&src).ok_or(SnapshotError::DanglingEdge { line, id: src })?;
                let d = *id_map.get(&dst).ok_or(SnapshotError::DanglingEdge { line, id: dst })?;
                graph
                    .create_edge(s, d, &etype, props)
                    .map_err(|e| malformed(line, e.to_string()))?;
                edges += 1;
            }
        }
    }
    let header = header.ok_or_else(|| malformed(1, "missing header record"))?;
    if header.node_count != nodes || header.edge_count != edges {
        return Err(SnapshotError::HeaderCountMismatch {
            expected_nodes: header.node_count,
            expected_edges: header.edge_count,
            found_nodes: nodes,
            found_edges: edges,
        });
    }
    Ok((nodes, edges, id_map.len() as u64))
}

// ── Validation ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fault {
    pub line: u64,
    pub kind: &'static str,
    pub message: String,
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@line {}: {}", self.kind, self.line, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub header: Option<SnapshotHeader>,
    pub nodes: u64,
    pub edges: u64,
    pub faults: Vec<Fault>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.faults.is_empty()
    }
}

/// Reads the whole source and reports every structural fault.
pub fn validate_snapshot<R: Read>(source: R) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut node_lines: HashMap<u64, u64> = HashMap::new();
    let mut edge_ids: HashSet<u64> = HashSet::new();
    let mut edge_refs: Vec<(u64, u64, u64)> = Vec::new();
    let mut first_edge_line: Option<u64> = None;
    let mut ordering_reported = false;
    let push = |report: &mut ValidationReport, line, kind, message: String| {
        report.faults.push(Fault { line, kind, message });
    };
    let mut last_line = 0;

    for (line, text) in lines(source) {
        last_line = line;
        let text = match text {
            Ok(t) => t,
            Err(e) => {
                push(&mut report, line, "malformed-record", e.to_string());
                break;
            }
        };
        let record = match parse_record(&text, line) {
            Ok(r) => r,
            Err(SnapshotError::UnsupportedVersion { version, .. }) => {
                push(&mut report, line, "unsupported-version", format!("version {version}"));
                continue;
            }
            Err(e) => {
                push(&mut report, line, "malformed-record", e.to_string());
                continue;
            }
        };
        match record {
            Record::Header(h) => {
                if line != 1 {
                    push(&mut report, line, "malformed-record", "header must be the first line".into());
                } else {
                    report.header = Some(h);
                }
            }
            Record::Node { id, .. } => {
                if line == 1 {
                    push(&mut report, 1, "malformed-record", "first line must be a header record".into());
                }
                if let (Some(edge_line), false) = (first_edge_line, ordering_reported) {
                    ordering_reported = true;
                    push(
                        &mut report,
                        edge_line,
                        "edge-before-nodes",
                        format!("edge record precedes node record at line {line}"),
                    );
                }
                if node_lines.insert(id, line).is_some() {
                    push(&mut report, line, "duplicate-id", format!("node id {id}"));
                }
                report.nodes += 1;
            }
            Record::Edge { id, src, dst, .. } => {
                if line == 1 {
                    push(&mut report, 1, "malformed-record", "first line must be a header record".into());
                }
                first_edge_line.get_or_insert(line);
                if !edge_ids.insert(id) {
                    push(&mut report, line, "duplicate-id", format!("edge id {id}"));
                }
                edge_refs.push((line, src, dst));
                report.edges += 1;
            }
        }
    }
    if last_line == 0 {
        push(&mut report, 1, "malformed-record", "missing header record".into());
    }
    for (line, src, dst) in edge_refs {
        for end in [src, dst] {
            if !node_lines.contains_key(&end) {
                push(&mut report, line, "dangling-edge-reference", format!("node {end} is absent"));
            }
        }
    }
    if let Some(h) = &report.header {
        if h.node_count != report.nodes || h.edge_count != report.edges {
            let message = format!(
                "header declares {}/{} nodes/edges, file holds {}/{}",
                h.node_count, h.edge_count, report.nodes, report.edges
            );
            push(&mut report, 1, "header-count-mismatch", message);
        }
    }
    report.faults.sort_by_key(|f| f.line);
    report
}

/// Reads a snapshot's header line without consuming the rest.
pub fn read_header<R: Read>(source: R) -> Result<SnapshotHeader, SnapshotError> {
    match lines(source).next() {
        Some((line, text)) => match parse_record(&text.map_err(|e| malformed(line, e.to_string()))?, line)? {
            Record::Header(h) => Ok(h),
            _ => Err(malformed(1, "first line must be a header record")),
        },
        None => Err(malformed(1, "missing header record")),
    }
}

impl PropertyValue {
    /// JSON form used in snapshot records.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("property values serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::canonical_form;

    fn gz(lines: &[&str]) -> Vec<u8> {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        for l in lines {
            enc.write_all(l.as_bytes()).unwrap();
            enc.write_all(b"\n").unwrap();
        }
        enc.finish().unwrap()
    }

    fn decompress(bytes: &[u8]) -> String {
        let mut s = String::new();
        MultiGzDecoder::new(bytes).read_to_string(&mut s).unwrap();
        s
    }

    fn sample() -> Graph {
        let mut g = Graph::new("src");
        let mut p = Properties::new();
        p.insert("name".into(), "Metformin".into());
        p.insert("synonyms".into(), PropertyValue::TextList(vec!["Glucophage".into()]));
        p.insert("score".into(), PropertyValue::Real(2.0));
        let a = g.create_node(["Drug"], p, &[]).unwrap();
        let b = g.create_node(["Gene"], Properties::new(), &[]).unwrap();
        let mut ep = Properties::new();
        ep.insert("type".into(), "inhibitor".into());
        ep.insert("approved".into(), true.into());
        g.create_edge(a, b, "INTERACTS_WITH_GENE", ep).unwrap();
        g
    }

    #[test]
    fn empty_tenant_exports_header_only() {
        let g = Graph::new("default");
        let mut buf = Vec::new();
        let h = export_snapshot(&g, &mut buf).unwrap();
        assert_eq!((h.node_count, h.edge_count), (0, 0));
        let text = decompress(&buf);
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with(r#"{"t":"h","v":1,"tenant":"default","nodes":0,"edges":0,"exported_at":""#));
    }

    #[test]
    fn record_encoding_is_exact() {
        let mut buf = Vec::new();
        export_snapshot(&sample(), &mut buf).unwrap();
        let text = decompress(&buf);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[1],
            r#"{"t":"n","id":0,"l":["Drug"],"p":{"name":"Metformin","score":2.0,"synonyms":["Glucophage"]}}"#
        );
        assert_eq!(lines[2], r#"{"t":"n","id":1,"l":["Gene"],"p":{}}"#);
        assert_eq!(
            lines[3],
            r#"{"t":"e","id":0,"s":0,"d":1,"y":"INTERACTS_WITH_GENE","p":{"approved":true,"type":"inhibitor"}}"#
        );
    }

    #[test]
    fn import_appends_with_new_ids() {
        let mut buf = Vec::new();
        export_snapshot(&sample(), &mut buf).unwrap();
        let mut target = Graph::new("t");
        target.create_node(["Existing"], Properties::new(), &[]).unwrap();
        let stats = import_snapshot(&mut target, &buf[..], &ImportConfig::default()).unwrap();
        assert_eq!((stats.nodes_imported, stats.edges_imported), (2, 1));
        assert_eq!(target.node_count(), 3);
        assert_eq!(target.edges()[0].src, 1);
        assert_eq!(target.edges()[0].dst, 2);
        import_snapshot(&mut target, &buf[..], &ImportConfig::default()).unwrap();
        assert_eq!(target.nodes_by_label_prop("Drug", "name", &"Metformin".into()).len(), 2);
    }

    #[test]
    fn round_trip_is_content_identical() {
        let src = sample();
        let mut first = Vec::new();
        export_snapshot(&src, &mut first).unwrap();
        let mut copy = Graph::new("src");
        import_snapshot(&mut copy, &first[..], &ImportConfig::default()).unwrap();
        assert_eq!(canonical_form(&src), canonical_form(&copy));
        let mut second = Vec::new();
        export_snapshot(&copy, &mut second).unwrap();
        let strip = |t: String| t.lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(decompress(&first)), strip(decompress(&second)));
    }

    #[test]
    fn faults_roll_back_the_import() {
        let bad = gz(&[
            r#"{"t":"h","v":1,"tenant":"x","nodes":2,"edges":1,"exported_at":"z"}"#,
            r#"{"t":"n","id":5,"l":["A"],"p":{}}"#,
            r#"{"t":"n","id":6,"l":["A"],"p":{}}"#,
            r#"{"t":"e","id":0,"s":5,"d":9,"y":"X","p":{}}"#,
        ]);
        let mut g = sample();
        let before = canonical_form(&g);
        let err = import_snapshot(&mut g, &bad[..], &ImportConfig::default()).unwrap_err();
        assert!(matches!(err, SnapshotError::DanglingEdge { line: 4, id: 9 }), "{err}");
        assert_eq!(canonical_form(&g), before);
        assert_eq!(g.schema(), sample().schema());
    }

    #[test]
    fn import_error_kinds() {
        type Case<'a> = (Vec<&'a str>, fn(&SnapshotError) -> bool);
        let cases: Vec<Case> = vec![
            (
                vec![
                    r#"{"t":"h","v":1,"tenant":"x","nodes":1,"edges":1,"exported_at":"z"}"#,
                    r#"{"t":"e","id":0,"s":0,"d":0,"y":"X","p":{}}"#,
                    r#"{"t":"n","id":0,"l":["A"],"p":{}}"#,
                ],
                |e| matches!(e, SnapshotError::DanglingEdge { line: 2, .. }),
            ),
            (
                vec![
                    r#"{"t":"h","v":1,"tenant":"x","nodes":1,"edges":1,"exported_at":"z"}"#,
                    r#"{"t":"n","id":0,"l":["A"],"p":{}}"#,
                    r#"{"t":"e","id":0,"s":0,"d":0,"y":"X","p":{}}"#,
                    r#"{"t":"n","id":1,"l":["A"],"p":{}}"#,
                ],
                |e| matches!(e, SnapshotError::EdgeBeforeNodes { line: 4 }),
            ),
            (
                vec![
                    r#"{"t":"h","v":1,"tenant":"x","nodes":3,"edges":0,"exported_at":"z"}"#,
                    r#"{"t":"n","id":0,"l":["A"],"p":{}}"#,
                ],
                |e| matches!(e, SnapshotError::HeaderCountMismatch { expected_nodes: 3, found_nodes: 1, .. }),
            ),
            (
                vec![
                    r#"{"t":"h","v":1,"tenant":"x","nodes":1,"edges":0,"exported_at":"z"}"#,
                    r#"{"t":"q","id":0}"#,
                ],
                |e| matches!(e, SnapshotError::Malformed { line: 2, .. }),
            ),
            (
                vec![r#"{"t":"h","v":2,"tenant":"x","nodes":0,"edges":0,"exported_at":"z"}"#],
                |e| matches!(e, SnapshotError::UnsupportedVersion { version: 2, .. }),
            ),
            (
                vec![r#"{"t":"n","id":0,"l":["A"],"p":{}}"#],
                |e| matches!(e, SnapshotError::Malformed { line: 1, .. }),
            ),
            (
                vec![
                    r#"{"t":"h","v":1,"tenant":"x","nodes":1,"edges":0,"exported_at":"z"}"#,
                    r#"{"t":"n","id":0,"l":["A"],"p":{"x":{"nested":1}}}"#,
                ],
                |e| matches!(e, SnapshotError::Malformed { line: 2, .. }),
            ),
        ];
        for (lines, check) in cases {
            let mut g = Graph::new("t");
            let err = import_snapshot(&mut g, &gz(&lines)[..], &ImportConfig::default()).unwrap_err();
            assert!(check(&err), "unexpected error {err:?} for {lines:?}");
            assert_eq!(g.node_count(), 0);
        }
        let mut g = Graph::new("t");
        assert!(import_snapshot(&mut g, &b""[..], &ImportConfig::default()).is_err());
        assert!(import_snapshot(&mut g, &b"not gzip"[..], &ImportConfig::default()).is_err());
    }

    #[test]
    fn validation_reports_every_fault() {
        let mut buf = Vec::new();
        export_snapshot(&sample(), &mut buf).unwrap();
        assert!(validate_snapshot(&buf[..]).is_ok());

        let bad = gz(&[
            r#"{"t":"h","v":1,"tenant":"x","nodes":2,"edges":2,"exported_at":"z"}"#,
            r#"{"t":"e","id":0,"s":0,"d":1,"y":"X","p":{}}"#,
            r#"{"t":"n","id":0,"l":["A"],"p":{}}"#,
            r#"{"t":"n","id":1,"l":["A"],"p":{}}"#,
            r#"{"t":"e","id":1,"s":0,"d":7,"y":"X","p":{}}"#,
            r#"not json"#,
        ]);
        let report = validate_snapshot(&bad[..]);
        let rendered: Vec<String> = report.faults.iter().map(|f| format!("{}@line {}", f.kind, f.line)).collect();
        assert_eq!(
            rendered,
            vec![
                "edge-before-nodes@line 2",
                "dangling-edge-reference@line 5",
                "malformed-record@line 6",
            ]
        );
    }

    #[test]
    fn index_config_is_applied() {
        let mut buf = Vec::new();
        export_snapshot(&sample(), &mut buf).unwrap();
        let mut g = Graph::with_policy("t", crate::graph::IndexPolicy { auto: false });
        let mut config = ImportConfig::default();
        config.indexes.insert("Gene".into(), vec!["gene_name".into()]);
        import_snapshot(&mut g, &buf[..], &config).unwrap();
        assert!(g.is_indexed("Gene", "gene_name"));
        assert!(!g.is_indexed("Drug", "name"));
    }
}
