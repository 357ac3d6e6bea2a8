//! Tenant graph storage: nodes, edges, adjacency, label and property indexes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use parking_lot::RwLock;
use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use thiserror::Error;

use super::schema::{EdgeTypeSchema, GraphSchema, LabelSchema};
use super::value::{PropertyValue, ValueKey};

pub type NodeId = u64;
pub type EdgeId = u64;
pub type Properties = BTreeMap<String, PropertyValue>;

/// Shared, lockable handle to one tenant's graph.
pub type TenantHandle = Arc<RwLock<Graph>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("tenant name must be non-empty")]
    EmptyTenantName,
    #[error("duplicate tenant `{0}`")]
    DuplicateTenant(String),
    #[error("unknown tenant `{0}`")]
    UnknownTenant(String),
    #[error("a node needs at least one label")]
    NoLabels,
    #[error("label and type names must be non-empty")]
    EmptyName,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge endpoint {0}")]
    UnknownEndpoint(NodeId),
    #[error("invalid property `{key}`: {reason}")]
    InvalidProperty { key: String, reason: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Out,
    In,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub labels: Vec<Arc<str>>,
    pub properties: Properties,
}

impl Node {
    pub fn has_label(&self, label: &str) -> bool {
        self.labels.iter().any(|l| &**l == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub etype: Arc<str>,
    pub properties: Properties,
}

#[derive(Debug, Default, Clone)]
struct EdgeTypeStats {
    count: usize,
    sources: BTreeSet<Arc<str>>,
    targets: BTreeSet<Arc<str>>,
}

type ValueIndex = HashMap<ValueKey, Vec<NodeId>>;

/// Restore point for undoing a failed bulk append.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    nodes: usize,
    edges: usize,
    label_keys: HashMap<Arc<str>, BTreeSet<String>>,
    edge_types: HashMap<Arc<str>, EdgeTypeStats>,
}

/// Which properties get an exact-match index.
///
/// Explicit declarations come from loader or import configuration. With
/// `auto` on, `name`, `synonyms` and every `*_id` property are indexed the
/// first time a label carries them.
#[derive(Debug, Clone)]
pub struct IndexPolicy {
    pub auto: bool,
}

impl Default for IndexPolicy {
    fn default() -> Self {
        IndexPolicy { auto: true }
    }
}

impl IndexPolicy {
    fn wants(&self, property: &str) -> bool {
        self.auto && (property == "name" || property == "synonyms" || property.ends_with("_id"))
    }
}

/// One tenant's property graph.
///
/// Ids are dense and assigned in creation order, so a node or edge id is also
/// its position in storage.
#[derive(Debug, Default)]
pub struct Graph {
    name: String,
    policy: IndexPolicy,
    symbols: HashSet<Arc<str>>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    label_index: HashMap<Arc<str>, Vec<NodeId>>,
    label_keys: HashMap<Arc<str>, BTreeSet<String>>,
    prop_index: HashMap<Arc<str>, HashMap<String, ValueIndex>>,
    edge_types: HashMap<Arc<str>, EdgeTypeStats>,
}

impl Graph {
    pub fn new(name: impl Into<String>) -> Self {
        Graph {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn with_policy(name: impl Into<String>, policy: IndexPolicy) -> Self {
        Graph {
            name: name.into(),
            policy,
            ..Default::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id as usize)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id as usize)
    }

    pub fn out_edges(&self, id: NodeId) -> &[EdgeId] {
        self.out_adj.get(id as usize).map_or(&[], Vec::as_slice)
    }

    pub fn in_edges(&self, id: NodeId) -> &[EdgeId] {
        self.in_adj.get(id as usize).map_or(&[], Vec::as_slice)
    }

    fn intern(&mut self, s: &str) -> Arc<str> {
        if let Some(existing) = self.symbols.get(s) {
            return existing.clone();
        }
        let sym: Arc<str> = Arc::from(s);
        self.symbols.insert(sym.clone());
        sym
    }

    pub fn create_node<L, S>(
        &mut self,
        labels: L,
        properties: Properties,
        indexed_properties: &[&str],
    ) -> Result<NodeId, GraphError>
    where
        L: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut syms: Vec<Arc<str>> = Vec::new();
        for label in labels {
            let label = label.as_ref();
            if label.is_empty() {
                return Err(GraphError::EmptyName);
            }
            if !syms.iter().any(|s| &**s == label) {
                let sym = self.intern(label);
                syms.push(sym);
            }
        }
        if syms.is_empty() {
            return Err(GraphError::NoLabels);
        }
        for (key, value) in &properties {
            value.validate().map_err(|reason| GraphError::InvalidProperty {
                key: key.clone(),
                reason,
            })?;
        }

        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node {
            id,
            labels: syms.clone(),
            properties,
        });
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());

        for label in &syms {
            self.label_index.entry(label.clone()).or_default().push(id);
        }
        for label in &syms {
            for prop in indexed_properties {
                self.declare_index(label, prop);
            }
        }
        let keys: Vec<String> = self.nodes[id as usize].properties.keys().cloned().collect();
        for label in &syms {
            for key in &keys {
                self.note_key(label, key);
                if self.is_indexed(label, key) {
                    self.index_one(label, key, id);
                }
            }
        }
        Ok(id)
    }

    fn note_key(&mut self, label: &Arc<str>, key: &str) {
        let keys = self.label_keys.entry(label.clone()).or_default();
        if keys.contains(key) {
            return;
        }
        keys.insert(key.to_string());
        if self.policy.wants(key) {
            self.declare_index(label, key);
        }
    }

    pub fn is_indexed(&self, label: &str, property: &str) -> bool {
        self.prop_index
            .get(label)
            .is_some_and(|props| props.contains_key(property))
    }

    /// Declares an exact-match index on `(label, property)` and backfills it
    /// from the label's current nodes. Idempotent.
    pub fn declare_index(&mut self, label: &str, property: &str) {
        if self.is_indexed(label, property) {
            return;
        }
        let sym = self.intern(label);
        let mut index: ValueIndex = HashMap::default();
        if let Some(ids) = self.label_index.get(label) {
            for &id in ids {
                if let Some(value) = self.nodes[id as usize].properties.get(property) {
                    for key in value.index_keys() {
                        push_sorted(index.entry(key).or_default(), id);
                    }
                }
            }
        }
        self.prop_index
            .entry(sym)
            .or_default()
            .insert(property.to_string(), index);
    }

    fn index_one(&mut self, label: &str, property: &str, id: NodeId) {
        let keys = match self.nodes[id as usize].properties.get(property) {
            Some(v) => v.index_keys(),
            None => return,
        };
        if let Some(index) = self.prop_index.get_mut(label).and_then(|p| p.get_mut(property)) {
            for key in keys {
                push_sorted(index.entry(key).or_default(), id);
            }
        }
    }

    /// Sets `key` on an existing node unless it already has it. Returns
    /// whether the property was written.
    pub fn set_property_if_absent(
        &mut self,
        id: NodeId,
        key: &str,
        value: PropertyValue,
    ) -> Result<bool, GraphError> {
        value.validate().map_err(|reason| GraphError::InvalidProperty {
            key: key.to_string(),
            reason,
        })?;
        let node = self.nodes.get_mut(id as usize).ok_or(GraphError::UnknownNode(id))?;
        if node.properties.contains_key(key) {
            return Ok(false);
        }
        node.properties.insert(key.to_string(), value);
        let labels = node.labels.clone();
        for label in &labels {
            self.note_key(label, key);
            if self.is_indexed(label, key) {
                self.index_one(label, key, id);
            }
        }
        Ok(true)
    }

    pub fn create_edge(
        &mut self,
        src: NodeId,
        dst: NodeId,
        etype: &str,
        properties: Properties,
    ) -> Result<EdgeId, GraphError> {
        if etype.is_empty() {
            return Err(GraphError::EmptyName);
        }
        for endpoint in [src, dst] {
            if endpoint as usize >= self.nodes.len() {
                return Err(GraphError::UnknownEndpoint(endpoint));
            }
        }
        for (key, value) in &properties {
            value.validate().map_err(|reason| GraphError::InvalidProperty {
                key: key.clone(),
                reason,
            })?;
        }
        let sym = self.intern(etype);
        let id = self.edges.len() as EdgeId;
        self.edges.push(Edge {
            id,
            src,
            dst,
            etype: sym.clone(),
            properties,
        });
        self.out_adj[src as usize].push(id);
        self.in_adj[dst as usize].push(id);

        let src_labels = self.nodes[src as usize].labels.clone();
        let dst_labels = self.nodes[dst as usize].labels.clone();
        let stats = self.edge_types.entry(sym).or_default();
        stats.count += 1;
        stats.sources.extend(src_labels);
        stats.targets.extend(dst_labels);
        Ok(id)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            nodes: self.nodes.len(),
            edges: self.edges.len(),
            label_keys: self.label_keys.clone(),
            edge_types: self.edge_types.clone(),
        }
    }

    /// Drops every node and edge created after `cp`. Ids are dense and
    /// appended in order, so every index holds the removed ids at its tail.
    pub fn rollback(&mut self, cp: Checkpoint) {
        let first_node = cp.nodes as NodeId;
        let first_edge = cp.edges as EdgeId;
        self.edges.truncate(cp.edges);
        self.nodes.truncate(cp.nodes);
        self.out_adj.truncate(cp.nodes);
        self.in_adj.truncate(cp.nodes);
        for adj in self.out_adj.iter_mut().chain(self.in_adj.iter_mut()) {
            while adj.last().is_some_and(|&e| e >= first_edge) {
                adj.pop();
            }
        }
        for ids in self.label_index.values_mut() {
            while ids.last().is_some_and(|&n| n >= first_node) {
                ids.pop();
            }
        }
        self.label_index.retain(|_, ids| !ids.is_empty());
        for props in self.prop_index.values_mut() {
            for index in props.values_mut() {
                for ids in index.values_mut() {
                    while ids.last().is_some_and(|&n| n >= first_node) {
                        ids.pop();
                    }
                }
                index.retain(|_, ids| !ids.is_empty());
            }
        }
        self.label_keys = cp.label_keys;
        self.edge_types = cp.edge_types;
    }

    pub fn nodes_by_label(&self, label: &str) -> &[NodeId] {
        self.label_index.get(label).map_or(&[], Vec::as_slice)
    }

    pub fn label_count(&self, label: &str) -> usize {
        self.nodes_by_label(label).len()
    }

    /// Nodes carrying `label` whose `property` matches `value` (any element
    /// for text-lists). Uses the index when one is declared, otherwise scans
    /// the label. Ascending ids.
    pub fn nodes_by_label_prop(&self, label: &str, property: &str, value: &PropertyValue) -> Vec<NodeId> {
        if let (Some(index), Some(key)) = (
            self.prop_index.get(label).and_then(|p| p.get(property)),
            value.scalar_key(),
        ) {
            return index.get(&key).cloned().unwrap_or_default();
        }
        self.scan_label_prop(label, property, value)
    }

    /// Index-free lookup; the reference every indexed lookup must agree with.
    pub fn scan_label_prop(&self, label: &str, property: &str, value: &PropertyValue) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.has_label(label))
            .filter(|n| n.properties.get(property).is_some_and(|v| v.matches_probe(value)))
            .map(|n| n.id)
            .collect()
    }

    /// Raw index bucket for a normalized key, if `(label, property)` is indexed.
    pub fn index_lookup(&self, label: &str, property: &str, key: &ValueKey) -> Option<&[NodeId]> {
        let index = self.prop_index.get(label)?.get(property)?;
        Some(index.get(key).map_or(&[], Vec::as_slice))
    }

    /// `(edge id, other endpoint)` pairs in ascending edge id order.
    pub fn neighbors(
        &self,
        id: NodeId,
        direction: Direction,
        etype: Option<&str>,
    ) -> Result<Vec<(EdgeId, NodeId)>, GraphError> {
        if id as usize >= self.nodes.len() {
            return Err(GraphError::UnknownNode(id));
        }
        let type_ok = |e: &Edge| etype.is_none_or(|t| &*e.etype == t);
        let mut out: Vec<(EdgeId, NodeId)> = Vec::new();
        if matches!(direction, Direction::Out | Direction::Both) {
            for &eid in self.out_edges(id) {
                let e = &self.edges[eid as usize];
                if type_ok(e) {
                    out.push((eid, e.dst));
                }
            }
        }
        if matches!(direction, Direction::In | Direction::Both) {
            for &eid in self.in_edges(id) {
                let e = &self.edges[eid as usize];
                if type_ok(e) {
                    out.push((eid, e.src));
                }
            }
        }
        if direction == Direction::Both {
            out.sort_unstable();
            out.dedup_by_key(|(eid, _)| *eid);
        }
        Ok(out)
    }

    pub fn schema(&self) -> GraphSchema {
        let mut labels: Vec<LabelSchema> = self
            .label_index
            .iter()
            .map(|(name, ids)| {
                let properties = self
                    .label_keys
                    .get(name)
                    .map(|k| k.iter().cloned().collect())
                    .unwrap_or_default();
                let mut indexed: Vec<String> = self
                    .prop_index
                    .get(name)
                    .map(|p| p.keys().cloned().collect())
                    .unwrap_or_default();
                indexed.sort();
                LabelSchema {
                    name: name.to_string(),
                    count: ids.len(),
                    properties,
                    indexed,
                }
            })
            .collect();
        labels.sort_by(|a, b| a.name.cmp(&b.name));
        let mut edge_types: Vec<EdgeTypeSchema> = self
            .edge_types
            .iter()
            .map(|(name, stats)| EdgeTypeSchema {
                name: name.to_string(),
                count: stats.count,
                source_labels: stats.sources.iter().map(|s| s.to_string()).collect(),
                target_labels: stats.targets.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        edge_types.sort_by(|a, b| a.name.cmp(&b.name));
        GraphSchema { labels, edge_types }
    }
}

fn push_sorted(ids: &mut Vec<NodeId>, id: NodeId) {
    match ids.last() {
        Some(&last) if last == id => {}
        Some(&last) if last > id => {
            if let Err(pos) = ids.binary_search(&id) {
                ids.insert(pos, id);
            }
        }
        _ => ids.push(id),
    }
}

/// Registry of named tenants.
#[derive(Debug, Default)]
pub struct GraphStore {
    tenants: RwLock<BTreeMap<String, TenantHandle>>,
}

impl GraphStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_tenant(&self, name: &str) -> Result<TenantHandle, GraphError> {
        if name.is_empty() {
            return Err(GraphError::EmptyTenantName);
        }
        let mut tenants = self.tenants.write();
        if tenants.contains_key(name) {
            return Err(GraphError::DuplicateTenant(name.to_string()));
        }
        let handle = Arc::new(RwLock::new(Graph::new(name)));
        tenants.insert(name.to_string(), handle.clone());
        Ok(handle)
    }

    pub fn tenant(&self, name: &str) -> Result<TenantHandle, GraphError> {
        self.tenants
            .read()
            .get(name)
            .cloned()
            .ok_or_else(|| GraphError::UnknownTenant(name.to_string()))
    }

    pub fn get_or_create_tenant(&self, name: &str) -> Result<TenantHandle, GraphError> {
        match self.tenant(name) {
            Ok(t) => Ok(t),
            Err(_) => match self.create_tenant(name) {
                Err(GraphError::DuplicateTenant(_)) => self.tenant(name),
                other => other,
            },
        }
    }

    pub fn list_tenants(&self) -> Vec<String> {
        self.tenants.read().keys().cloned().collect()
    }

    pub fn tenant_count(&self) -> usize {
        self.tenants.read().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props(pairs: &[(&str, PropertyValue)]) -> Properties {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn tenants_are_unique_and_listable() {
        let store = GraphStore::new();
        let t = store.create_tenant("default").unwrap();
        assert!(t.read().schema().labels.is_empty());
        assert_eq!(
            store.create_tenant("default").unwrap_err(),
            GraphError::DuplicateTenant("default".into())
        );
        store.create_tenant("b").unwrap();
        assert_eq!(store.list_tenants(), vec!["b".to_string(), "default".to_string()]);
        assert_eq!(store.create_tenant("").unwrap_err(), GraphError::EmptyTenantName);
        assert!(matches!(store.tenant("zzz"), Err(GraphError::UnknownTenant(_))));
    }

    #[test]
    fn single_insert_is_indexed() {
        let mut g = Graph::new("t");
        let id = g
            .create_node(
                ["Drug"],
                props(&[("drugbank_id", "DB00001".into()), ("name", "Lepirudin".into())]),
                &["drugbank_id", "name"],
            )
            .unwrap();
        assert_eq!(id, 0);
        assert_eq!(g.nodes_by_label_prop("Drug", "drugbank_id", &"DB00001".into()), vec![0]);
        assert!(g.nodes_by_label_prop("Drug", "name", &"NO_SUCH".into()).is_empty());
    }

    #[test]
    fn synonyms_are_indexed_per_element() {
        let mut g = Graph::new("t");
        g.create_node(["Drug"], props(&[("name", "Other".into())]), &[]).unwrap();
        let id = g
            .create_node(
                ["Drug"],
                props(&[(
                    "synonyms",
                    PropertyValue::TextList(vec!["Glucophage".into(), "Metformin HCl".into()]),
                )]),
                &["synonyms"],
            )
            .unwrap();
        let probe: PropertyValue = "Glucophage".into();
        assert_eq!(g.nodes_by_label_prop("Drug", "synonyms", &probe), vec![id]);
        assert_eq!(g.scan_label_prop("Drug", "synonyms", &probe), vec![id]);
    }

    #[test]
    fn unindexed_lookup_falls_back_to_scan() {
        let mut g = Graph::with_policy("t", IndexPolicy { auto: false });
        g.create_node(["Protein"], props(&[("name", "TP53".into())]), &[]).unwrap();
        assert!(!g.is_indexed("Protein", "name"));
        assert_eq!(g.nodes_by_label_prop("Protein", "name", &"TP53".into()), vec![0]);
    }

    #[test]
    fn edges_update_adjacency_and_reject_unknown_endpoints() {
        let mut g = Graph::new("t");
        let d = g.create_node(["Drug"], Properties::new(), &[]).unwrap();
        let gene = g.create_node(["Gene"], Properties::new(), &[]).unwrap();
        let e = g
            .create_edge(d, gene, "INTERACTS_WITH_GENE", props(&[("type", "inhibitor".into())]))
            .unwrap();
        assert_eq!(
            g.neighbors(d, Direction::Out, Some("INTERACTS_WITH_GENE")).unwrap(),
            vec![(e, gene)]
        );
        assert_eq!(g.neighbors(gene, Direction::In, None).unwrap(), vec![(e, d)]);
        assert_eq!(g.create_edge(d, 99, "X", Properties::new()), Err(GraphError::UnknownEndpoint(99)));
        assert_eq!(g.neighbors(42, Direction::Out, None), Err(GraphError::UnknownNode(42)));
    }

    #[test]
    fn neighbor_filtering_and_both_direction() {
        let mut g = Graph::new("t");
        let a = g.create_node(["N"], Properties::new(), &[]).unwrap();
        let isolated = g.create_node(["N"], Properties::new(), &[]).unwrap();
        let b = g.create_node(["N"], Properties::new(), &[]).unwrap();
        g.create_edge(a, b, "X", Properties::new()).unwrap();
        g.create_edge(a, b, "Y", Properties::new()).unwrap();
        let t = g.create_edge(a, b, "TESTS", Properties::new()).unwrap();
        let back = g.create_edge(b, a, "X", Properties::new()).unwrap();
        let looped = g.create_edge(a, a, "X", Properties::new()).unwrap();
        assert!(g.neighbors(isolated, Direction::Both, None).unwrap().is_empty());
        assert_eq!(g.neighbors(a, Direction::Out, Some("TESTS")).unwrap(), vec![(t, b)]);
        let both = g.neighbors(a, Direction::Both, None).unwrap();
        assert_eq!(both.len(), 5);
        assert!(both.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(both.contains(&(back, b)));
        assert!(both.contains(&(looped, a)));
    }

    #[test]
    fn merged_property_joins_the_index() {
        let mut g = Graph::new("t");
        let first = g.create_node(["Protein"], props(&[("uniprot_id", "P1".into())]), &["name"]).unwrap();
        g.create_node(["Protein"], props(&[("name", "B".into())]), &[]).unwrap();
        assert!(g.set_property_if_absent(first, "name", "A".into()).unwrap());
        assert!(!g.set_property_if_absent(first, "name", "Z".into()).unwrap());
        assert_eq!(g.nodes_by_label_prop("Protein", "name", &"A".into()), vec![first]);
        assert_eq!(g.node(first).unwrap().properties["name"], "A".into());
    }

    #[test]
    fn schema_counts_follow_inserts() {
        let mut g = Graph::new("t");
        g.create_node(["Drug"], props(&[("name", "x".into())]), &[]).unwrap();
        let before = g.schema();
        g.create_node(["Drug"], Properties::new(), &[]).unwrap();
        let after = g.schema();
        assert_eq!(before.labels[0].count + 1, after.labels[0].count);
        assert_eq!(after.labels[0].properties, vec!["name".to_string()]);
    }

    #[test]
    fn rollback_restores_counts_and_indexes() {
        let mut g = Graph::new("t");
        let a = g.create_node(["Drug"], props(&[("name", "A".into())]), &[]).unwrap();
        g.create_edge(a, a, "X", Properties::new()).unwrap();
        let before = g.schema();
        let cp = g.checkpoint();
        let b = g.create_node(["Drug", "Extra"], props(&[("name", "A".into()), ("k", 1.into())]), &[]).unwrap();
        g.create_edge(a, b, "X", Properties::new()).unwrap();
        g.create_edge(b, a, "Y", Properties::new()).unwrap();
        g.rollback(cp);
        assert_eq!(g.schema(), before);
        assert_eq!(g.nodes_by_label_prop("Drug", "name", &"A".into()), vec![a]);
        assert_eq!(g.neighbors(a, Direction::Both, None).unwrap().len(), 1);
        assert_eq!(g.create_node(["Drug"], Properties::new(), &[]).unwrap(), 1);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut g = Graph::new("t");
        assert!(g.create_node(Vec::<&str>::new(), Properties::new(), &[]).is_err());
        let bad = props(&[("x", PropertyValue::Real(f64::NAN))]);
        assert!(matches!(
            g.create_node(["N"], bad, &[]),
            Err(GraphError::InvalidProperty { .. })
        ));
        assert_eq!(g.node_count(), 0);
    }
}
