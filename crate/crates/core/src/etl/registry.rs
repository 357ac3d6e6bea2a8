//! Cross-source deduplication of entities by key property.

use rustc_hash::FxHashMap as HashMap;

use super::EtlError;
use crate::graph::{Graph, NodeId, Properties, PropertyValue, ValueKey};

/// Where a load puts its nodes and edges.
pub trait NodeSink {
    fn declare_index(&mut self, label: &str, property: &str) -> Result<(), EtlError>;

    /// Creates a node whose identity is `key_property`.
    fn create_node(
        &mut self,
        label: &str,
        key_property: &str,
        properties: Properties,
        indexed: &[&str],
    ) -> Result<NodeId, EtlError>;

    /// Adds the properties the node does not have yet.
    fn merge_absent(&mut self, id: NodeId, properties: Properties) -> Result<(), EtlError>;

    /// Appends the nodes with `label` whose `property` matches `value` (list
    /// properties match by element).
    fn lookup(&self, label: &str, property: &str, value: &PropertyValue, out: &mut Vec<NodeId>);

    fn create_edge(&mut self, src: NodeId, dst: NodeId, etype: &str, properties: Properties) -> Result<(), EtlError>;
}

impl NodeSink for Graph {
    fn declare_index(&mut self, label: &str, property: &str) -> Result<(), EtlError> {
        Graph::declare_index(self, label, property);
        Ok(())
    }

    fn create_node(
        &mut self,
        label: &str,
        key_property: &str,
        properties: Properties,
        indexed: &[&str],
    ) -> Result<NodeId, EtlError> {
        let mut all = Vec::with_capacity(indexed.len() + 1);
        all.push(key_property);
        all.extend_from_slice(indexed);
        Ok(Graph::create_node(self, [label], properties, &all)?)
    }

    fn merge_absent(&mut self, id: NodeId, properties: Properties) -> Result<(), EtlError> {
        for (k, v) in properties {
            self.set_property_if_absent(id, &k, v)?;
        }
        Ok(())
    }

    fn lookup(&self, label: &str, property: &str, value: &PropertyValue, out: &mut Vec<NodeId>) {
        match value.scalar_key() {
            Some(key) if self.is_indexed(label, property) => {
                out.extend_from_slice(self.index_lookup(label, property, &key).unwrap_or_default())
            }
            _ => out.extend(self.nodes_by_label_prop(label, property, value)),
        }
    }

    fn create_edge(&mut self, src: NodeId, dst: NodeId, etype: &str, properties: Properties) -> Result<(), EtlError> {
        Graph::create_edge(self, src, dst, etype, properties)?;
        Ok(())
    }
}

/// Maps `(label, key property, key value)` to the node created for it.
///
/// The first sighting creates the node; later sightings return the same id
/// and only add properties the node lacks.
#[derive(Debug, Default, Clone)]
pub struct DedupRegistry {
    slots: Vec<(String, String, HashMap<ValueKey, NodeId>)>,
    hits: u64,
    misses: u64,
}

impl DedupRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the node for the key, creating it on first sight.
    /// `created` is true only for the call that created it.
    pub fn get_or_create<S: NodeSink + ?Sized>(
        &mut self,
        sink: &mut S,
        label: &str,
        key_property: &str,
        key_value: &PropertyValue,
        mut properties: Properties,
        indexed: &[&str],
    ) -> Result<(NodeId, bool), EtlError> {
        let key = registry_key(label, key_property, key_value)?;
        let slot = self.slot(label, key_property);
        if let Some(&id) = self.slots[slot].2.get(&key) {
            self.hits += 1;
            properties.remove(key_property);
            if !properties.is_empty() {
                sink.merge_absent(id, properties)?;
            }
            return Ok((id, false));
        }
        properties.insert(key_property.to_string(), key_value.clone());
        let id = sink.create_node(label, key_property, properties, indexed)?;
        self.slots[slot].2.insert(key, id);
        self.misses += 1;
        Ok((id, true))
    }

    pub fn get(&self, label: &str, key_property: &str, key_value: &PropertyValue) -> Option<NodeId> {
        let key = key_value.scalar_key()?;
        self.slots
            .iter()
            .find(|(l, p, _)| l == label && p == key_property)
            .and_then(|(_, _, m)| m.get(&key).copied())
    }

    /// Calls that found an existing node.
    pub fn hits(&self) -> u64 {
        self.hits
    }

    /// Calls that created a node.
    pub fn misses(&self) -> u64 {
        self.misses
    }

    /// Distinct keys seen.
    pub fn len(&self) -> usize {
        self.slots.iter().map(|(_, _, m)| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slot(&mut self, label: &str, key_property: &str) -> usize {
        if let Some(i) = self.slots.iter().position(|(l, p, _)| l == label && p == key_property) {
            return i;
        }
        self.slots.push((label.to_string(), key_property.to_string(), HashMap::default()));
        self.slots.len() - 1
    }
}

fn registry_key(label: &str, key_property: &str, value: &PropertyValue) -> Result<ValueKey, EtlError> {
    let empty = || EtlError::EmptyKey {
        label: label.to_string(),
        property: key_property.to_string(),
    };
    match value {
        PropertyValue::Text(s) if s.trim().is_empty() => Err(empty()),
        PropertyValue::TextList(_) => Err(EtlError::Config(format!(
            "key `{label}.{key_property}` must be a scalar value"
        ))),
        other => other.scalar_key().ok_or_else(empty),
    }
}
