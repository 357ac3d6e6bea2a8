//! Id-independent content form of a graph, used for isomorphism checks.

use serde_json::{json, Value};

use super::store::{Graph, Node, Properties};

/// Sorted node tuples `(labels, properties)` and edge tuples
/// `(source tuple, type, target tuple, properties)`.
///
/// Two graphs with equal canonical forms hold the same multiset of node and
/// edge contents; node ids play no part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
}

fn props_json(props: &Properties) -> Value {
    serde_json::to_value(props).expect("properties serialize")
}

fn node_tuple(node: &Node) -> Value {
    let mut labels: Vec<&str> = node.labels.iter().map(|l| &**l).collect();
    labels.sort_unstable();
    json!([labels, props_json(&node.properties)])
}

pub fn canonical_form(graph: &Graph) -> CanonicalForm {
    let tuples: Vec<Value> = graph.nodes().iter().map(node_tuple).collect();
    let mut nodes: Vec<String> = tuples.iter().map(Value::to_string).collect();
    nodes.sort_unstable();
    let mut edges: Vec<String> = graph
        .edges()
        .iter()
        .map(|e| {
            json!([
                tuples[e.src as usize],
                &*e.etype,
                tuples[e.dst as usize],
                props_json(&e.properties)
            ])
            .to_string()
        })
        .collect();
    edges.sort_unstable();
    CanonicalForm { nodes, edges }
}

pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    a.node_count() == b.node_count()
        && a.edge_count() == b.edge_count()
        && canonical_form(a) == canonical_form(b)
}
