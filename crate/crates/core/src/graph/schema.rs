use serde::{Deserialize, Serialize};

/// Live label and edge-type statistics for a tenant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub labels: Vec<LabelSchema>,
    pub edge_types: Vec<EdgeTypeSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSchema {
    pub name: String,
    pub count: usize,
    pub properties: Vec<String>,
    #[serde(default)]
    pub indexed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTypeSchema {
    pub name: String,
    pub count: usize,
    #[serde(default)]
    pub source_labels: Vec<String>,
    #[serde(default)]
    pub target_labels: Vec<String>,
}

impl GraphSchema {
    pub fn label(&self, name: &str) -> Option<&LabelSchema> {
        self.labels.iter().find(|l| l.name == name)
    }

    pub fn edge_type(&self, name: &str) -> Option<&EdgeTypeSchema> {
        self.edge_types.iter().find(|e| e.name == name)
    }

    pub fn is_indexed(&self, label: &str, property: &str) -> bool {
        self.label(label).is_some_and(|l| l.indexed.iter().any(|p| p == property))
    }

    pub fn total_nodes(&self) -> usize {
        self.labels.iter().map(|l| l.count).sum()
    }

    pub fn total_edges(&self) -> usize {
        self.edge_types.iter().map(|e| e.count).sum()
    }
}
