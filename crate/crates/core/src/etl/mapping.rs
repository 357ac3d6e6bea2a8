//! Mapping configuration: which columns of which delimited file become which
//! nodes, edges and properties.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EtlError;
use crate::graph::{Properties, PropertyValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingConfig {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default)]
    pub node_mappings: Vec<NodeMapping>,
    #[serde(default)]
    pub edge_mappings: Vec<EdgeMapping>,
    /// Directory that relative file names resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeMapping {
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<String>,
    pub label: String,
    pub key: KeyColumn,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub properties: Vec<PropertyColumn>,
    /// Extra properties to index besides the key.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indexed: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<RowFilter>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyColumn {
    pub column: String,
    pub property: String,
    #[serde(rename = "type", default, skip_serializing_if = "ColumnType::is_string")]
    pub kind: ColumnType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyColumn {
    pub column: String,
    /// Defaults to the column name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    #[serde(rename = "type", default, skip_serializing_if = "ColumnType::is_string")]
    pub kind: ColumnType,
    /// Element separator for `string-list` columns; `|` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separator: Option<String>,
}

impl PropertyColumn {
    pub fn property_name(&self) -> &str {
        self.property.as_deref().unwrap_or(&self.column)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnType {
    #[default]
    String,
    Int,
    Float,
    Bool,
    StringList,
}

impl ColumnType {
    fn is_string(&self) -> bool {
        *self == ColumnType::String
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowFilter {
    pub column: String,
    pub op: FilterOp,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "contains")]
    Contains,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeMapping {
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<String>,
    pub etype: String,
    pub source: EndpointLookup,
    pub target: EndpointLookup,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub properties: Vec<PropertyColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<RowFilter>,
    #[serde(default)]
    pub on_missing_endpoint: MissingEndpoint,
}

/// Finds an edge endpoint by an indexed property of an existing node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointLookup {
    pub label: String,
    pub property: String,
    pub column: String,
    #[serde(rename = "type", default, skip_serializing_if = "ColumnType::is_string")]
    pub kind: ColumnType,
    /// Splits the cell into several lookup values, one edge per value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separator: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingEndpoint {
    #[default]
    Skip,
    Create,
    Error,
}

impl MappingConfig {
    pub fn from_yaml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, EtlError> {
        let mut config: MappingConfig =
            serde_yaml::from_str(text).map_err(|e| EtlError::Config(e.to_string()))?;
        config.base_dir = base_dir.into();
        config.validate()?;
        Ok(config)
    }

    /// Reads a YAML mapping; relative file names resolve against its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, EtlError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EtlError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_yaml(&text, base)
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("mapping serializes")
    }

    pub fn resolve(&self, file: &str) -> PathBuf {
        self.base_dir.join(file)
    }

    /// `(label, property)` pairs that get an index: keys and declared extras.
    pub fn indexed_pairs(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for m in &self.node_mappings {
            out.insert((m.label.clone(), m.key.property.clone()));
            for p in &m.indexed {
                out.insert((m.label.clone(), p.clone()));
            }
        }
        out
    }

    /// `(label, property)` pairs used by edge endpoint lookups.
    pub fn lookup_pairs(&self) -> BTreeSet<(String, String)> {
        self.edge_mappings
            .iter()
            .flat_map(|m| [&m.source, &m.target])
            .map(|l| (l.label.clone(), l.property.clone()))
            .collect()
    }

    pub fn validate(&self) -> Result<(), EtlError> {
        let bad = |msg: String| Err(EtlError::Config(msg));
        for m in &self.node_mappings {
            if m.label.is_empty() || m.key.property.is_empty() {
                return bad(format!("node mapping for `{}` needs a label and key property", m.file));
            }
            if m.key.kind == ColumnType::StringList {
                return bad(format!("key of `{}` must be a scalar type", m.label));
            }
            delimiter_byte(m.delimiter.as_deref(), &m.file)?;
            check_columns(&m.properties)?;
            check_filter(m.filter.as_ref())?;
        }
        let indexed = self.indexed_pairs();
        for m in &self.edge_mappings {
            if m.etype.is_empty() {
                return bad(format!("edge mapping for `{}` needs a type", m.file));
            }
            delimiter_byte(m.delimiter.as_deref(), &m.file)?;
            check_columns(&m.properties)?;
            check_filter(m.filter.as_ref())?;
            for lookup in [&m.source, &m.target] {
                if lookup.kind == ColumnType::StringList {
                    return bad(format!("lookup on `{}.{}` must be a scalar type", lookup.label, lookup.property));
                }
                if lookup.separator.as_deref() == Some("") {
                    return bad(format!("empty separator for lookup column `{}`", lookup.column));
                }
                if !indexed.contains(&(lookup.label.clone(), lookup.property.clone())) {
                    return bad(format!(
                        "lookup property `{}.{}` is not indexed by any node mapping",
                        lookup.label, lookup.property
                    ));
                }
            }
        }
        Ok(())
    }
}

fn check_columns(columns: &[PropertyColumn]) -> Result<(), EtlError> {
    for c in columns {
        if c.property_name().is_empty() {
            return Err(EtlError::Config(format!("empty property name for column `{}`", c.column)));
        }
        if c.separator.as_deref() == Some("") {
            return Err(EtlError::Config(format!("empty separator for column `{}`", c.column)));
        }
    }
    Ok(())
}

fn check_filter(filter: Option<&RowFilter>) -> Result<(), EtlError> {
    if let Some(f) = filter {
        if f.op == FilterOp::Ge && f.value.trim().parse::<f64>().is_err() {
            return Err(EtlError::Config(format!("filter `{} >= {}` needs a number", f.column, f.value)));
        }
    }
    Ok(())
}

/// Delimiter byte; defaults to tab for `.tsv` files and comma otherwise.
fn delimiter_byte(delimiter: Option<&str>, file: &str) -> Result<u8, EtlError> {
    match delimiter {
        None if file.ends_with(".tsv") => Ok(b'\t'),
        None => Ok(b','),
        Some("\t") | Some("\\t") | Some("tab") => Ok(b'\t'),
        Some(d) if d.len() == 1 => Ok(d.as_bytes()[0]),
        Some(d) => Err(EtlError::Config(format!("delimiter `{d}` of `{file}` must be a single byte"))),
    }
}

/// Parses one cell; an empty cell is absent.
pub(crate) fn parse_cell(kind: ColumnType, separator: Option<&str>, cell: &str) -> Result<Option<PropertyValue>, String> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let value = match kind {
        ColumnType::String => PropertyValue::Text(cell.to_string()),
        ColumnType::Int => PropertyValue::Integer(cell.parse().map_err(|_| format!("`{cell}` is not an integer"))?),
        ColumnType::Float => {
            let x: f64 = cell.parse().map_err(|_| format!("`{cell}` is not a number"))?;
            if !x.is_finite() {
                return Err(format!("`{cell}` is not a finite number"));
            }
            PropertyValue::Real(x)
        }
        ColumnType::Bool => match cell.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => PropertyValue::Flag(true),
            "false" | "no" | "0" => PropertyValue::Flag(false),
            _ => return Err(format!("`{cell}` is not a boolean")),
        },
        ColumnType::StringList => {
            let items: Vec<String> = cell
                .split(separator.unwrap_or("|"))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            if items.is_empty() {
                return Ok(None);
            }
            PropertyValue::TextList(items)
        }
    };
    Ok(Some(value))
}

/// Header-addressed reader over a delimited file.
pub(crate) struct SourceFile {
    pub path: PathBuf,
    reader: csv::Reader<BufReader<File>>,
    columns: HashMap<String, usize>,
    width: usize,
}

impl SourceFile {
    pub fn open(config: &MappingConfig, file: &str, delimiter: Option<&str>) -> Result<Self, EtlError> {
        let path = config.resolve(file);
        let delim = delimiter_byte(delimiter, file)?;
        let handle = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(EtlError::FileMissing(path)),
            Err(e) => return Err(EtlError::io(&path, e)),
        };
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delim)
            .flexible(true)
            .quoting(delim != b'\t')
            .from_reader(BufReader::with_capacity(1 << 16, handle));
        let headers = reader.headers().map_err(|e| EtlError::csv(&path, e))?.clone();
        let columns = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        Ok(SourceFile {
            path,
            reader,
            columns,
            width: headers.len(),
        })
    }

    pub fn column(&self, name: &str) -> Result<usize, EtlError> {
        self.columns.get(name).copied().ok_or_else(|| EtlError::MissingColumn {
            file: self.path.clone(),
            column: name.to_string(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Next row, or `None` at end of file.
    pub fn next_row(&mut self, buf: &mut csv::StringRecord) -> Result<Option<u64>, EtlError> {
        match self.reader.read_record(buf) {
            Ok(true) => Ok(Some(buf.position().map_or(0, |p| p.line()))),
            Ok(false) => Ok(None),
            Err(e) => Err(EtlError::csv(&self.path, e)),
        }
    }
}

/// Compiled filter with its column resolved.
pub(crate) struct BoundFilter {
    column: usize,
    op: FilterOp,
    value: String,
    number: f64,
}

impl BoundFilter {
    pub fn bind(filter: Option<&RowFilter>, source: &SourceFile) -> Result<Option<Self>, EtlError> {
        filter
            .map(|f| {
                Ok(BoundFilter {
                    column: source.column(&f.column)?,
                    op: f.op,
                    value: f.value.clone(),
                    number: f.value.trim().parse().unwrap_or(f64::NAN),
                })
            })
            .transpose()
    }

    /// `Ok(false)` when the row fails the filter, `Err` when the cell cannot
    /// be compared.
    pub fn keep(&self, fields: &csv::StringRecord) -> Result<bool, String> {
        let cell = fields.get(self.column).unwrap_or("").trim();
        match self.op {
            FilterOp::Eq => Ok(cell == self.value),
            FilterOp::Contains => Ok(cell.contains(&self.value)),
            FilterOp::Ge => {
                let x: f64 = cell.parse().map_err(|_| format!("filter column value `{cell}` is not a number"))?;
                Ok(x >= self.number)
            }
        }
    }
}

/// Property columns with their positions resolved.
pub(crate) struct BoundColumns(Vec<(usize, String, ColumnType, Option<String>)>);

impl BoundColumns {
    pub fn bind(columns: &[PropertyColumn], source: &SourceFile) -> Result<Self, EtlError> {
        columns
            .iter()
            .map(|c| Ok((source.column(&c.column)?, c.property_name().to_string(), c.kind, c.separator.clone())))
            .collect::<Result<_, _>>()
            .map(BoundColumns)
    }

    pub fn extract(&self, fields: &csv::StringRecord) -> Result<Properties, String> {
        let mut props = Properties::new();
        for (idx, name, kind, sep) in &self.0 {
            let cell = fields.get(*idx).unwrap_or("");
            if let Some(v) = parse_cell(*kind, sep.as_deref(), cell).map_err(|e| format!("column `{name}`: {e}"))? {
                props.insert(name.clone(), v);
            }
        }
        Ok(props)
    }
}

/// Lookup column with its position resolved.
pub(crate) struct BoundLookup {
    pub column: usize,
    pub kind: ColumnType,
    pub separator: Option<String>,
}

impl BoundLookup {
    pub fn bind(lookup: &EndpointLookup, source: &SourceFile) -> Result<Self, EtlError> {
        Ok(BoundLookup {
            column: source.column(&lookup.column)?,
            kind: lookup.kind,
            separator: lookup.separator.clone(),
        })
    }

    /// Lookup values in the cell; empty when the cell is blank.
    pub fn values(&self, fields: &csv::StringRecord) -> Result<Vec<PropertyValue>, String> {
        let cell = fields.get(self.column).unwrap_or("");
        let parts: Vec<&str> = match &self.separator {
            Some(sep) => cell.split(sep.as_str()).collect(),
            None => vec![cell],
        };
        let mut out = Vec::new();
        for part in parts {
            if let Some(v) = parse_cell(self.kind, None, part)? {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        Ok(out)
    }
}
