//! Schema-driven MCP tool server.
//!
//! Every node label gets `search_<l>`, `get_<l>` and `count_<l>` tools and
//! every edge type a `find_<t>` tool. Domain tools come from YAML:
//!
//! ```yaml
//! tools:
//!   - name: pathway_members
//!     description: List proteins in a pathway
//!     params:
//!       - {name: pathway_name, type: string}
//!       - {name: limit, type: int, required: false, default: 50}
//!     cypher: >
//!       MATCH (p:Protein)-[:PARTICIPATES_IN]->(pw:Pathway)
//!       WHERE pw.name CONTAINS $pathway_name
//!       RETURN p.name, pw.name LIMIT $limit
//! ```
//!
//! Optional top-level `key_properties` and `display_properties` maps
//! (label to property) override the property heuristics for auto tools.
//!
//! Arguments are always bound as query parameters, never spliced into the
//! template text. The server speaks newline-delimited JSON-RPC 2.0.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value as JsonValue};
use thiserror::Error;

use crate::cypher::{self, Params, Value};
use crate::graph::{GraphSchema, TenantHandle};

pub const SERVER_NAME: &str = "kgfed";
pub const PROTOCOL_VERSION: &str = "2024-11-05";
/// Rows returned by one tool call at most.
pub const ROW_CAP: usize = 200;
pub const DEFAULT_LIMIT: i64 = 25;

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamType {
    String,
    Int,
    Float,
    Bool,
}

impl ParamType {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "string" => Some(ParamType::String),
            "int" | "integer" => Some(ParamType::Int),
            "float" | "number" => Some(ParamType::Float),
            "bool" | "boolean" => Some(ParamType::Bool),
            _ => None,
        }
    }

    /// JSON Schema type name.
    pub fn json_type(self) -> &'static str {
        match self {
            ParamType::String => "string",
            ParamType::Int => "integer",
            ParamType::Float => "number",
            ParamType::Bool => "boolean",
        }
    }

    /// Converts a JSON argument, accepting integral numbers for `Int`.
    pub fn coerce(self, v: &JsonValue) -> Option<Value> {
        match (self, v) {
            (ParamType::String, JsonValue::String(s)) => Some(Value::Text(s.clone())),
            (ParamType::Bool, JsonValue::Bool(b)) => Some(Value::Bool(*b)),
            (ParamType::Int, JsonValue::Number(n)) => match n.as_i64() {
                Some(i) => Some(Value::Int(i)),
                None => n
                    .as_f64()
                    .filter(|x| x.fract() == 0.0 && x.abs() < 9.0e15)
                    .map(|x| Value::Int(x as i64)),
            },
            (ParamType::Float, JsonValue::Number(n)) => n.as_f64().map(Value::Real),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolParam {
    pub name: String,
    pub kind: ParamType,
    pub required: bool,
    pub default: Option<Value>,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToolOrigin {
    AutoLabel,
    AutoEdge,
    Domain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    pub params: Vec<ToolParam>,
    pub template: String,
    pub origin: ToolOrigin,
}

impl ToolSpec {
    pub fn param(&self, name: &str) -> Option<&ToolParam> {
        self.params.iter().find(|p| p.name == name)
    }

    /// MCP `tools/list` entry.
    pub fn to_json(&self) -> JsonValue {
        let mut properties = serde_json::Map::new();
        for p in &self.params {
            let mut prop = json!({"type": p.kind.json_type()});
            if !p.description.is_empty() {
                prop["description"] = json!(p.description);
            }
            if let Some(d) = &p.default {
                prop["default"] = d.to_json();
            }
            properties.insert(p.name.clone(), prop);
        }
        let required: Vec<&str> = self.params.iter().filter(|p| p.required).map(|p| p.name.as_str()).collect();
        json!({
            "name": self.name,
            "description": self.description,
            "inputSchema": {"type": "object", "properties": properties, "required": required},
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolCatalog {
    pub tools: Vec<ToolSpec>,
    /// Hash of the labels, properties and edge types the catalog was built from.
    pub fingerprint: String,
}

impl ToolCatalog {
    pub fn get(&self, name: &str) -> Option<&ToolSpec> {
        self.tools.iter().find(|t| t.name == name)
    }

    pub fn len(&self) -> usize {
        self.tools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum McpError {
    #[error("invalid-domain-config: tool `{tool}`: {reason}")]
    InvalidDomainConfig { tool: String, reason: String },
    #[error("invalid-domain-config: {0}")]
    Yaml(String),
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("schema name `{0}` cannot be used in a query template")]
    UnsupportedName(String),
}

// ── Domain configuration ─────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    tools: Vec<RawTool>,
    #[serde(default)]
    key_properties: BTreeMap<String, String>,
    #[serde(default)]
    display_properties: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTool {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    params: Vec<RawParam>,
    cypher: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParam {
    name: String,
    #[serde(rename = "type")]
    kind: String,
    required: Option<bool>,
    default: Option<serde_yaml::Value>,
    #[serde(default)]
    description: String,
}

/// Validated domain tools plus property overrides for auto tools.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DomainConfig {
    pub tools: Vec<ToolSpec>,
    pub key_properties: BTreeMap<String, String>,
    pub display_properties: BTreeMap<String, String>,
}

impl DomainConfig {
    pub fn from_yaml(text: &str) -> Result<Self, McpError> {
        let raw: RawConfig = serde_yaml::from_str(text).map_err(|e| McpError::Yaml(e.to_string()))?;
        let mut seen = BTreeSet::new();
        let mut tools = Vec::with_capacity(raw.tools.len());
        for t in raw.tools {
            let invalid = |reason: String| McpError::InvalidDomainConfig {
                tool: t.name.clone(),
                reason,
            };
            if !is_snake_case(&t.name) {
                return Err(invalid("tool names must be lowercase snake case".into()));
            }
            if !seen.insert(t.name.clone()) {
                return Err(invalid("duplicate tool name".into()));
            }
            let mut params = Vec::with_capacity(t.params.len());
            for p in &t.params {
                params.push(domain_param(p).map_err(&invalid)?);
            }
            let spec = ToolSpec {
                name: t.name.clone(),
                description: t.description.trim().to_string(),
                params,
                template: t.cypher.trim().to_string(),
                origin: ToolOrigin::Domain,
            };
            validate_tool(&spec).map_err(invalid)?;
            tools.push(spec);
        }
        Ok(DomainConfig {
            tools,
            key_properties: raw.key_properties,
            display_properties: raw.display_properties,
        })
    }

    pub fn load(path: &Path) -> Result<Self, McpError> {
        let text = std::fs::read_to_string(path).map_err(|e| McpError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_yaml(&text)
    }
}

fn domain_param(p: &RawParam) -> Result<ToolParam, String> {
    let kind = ParamType::parse(&p.kind).ok_or_else(|| format!("parameter `{}` has unknown type `{}`", p.name, p.kind))?;
    let default = match &p.default {
        None | Some(serde_yaml::Value::Null) => None,
        Some(v) => {
            let json = serde_json::to_value(v).map_err(|e| format!("parameter `{}`: {e}", p.name))?;
            Some(kind.coerce(&json).ok_or_else(|| {
                format!("parameter `{}` default {json} is not of type {}", p.name, p.kind)
            })?)
        }
    };
    let required = p.required.unwrap_or(default.is_none());
    if required && default.is_some() {
        return Err(format!("parameter `{}` is required and cannot have a default", p.name));
    }
    Ok(ToolParam {
        name: p.name.clone(),
        kind,
        required,
        default,
        description: p.description.clone(),
    })
}

/// Checks that the template parses, is read-only and uses exactly the
/// declared parameters.
fn validate_tool(spec: &ToolSpec) -> Result<(), String> {
    let query = cypher::parse(&spec.template).map_err(|e| format!("template does not parse: {e}"))?;
    if query.is_create() {
        return Err("template must be read-only".into());
    }
    let declared: BTreeSet<&str> = spec.params.iter().map(|p| p.name.as_str()).collect();
    if declared.len() != spec.params.len() {
        return Err("duplicate parameter name".into());
    }
    if let Some(orphan) = query.parameters.iter().find(|p| !declared.contains(p.as_str())) {
        return Err(format!("placeholder ${orphan} has no declared parameter"));
    }
    if let Some(unused) = declared.iter().find(|p| !query.parameters.contains(**p)) {
        return Err(format!("parameter `{unused}` does not appear in the template"));
    }
    Ok(())
}

fn is_snake_case(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

// ── Discovery ────────────────────────────────────────────────────────────

/// Lowercase snake case: `GOTerm` → `go_term`, `SideEffect` → `side_effect`.
pub fn snake_case(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut out = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_ascii_alphanumeric() {
            if c.is_ascii_uppercase() && i > 0 {
                let prev = chars[i - 1];
                let next_lower = chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase());
                if prev.is_ascii_lowercase() || prev.is_ascii_digit() || (prev.is_ascii_uppercase() && next_lower) {
                    out.push('_');
                }
            }
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() {
        "x".into()
    } else if trimmed.starts_with(|c: char| c.is_ascii_digit()) {
        format!("x_{trimmed}")
    } else {
        trimmed.to_string()
    }
}

fn quote(name: &str) -> Result<String, McpError> {
    if name.contains('`') || name.is_empty() {
        return Err(McpError::UnsupportedName(name.to_string()));
    }
    Ok(format!("`{name}`"))
}

/// Properties chosen for a label's auto tools.
struct LabelProps {
    display: String,
    key: String,
}

fn label_props(
    label: &str,
    properties: &[String],
    key_overrides: &BTreeMap<String, String>,
    display_overrides: &BTreeMap<String, String>,
) -> LabelProps {
    let has = |p: &str| properties.iter().any(|q| q == p);
    let key = key_overrides
        .get(label)
        .cloned()
        .or_else(|| properties.iter().find(|p| p.ends_with("_id")).cloned())
        .unwrap_or_else(|| "name".into());
    let display = display_overrides
        .get(label)
        .cloned()
        .or_else(|| ["name", "title", "term"].into_iter().find(|p| has(p)).map(str::to_string))
        .unwrap_or_else(|| key.clone());
    LabelProps { display, key }
}

fn string_param(name: &str, required: bool, default: Option<&str>, description: &str) -> ToolParam {
    ToolParam {
        name: name.into(),
        kind: ParamType::String,
        required,
        default: default.map(|d| Value::Text(d.into())),
        description: description.into(),
    }
}

fn limit_param() -> ToolParam {
    ToolParam {
        name: "limit".into(),
        kind: ParamType::Int,
        required: false,
        default: Some(Value::Int(DEFAULT_LIMIT)),
        description: "Maximum number of rows".into(),
    }
}

/// Stable 64-bit FNV-1a over the schema's structure (counts excluded).
fn schema_fingerprint(schema: &GraphSchema) -> String {
    let mut text = String::new();
    for l in &schema.labels {
        let _ = write!(text, "L{}:{};", l.name, l.properties.join(","));
    }
    for e in &schema.edge_types {
        let _ = write!(text, "E{}:{}>{};", e.name, e.source_labels.join(","), e.target_labels.join(","));
    }
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn unique_name(base: String, taken: &mut BTreeSet<String>) -> String {
    if taken.insert(base.clone()) {
        return base;
    }
    let mut n = 2;
    loop {
        let candidate = format!("{base}_{n}");
        if taken.insert(candidate.clone()) {
            return candidate;
        }
        n += 1;
    }
}

/// Builds the tool catalog for a schema.
///
/// Auto tools come first in schema order, then domain tools in config
/// order. A domain tool replaces an auto tool with the same name.
/// `key_overrides` take precedence over the config's `key_properties`.
pub fn discover_tools(
    schema: &GraphSchema,
    config: Option<&DomainConfig>,
    key_overrides: &BTreeMap<String, String>,
) -> Result<ToolCatalog, McpError> {
    let mut keys = config.map(|c| c.key_properties.clone()).unwrap_or_default();
    keys.extend(key_overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
    let displays = config.map(|c| c.display_properties.clone()).unwrap_or_default();

    let mut taken = BTreeSet::new();
    let mut tools = Vec::new();
    let mut props_by_label = HashMap::new();
    for label in &schema.labels {
        let props = label_props(&label.name, &label.properties, &keys, &displays);
        let l = snake_case(&label.name);
        let ql = quote(&label.name)?;
        let (disp, key) = (quote(&props.display)?, quote(&props.key)?);
        let returns = if props.display == props.key {
            format!("n.{disp}")
        } else {
            format!("n.{disp}, n.{key}")
        };
        tools.push(ToolSpec {
            name: unique_name(format!("search_{l}"), &mut taken),
            description: format!("Search {} nodes whose {} contains the query text", label.name, props.display),
            params: vec![
                string_param("query", true, None, "Text to look for"),
                limit_param(),
            ],
            template: format!("MATCH (n:{ql}) WHERE n.{disp} CONTAINS $query RETURN {returns} ORDER BY n.{disp} LIMIT $limit"),
            origin: ToolOrigin::AutoLabel,
        });
        tools.push(ToolSpec {
            name: unique_name(format!("get_{l}"), &mut taken),
            description: format!("Get the {} node whose {} equals the value", label.name, props.key),
            params: vec![string_param("value", true, None, &format!("Exact {}", props.key))],
            template: format!("MATCH (n:{ql} {{{key}: $value}}) RETURN n"),
            origin: ToolOrigin::AutoLabel,
        });
        tools.push(ToolSpec {
            name: unique_name(format!("count_{l}"), &mut taken),
            description: format!("Count {} nodes", label.name),
            params: Vec::new(),
            template: format!("MATCH (n:{ql}) RETURN count(n) AS count"),
            origin: ToolOrigin::AutoLabel,
        });
        props_by_label.insert(label.name.as_str(), props);
    }

    for et in &schema.edge_types {
        let endpoint = |labels: &[String]| -> Result<(String, String), McpError> {
            match labels {
                [only] => {
                    let display = match props_by_label.get(only.as_str()) {
                        Some(p) => p.display.clone(),
                        None => "name".into(),
                    };
                    Ok((format!(":{}", quote(only)?), display))
                }
                _ => Ok((String::new(), "name".into())),
            }
        };
        let (src_label, src_disp) = endpoint(&et.source_labels)?;
        let (dst_label, dst_disp) = endpoint(&et.target_labels)?;
        let (qs, qd) = (quote(&src_disp)?, quote(&dst_disp)?);
        tools.push(ToolSpec {
            name: unique_name(format!("find_{}", snake_case(&et.name)), &mut taken),
            description: format!(
                "List {} connections as source {} and target {} pairs",
                et.name, src_disp, dst_disp
            ),
            params: vec![
                string_param("from", false, Some(""), &format!("Prefix of the source {src_disp}")),
                limit_param(),
            ],
            template: format!(
                "MATCH (a{src_label})-[:{}]->(b{dst_label}) WHERE a.{qs} STARTS WITH $from RETURN a.{qs}, b.{qd} LIMIT $limit",
                quote(&et.name)?
            ),
            origin: ToolOrigin::AutoEdge,
        });
    }

    if let Some(cfg) = config {
        let domain: BTreeSet<&str> = cfg.tools.iter().map(|t| t.name.as_str()).collect();
        tools.retain(|t| !domain.contains(t.name.as_str()));
        tools.extend(cfg.tools.iter().cloned());
    }
    Ok(ToolCatalog {
        tools,
        fingerprint: schema_fingerprint(schema),
    })
}

// ── Calls ────────────────────────────────────────────────────────────────

/// A tool call rejected before execution.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToolCallError {
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("tool `{tool}`: missing required argument `{arg}`")]
    MissingArgument { tool: String, arg: String },
    #[error("tool `{tool}`: argument `{arg}` must be {expected}")]
    TypeMismatch { tool: String, arg: String, expected: &'static str },
    #[error("tool `{tool}`: unknown argument `{arg}`")]
    UnknownArgument { tool: String, arg: String },
    #[error("tool arguments must be a JSON object")]
    ArgumentsNotObject,
}

impl ToolCallError {
    pub fn kind(&self) -> &'static str {
        match self {
            ToolCallError::UnknownTool(_) => "unknown-tool",
            ToolCallError::MissingArgument { .. } => "missing-required-arg",
            ToolCallError::TypeMismatch { .. } => "arg-type-mismatch",
            ToolCallError::UnknownArgument { .. } => "unknown-arg",
            ToolCallError::ArgumentsNotObject => "invalid-arguments",
        }
    }
}

/// Binds JSON arguments to a tool's parameters. Optional parameters
/// without a default bind to null.
pub fn bind_arguments(tool: &ToolSpec, args: &JsonValue) -> Result<Params, ToolCallError> {
    let empty = serde_json::Map::new();
    let map = match args {
        JsonValue::Null => &empty,
        JsonValue::Object(m) => m,
        _ => return Err(ToolCallError::ArgumentsNotObject),
    };
    if let Some(extra) = map.keys().find(|k| tool.param(k).is_none()) {
        return Err(ToolCallError::UnknownArgument {
            tool: tool.name.clone(),
            arg: extra.clone(),
        });
    }
    let mut params = Params::new();
    for p in &tool.params {
        let value = match map.get(&p.name) {
            Some(v) => p.kind.coerce(v).ok_or_else(|| ToolCallError::TypeMismatch {
                tool: tool.name.clone(),
                arg: p.name.clone(),
                expected: p.kind.json_type(),
            })?,
            None if p.required => {
                return Err(ToolCallError::MissingArgument {
                    tool: tool.name.clone(),
                    arg: p.name.clone(),
                })
            }
            None => p.default.clone().unwrap_or(Value::Null),
        };
        params.insert(p.name.clone(), value);
    }
    Ok(params)
}

/// Serves a catalog against one tenant.
pub struct McpServer {
    catalog: ToolCatalog,
    tenant: TenantHandle,
}

impl McpServer {
    pub fn new(catalog: ToolCatalog, tenant: TenantHandle) -> Self {
        McpServer { catalog, tenant }
    }

    /// Discovers the tenant's current schema and builds the catalog.
    pub fn for_tenant(
        tenant: TenantHandle,
        config: Option<&DomainConfig>,
        key_overrides: &BTreeMap<String, String>,
    ) -> Result<Self, McpError> {
        let schema = tenant.read().schema();
        let catalog = discover_tools(&schema, config, key_overrides)?;
        Ok(McpServer { catalog, tenant })
    }

    pub fn catalog(&self) -> &ToolCatalog {
        &self.catalog
    }

    /// The template and parameters a call would execute.
    pub fn bound_query(&self, name: &str, args: &JsonValue) -> Result<(&str, Params), ToolCallError> {
        let tool = self
            .catalog
            .get(name)
            .ok_or_else(|| ToolCallError::UnknownTool(name.to_string()))?;
        Ok((&tool.template, bind_arguments(tool, args)?))
    }

    pub fn tools_list(&self) -> JsonValue {
        json!({ "tools": self.catalog.tools.iter().map(ToolSpec::to_json).collect::<Vec<_>>() })
    }

    /// Runs a tool. Query failures become results flagged `isError`.
    pub fn tools_call(&self, name: &str, args: &JsonValue) -> Result<JsonValue, ToolCallError> {
        let (template, params) = self.bound_query(name, args)?;
        let result = match cypher::execute_text(&self.tenant, template, &params) {
            Ok(table) => {
                let truncated = table.rows.len() > ROW_CAP;
                let rows: Vec<Vec<JsonValue>> = table
                    .rows
                    .iter()
                    .take(ROW_CAP)
                    .map(|r| r.iter().map(Value::to_json).collect())
                    .collect();
                let body = json!({
                    "columns": table.columns,
                    "row_count": rows.len(),
                    "rows": rows,
                    "truncated": truncated,
                });
                json!({"content": [{"type": "text", "text": body.to_string()}], "isError": false})
            }
            Err(e) => json!({
                "content": [{"type": "text", "text": format!("{}: {e}", e.kind())}],
                "isError": true,
            }),
        };
        Ok(result)
    }

    fn initialize(&self) -> JsonValue {
        json!({
            "protocolVersion": PROTOCOL_VERSION,
            "capabilities": {"tools": {"listChanged": false}},
            "serverInfo": {"name": SERVER_NAME, "version": env!("CARGO_PKG_VERSION")},
        })
    }

    /// Handles one decoded message; `None` for notifications.
    pub fn handle(&self, msg: &JsonValue) -> Option<JsonValue> {
        let Some(obj) = msg.as_object() else {
            return Some(rpc_error(JsonValue::Null, INVALID_REQUEST, "request must be a JSON object", None));
        };
        let id = obj.get("id").cloned();
        let method = match (obj.get("jsonrpc").and_then(JsonValue::as_str), obj.get("method").and_then(JsonValue::as_str)) {
            (Some("2.0"), Some(m)) => m,
            _ => {
                return id.map(|id| rpc_error(id, INVALID_REQUEST, "expected jsonrpc 2.0 with a method", None));
            }
        };
        let id = id?;
        let params = obj.get("params").cloned().unwrap_or(JsonValue::Null);
        let outcome = match method {
            "initialize" => Ok(self.initialize()),
            "ping" => Ok(json!({})),
            "tools/list" => Ok(self.tools_list()),
            "tools/call" => match params.get("name").and_then(JsonValue::as_str) {
                None => Err((INVALID_PARAMS, "tools/call needs a string `name`".to_string(), None)),
                Some(name) => self
                    .tools_call(name, params.get("arguments").unwrap_or(&JsonValue::Null))
                    .map_err(|e| (INVALID_PARAMS, e.to_string(), Some(json!({"kind": e.kind()})))),
            },
            other => Err((METHOD_NOT_FOUND, format!("method `{other}` not found"), None)),
        };
        Some(match outcome {
            Ok(result) => json!({"jsonrpc": "2.0", "id": id, "result": result}),
            Err((code, message, data)) => rpc_error(id, code, &message, data),
        })
    }

    /// Handles one line of input; `None` when no reply is due.
    pub fn handle_line(&self, line: &str) -> Option<String> {
        if line.trim().is_empty() {
            return None;
        }
        let reply = match serde_json::from_str::<JsonValue>(line) {
            Ok(msg) => self.handle(&msg)?,
            Err(e) => rpc_error(JsonValue::Null, PARSE_ERROR, &format!("parse error: {e}"), None),
        };
        Some(reply.to_string())
    }

    /// Request loop over newline-delimited JSON-RPC; returns at EOF.
    pub fn serve<R: BufRead, W: Write>(&self, input: R, mut output: W) -> io::Result<()> {
        for line in input.lines() {
            if let Some(reply) = self.handle_line(&line?) {
                output.write_all(reply.as_bytes())?;
                output.write_all(b"\n")?;
                output.flush()?;
            }
        }
        Ok(())
    }
}

fn rpc_error(id: JsonValue, code: i64, message: &str, data: Option<JsonValue>) -> JsonValue {
    let mut err = json!({"code": code, "message": message});
    if let Some(d) = data {
        err["data"] = d;
    }
    json!({"jsonrpc": "2.0", "id": id, "error": err})
}
