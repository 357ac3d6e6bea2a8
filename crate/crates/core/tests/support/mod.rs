//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod graphgen;
pub mod querygen;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use kgfed::cypher::ast::Operand;
use kgfed::cypher::{self, Value};
use kgfed::etl::{load_native_tenant, CorpusManifest, DedupRegistry, LoadOptions, MappingConfig};
use kgfed::graph::{PropertyValue, TenantHandle};
use kgfed::mcp::{McpServer, ParamType, ToolSpec};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value as Json};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn mcp_config(name: &str) -> PathBuf {
    repo_root().join("configs/mcp").join(format!("{name}.yaml"))
}

/// Loads the named graphs of a generated corpus into one tenant.
pub fn load_corpus(tenant: &TenantHandle, dir: &Path, manifest: &CorpusManifest, kgs: &[&str]) {
    for kg in kgs {
        let m = MappingConfig::from_file(dir.join(&manifest.kg(kg).unwrap().mapping)).unwrap();
        load_native_tenant(tenant, &m, &mut DedupRegistry::new(), &LoadOptions::default()).unwrap();
    }
}

pub fn post_query(agent: &ureq::Agent, base: &str, tenant: &str, query: &str, params: &Json) -> Json {
    let body = json!({"tenant": tenant, "query": query, "params": params});
    let mut r = agent.post(format!("{base}/api/query")).send_json(&body).unwrap();
    assert_eq!(r.status().as_u16(), 200);
    r.body_mut().read_json().unwrap()
}

pub fn http_agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

/// Where each `$param` of a template is compared: label (if known) and
/// property, from inline maps and WHERE comparisons.
pub fn param_targets(template: &str) -> BTreeMap<String, (Option<String>, String)> {
    let q = cypher::parse(template).unwrap();
    let mut labels = BTreeMap::new();
    for p in q.match_patterns() {
        for n in p.nodes() {
            if let Some(l) = &n.label {
                labels.insert(n.var.clone(), l.clone());
            }
        }
    }
    let mut out = BTreeMap::new();
    for p in q.match_patterns() {
        for n in p.nodes() {
            for (key, op) in &n.properties {
                if let Operand::Param(name) = op {
                    out.insert(name.clone(), (n.label.clone(), key.clone()));
                }
            }
        }
    }
    for c in &q.where_clause {
        if let (Operand::Property { var, key, .. }, Operand::Param(name)) = (&c.lhs, &c.rhs) {
            out.insert(name.clone(), (labels.get(var).cloned(), key.clone()));
        }
    }
    out
}

/// String values per (label, property) plus a global pool of values,
/// substrings and prefixes.
pub struct ValuePool {
    pub all: Vec<String>,
    by_target: BTreeMap<(String, String), Vec<String>>,
}

impl ValuePool {
    pub fn new(tenant: &TenantHandle, rng: &mut ChaCha8Rng) -> Self {
        let g = tenant.read();
        let mut by_target: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
        for n in g.nodes() {
            for (key, v) in &n.properties {
                let texts = match v {
                    PropertyValue::Text(s) => vec![s.clone()],
                    PropertyValue::TextList(items) => items.clone(),
                    _ => continue,
                };
                for l in &n.labels {
                    by_target.entry((l.to_string(), key.clone())).or_default().extend(texts.iter().cloned());
                }
            }
        }
        let mut all = BTreeSet::new();
        all.insert(String::new());
        for values in by_target.values() {
            for s in values.choose_multiple(rng, 6) {
                all.insert(s.clone());
                all.insert(fragment(s, rng));
            }
        }
        ValuePool {
            all: all.into_iter().collect(),
            by_target,
        }
    }

    /// A value for a parameter compared with `label.property`; mostly real
    /// values or fragments of them, sometimes anything from the pool.
    pub fn pick(&self, target: Option<&(Option<String>, String)>, rng: &mut ChaCha8Rng) -> String {
        let candidates: Option<&Vec<String>> = target.and_then(|(label, prop)| match label {
            Some(l) => self.by_target.get(&(l.clone(), prop.clone())),
            None => self.by_target.iter().find(|((_, p), _)| p == prop).map(|(_, v)| v),
        });
        match candidates {
            Some(values) if !values.is_empty() && rng.gen_bool(0.8) => {
                let s = values.choose(rng).unwrap();
                if rng.gen_bool(0.5) {
                    s.clone()
                } else {
                    fragment(s, rng)
                }
            }
            _ => self.all.choose(rng).unwrap().clone(),
        }
    }
}

fn fragment(s: &str, rng: &mut ChaCha8Rng) -> String {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() < 2 {
        return s.to_string();
    }
    let a = rng.gen_range(0..chars.len() - 1);
    let b = rng.gen_range(a + 1..=chars.len());
    chars[a..b].iter().collect()
}

/// Random valid arguments for a tool. Optional parameters are sometimes
/// left out so defaults are exercised.
pub fn fuzz_args(tool: &ToolSpec, pool: &ValuePool, rng: &mut ChaCha8Rng) -> Json {
    let targets = param_targets(&tool.template);
    let mut args = Map::new();
    for p in &tool.params {
        if !p.required && rng.gen_bool(0.3) {
            continue;
        }
        let v = match p.kind {
            ParamType::String => json!(pool.pick(targets.get(&p.name), rng)),
            ParamType::Int => json!(rng.gen_range(0..=300)),
            ParamType::Float => json!(rng.gen_range(0.0..1000.0)),
            ParamType::Bool => json!(rng.gen_bool(0.5)),
        };
        args.insert(p.name.clone(), v);
    }
    Json::Object(args)
}

/// Rows and flags from a tool-call result.
pub struct CallOutput {
    pub is_error: bool,
    pub columns: Json,
    pub rows: Vec<Json>,
    pub truncated: bool,
}

pub fn parse_call(result: &Json) -> CallOutput {
    let text = result["content"][0]["text"].as_str().unwrap();
    if result["isError"] == json!(true) {
        return CallOutput {
            is_error: true,
            columns: Json::Null,
            rows: Vec::new(),
            truncated: false,
        };
    }
    let body: Json = serde_json::from_str(text).unwrap();
    CallOutput {
        is_error: false,
        columns: body["columns"].clone(),
        rows: body["rows"].as_array().unwrap().clone(),
        truncated: body["truncated"].as_bool().unwrap(),
    }
}

pub fn params_json(params: &kgfed::cypher::Params) -> Json {
    Json::Object(params.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
}

#[derive(Debug, Default)]
pub struct DualReport {
    pub tools: usize,
    pub calls: usize,
    pub mismatches: Vec<String>,
    pub tools_with_rows: usize,
}

/// Calls every tool with fuzzed arguments and compares its rows with the
/// bound template run through `POST /api/query`.
pub fn dual_execution(
    server: &McpServer,
    tenant: &TenantHandle,
    base: &str,
    tenant_name: &str,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> DualReport {
    let agent = http_agent();
    let pool = ValuePool::new(tenant, rng);
    let mut report = DualReport::default();
    for tool in &server.catalog().tools {
        report.tools += 1;
        let mut saw_rows = false;
        for _ in 0..trials {
            let args = fuzz_args(tool, &pool, rng);
            let out = parse_call(&server.tools_call(&tool.name, &args).unwrap());
            let (template, params) = server.bound_query(&tool.name, &args).unwrap();
            let direct = post_query(&agent, base, tenant_name, template, &params_json(&params));
            report.calls += 1;
            if out.is_error {
                report.mismatches.push(format!("{} {args}: tool call failed", tool.name));
                continue;
            }
            let direct_rows = direct["rows"].as_array().unwrap();
            let expected: Vec<Json> = direct_rows.iter().take(kgfed::mcp::ROW_CAP).cloned().collect();
            if out.columns != direct["columns"]
                || out.rows != expected
                || out.truncated != (direct_rows.len() > kgfed::mcp::ROW_CAP)
            {
                report.mismatches.push(format!("{} {args}", tool.name));
            }
            saw_rows |= !out.rows.is_empty();
        }
        report.tools_with_rows += saw_rows as usize;
    }
    report
}

/// Argument strings built from quotes, comment markers, keywords and
/// template fragments.
pub fn adversarial_strings(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    const PIECES: &[&str] = &[
        "'", "\"", "`", "\\", "\\'", "})", ")", "(", "]", "[", "{", "}", "-->", "<--", "--", "//", "/*", ";", "$limit",
        "$query", " MATCH (n) ", " RETURN n ", " CREATE (x:Pwned) ", " DETACH DELETE n ", " OR 1=1 ", " AND ",
        " LIMIT 0 ", " WHERE ", "' OR '1'='1", "'}) RETURN n //", "\n", "\t", "\u{0}", "é", "名前", "TP53",
        "Metformin", " UNION ", ":Drug", "*1..8", "%", "0x", "NULL", "true",
    ];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let k = 1 + i % 6;
        let mut s = String::new();
        for _ in 0..k {
            s.push_str(PIECES.choose(rng).unwrap());
        }
        out.push(s);
    }
    out
}

/// AST fingerprint of query text: its parse tree with positions.
pub fn ast_fingerprint(text: &str) -> Option<String> {
    cypher::parse(text).ok().map(|q| format!("{q:?}"))
}

/// What a server that pasted arguments into the text would run.
pub fn spliced(template: &str, params: &kgfed::cypher::Params) -> String {
    let mut text = template.to_string();
    let mut names: Vec<&String> = params.keys().collect();
    names.sort_by_key(|n| std::cmp::Reverse(n.len()));
    for name in names {
        let literal = match &params[name] {
            Value::Text(s) => format!("'{s}'"),
            other => other.to_string(),
        };
        text = text.replace(&format!("${name}"), &literal);
    }
    text
}

#[derive(Debug, Default)]
pub struct InjectionReport {
    pub checks: usize,
    pub violations: Vec<String>,
    /// Strings that would have altered the AST under textual splicing.
    pub splice_breaks: usize,
}

/// For each adversarial string, binds it to every string parameter of the
/// given tools and checks that the executed query keeps the template's AST
/// and runs without a query error.
pub fn injection_check(server: &McpServer, tools: &[&str], strings: &[String]) -> InjectionReport {
    let mut report = InjectionReport::default();
    for name in tools {
        let tool = server.catalog().get(name).unwrap();
        let reference = ast_fingerprint(&tool.template).unwrap();
        for s in strings {
            let mut args = Map::new();
            for p in &tool.params {
                let v = match p.kind {
                    ParamType::String => json!(s),
                    ParamType::Int => json!(5),
                    ParamType::Float => json!(1.5),
                    ParamType::Bool => json!(true),
                };
                args.insert(p.name.clone(), v);
            }
            let args = Json::Object(args);
            report.checks += 1;
            let (text, params) = server.bound_query(name, &args).unwrap();
            if ast_fingerprint(text).as_deref() != Some(reference.as_str()) {
                report.violations.push(format!("{name}: AST changed for {s:?}"));
            }
            if ast_fingerprint(&spliced(text, &params)).as_deref() != Some(reference.as_str()) {
                report.splice_breaks += 1;
            }
            let out = parse_call(&server.tools_call(name, &args).unwrap());
            if out.is_error {
                report.violations.push(format!("{name}: query failed for {s:?}"));
            }
        }
    }
    report
}

/// Runs request lines through the server and returns the reply lines.
pub fn run_session(server: &McpServer, requests: &str) -> String {
    let mut out = Vec::new();
    server.serve(requests.as_bytes(), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

pub fn pathways_fixture(tenant: &TenantHandle) {
    cypher::execute_text(
        tenant,
        "CREATE (tp53:Protein {uniprot_id: 'P04637', name: 'TP53', description: 'Cellular tumor antigen p53'}),
         (mdm2:Protein {uniprot_id: 'Q00987', name: 'MDM2', description: 'E3 ubiquitin-protein ligase Mdm2'}),
         (atm:Protein {uniprot_id: 'Q13315', name: 'ATM', description: 'Serine-protein kinase ATM'}),
         (sig:Pathway {reactome_id: 'R-HSA-162582', name: 'Signal Transduction'}),
         (apo:Pathway {reactome_id: 'R-HSA-109581', name: 'Apoptosis'}),
         (go:GOTerm {go_id: 'GO:0006915', name: 'apoptotic process', namespace: 'biological_process'}),
         (tp53)-[:PARTICIPATES_IN]->(sig), (tp53)-[:PARTICIPATES_IN]->(apo),
         (mdm2)-[:PARTICIPATES_IN]->(sig), (atm)-[:PARTICIPATES_IN]->(apo),
         (mdm2)-[:INTERACTS_WITH]->(tp53), (atm)-[:INTERACTS_WITH]->(tp53),
         (tp53)-[:ANNOTATED_WITH]->(go)",
        &Default::default(),
    )
    .unwrap();
}
