mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use kgfed::cypher::{self, execute_text, Params};
use kgfed::etl::{gen_corpus, Scale};
use kgfed::graph::{EdgeTypeSchema, GraphSchema, GraphStore, LabelSchema};
use kgfed::mcp::{discover_tools, DomainConfig, McpServer, ToolOrigin, ToolSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use support::*;

fn config(name: &str) -> DomainConfig {
    DomainConfig::load(&mcp_config(name)).unwrap()
}

fn no_overrides() -> BTreeMap<String, String> {
    BTreeMap::new()
}

fn call(server: &McpServer, name: &str, args: Value) -> CallOutput {
    parse_call(&server.tools_call(name, &args).unwrap())
}

#[test]
fn example_configs_follow_the_tool_count_formula() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_corpus(42, Scale::Small, tmp.path()).unwrap();
    let store = GraphStore::new();
    for (kg, cfg, expected) in [
        ("drug_interactions", "drug_interactions", 27),
        ("pathways", "pathways", 36),
        ("clinical_trials", "clinical_trials", 30),
    ] {
        let t = store.create_tenant(kg).unwrap();
        load_corpus(&t, tmp.path(), &manifest, &[kg]);
        let schema = t.read().schema();
        let domain = config(cfg);
        let catalog = discover_tools(&schema, Some(&domain), &no_overrides()).unwrap();
        let formula = 3 * schema.labels.len() + schema.edge_types.len() + domain.tools.len();
        assert_eq!(catalog.len(), formula, "{kg}");
        assert_eq!(catalog.len(), expected, "{kg}");
    }
    assert_eq!(config("drug_interactions").tools.len(), 12);
    assert_eq!(config("pathways").tools.len(), 12);
    assert_eq!(config("clinical_trials").tools.len(), 15);
}

#[test]
fn example_configs_include_the_named_tools() {
    let pathways = config("pathways");
    let members = pathways.tools.iter().find(|t| t.name == "pathway_members").unwrap();
    assert!(members.description.starts_with("List proteins in a pathway"));
    for name in [
        "interaction_partners",
        "shared_pathways",
        "upstream_regulators",
        "drug_pathway_impact",
        "disease_pathways",
        "go_enrichment",
        "protein_function_summary",
    ] {
        assert!(pathways.tools.iter().any(|t| t.name == name), "{name}");
    }
    let drugs = config("drug_interactions");
    for name in ["drug_interactions", "interaction_checker", "polypharmacy_risk", "drug_side_effects"] {
        assert!(drugs.tools.iter().any(|t| t.name == name), "{name}");
    }
}

#[test]
fn empty_schema_gives_empty_catalog() {
    let catalog = discover_tools(&GraphSchema::default(), None, &no_overrides()).unwrap();
    assert!(catalog.is_empty());
}

#[test]
fn auto_tools_pick_display_and_key_properties() {
    let store = GraphStore::new();
    let t = store.create_tenant("t").unwrap();
    execute_text(
        &t,
        "CREATE (:Drug {drugbank_id: 'DB1', name: 'Metformin'}), (:Trial {nct_id: 'NCT1', title: 'A study'}),
         (:Term {term: 'x', code: 'c1'}), (:Thing {name: 'n1'})",
        &Params::new(),
    )
    .unwrap();
    let mut overrides = BTreeMap::new();
    overrides.insert("Term".to_string(), "code".to_string());
    let server = McpServer::for_tenant(t, None, &overrides).unwrap();
    let c = server.catalog();
    assert!(c.get("search_drug").unwrap().template.contains("n.`name` CONTAINS $query"));
    assert!(c.get("get_drug").unwrap().template.contains("{`drugbank_id`: $value}"));
    assert!(c.get("search_trial").unwrap().template.contains("n.`title` CONTAINS"));
    assert!(c.get("search_term").unwrap().template.contains("n.`term` CONTAINS"));
    assert!(c.get("get_term").unwrap().template.contains("{`code`: $value}"));
    assert!(c.get("get_thing").unwrap().template.contains("{`name`: $value}"));
    let got = call(&server, "get_drug", json!({"value": "DB1"}));
    assert_eq!(got.rows[0][0]["properties"]["name"], "Metformin");
    let count = call(&server, "count_trial", json!({}));
    assert_eq!(count.rows, vec![json!([1])]);
}

#[test]
fn search_matches_a_scan_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_corpus(42, Scale::Small, tmp.path()).unwrap();
    let store = GraphStore::new();
    let t = store.create_tenant("drugs").unwrap();
    load_corpus(&t, tmp.path(), &manifest, &["drug_interactions"]);
    let server = McpServer::for_tenant(t.clone(), None, &no_overrides()).unwrap();
    let out = call(&server, "search_drug", json!({"query": "etfo", "limit": 200}));
    let got: BTreeSet<String> = out.rows.iter().map(|r| r[0].as_str().unwrap().to_string()).collect();
    let g = t.read();
    let expected: BTreeSet<String> = g
        .nodes()
        .iter()
        .filter(|n| n.labels.iter().any(|l| &**l == "Drug"))
        .filter_map(|n| n.properties.get("name"))
        .map(|v| v.to_string())
        .filter(|name| name.contains("etfo"))
        .collect();
    assert!(expected.contains("Metformin"));
    assert_eq!(got, expected);
}

#[test]
fn argument_errors_leave_the_server_running() {
    let store = GraphStore::new();
    let t = store.create_tenant("p").unwrap();
    pathways_fixture(&t);
    let server = McpServer::for_tenant(t, Some(&config("pathways")), &no_overrides()).unwrap();
    let cases = [
        ("nope", json!({}), "unknown-tool"),
        ("search_protein", json!({}), "missing-required-arg"),
        ("search_protein", json!({"query": "T", "limit": "abc"}), "arg-type-mismatch"),
        ("search_protein", json!({"query": "T", "limit": 2.5}), "arg-type-mismatch"),
        ("search_protein", json!({"query": 7}), "arg-type-mismatch"),
        ("search_protein", json!({"query": "T", "extra": 1}), "unknown-arg"),
        ("search_protein", json!([1]), "invalid-arguments"),
    ];
    for (i, (name, args, kind)) in cases.iter().enumerate() {
        let req = json!({"jsonrpc": "2.0", "id": i, "method": "tools/call", "params": {"name": name, "arguments": args}});
        let reply = server.handle(&req).unwrap();
        assert_eq!(reply["error"]["code"], -32602, "{name} {args}");
        assert_eq!(reply["error"]["data"]["kind"], *kind, "{name} {args}");
    }
    let ok = call(&server, "search_protein", json!({"query": "T", "limit": 2.0}));
    assert_eq!(ok.rows.len(), 2);
    let failed = server.tools_call("search_protein", &json!({"query": "T", "limit": -1})).unwrap();
    assert_eq!(failed["isError"], true);
}

#[test]
fn protocol_edge_cases() {
    let store = GraphStore::new();
    let t = store.create_tenant("p").unwrap();
    let server = McpServer::for_tenant(t, None, &no_overrides()).unwrap();
    let out = run_session(
        &server,
        "not json\n\n[1,2]\n{\"jsonrpc\":\"2.0\",\"method\":\"notifications/initialized\"}\n\
         {\"jsonrpc\":\"2.0\",\"id\":\"a\",\"method\":\"resources/list\"}\n\
         {\"jsonrpc\":\"1.0\",\"id\":2,\"method\":\"ping\"}\n\
         {\"jsonrpc\":\"2.0\",\"id\":3,\"method\":\"tools/call\",\"params\":{}}\n\
         {\"jsonrpc\":\"2.0\",\"id\":4,\"method\":\"ping\"}\n",
    );
    let replies: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(replies.len(), 6);
    assert_eq!(replies[0]["error"]["code"], -32700);
    assert_eq!(replies[1]["error"]["code"], -32600);
    assert_eq!(replies[2]["error"]["code"], -32601);
    assert_eq!(replies[2]["id"], "a");
    assert_eq!(replies[3]["error"]["code"], -32600);
    assert_eq!(replies[4]["error"]["code"], -32602);
    assert_eq!(replies[5], json!({"jsonrpc": "2.0", "id": 4, "result": {}}));
}

#[test]
fn tools_list_is_stable_and_typed() {
    let store = GraphStore::new();
    let t = store.create_tenant("p").unwrap();
    pathways_fixture(&t);
    let server = McpServer::for_tenant(t, Some(&config("pathways")), &no_overrides()).unwrap();
    let a = server.tools_list();
    assert_eq!(a, server.tools_list());
    let tools = a["tools"].as_array().unwrap();
    assert_eq!(tools.len(), server.catalog().len());
    let search = tools.iter().find(|t| t["name"] == "search_protein").unwrap();
    let schema = &search["inputSchema"];
    assert_eq!(schema["type"], "object");
    assert_eq!(schema["properties"]["limit"]["type"], "integer");
    assert_eq!(schema["properties"]["limit"]["default"], 25);
    assert_eq!(schema["required"], json!(["query"]));
}

const GOLDEN_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

#[test]
fn golden_stdio_transcript() {
    let store = GraphStore::new();
    let t = store.create_tenant("p").unwrap();
    pathways_fixture(&t);
    let server = McpServer::for_tenant(t, Some(&config("pathways")), &no_overrides()).unwrap();
    let requests = std::fs::read_to_string(Path::new(GOLDEN_DIR).join("mcp_session.jsonl")).unwrap();
    let replies = run_session(&server, &requests);
    let golden = Path::new(GOLDEN_DIR).join("mcp_session.expected.jsonl");
    if std::env::var_os("KGFED_BLESS").is_some() {
        std::fs::write(&golden, &replies).unwrap();
    }
    let expected = std::fs::read_to_string(golden).unwrap();
    for (i, (got, want)) in replies.lines().zip(expected.lines()).enumerate() {
        assert_eq!(got, want, "reply {i}");
    }
    assert_eq!(replies.lines().count(), expected.lines().count());
}

#[test]
fn tool_calls_match_http_queries() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_corpus(11, Scale::Small, tmp.path()).unwrap();
    let store = Arc::new(GraphStore::new());
    let t = store.create_tenant("fed").unwrap();
    load_corpus(&t, tmp.path(), &manifest, &["drug_interactions", "pathways", "clinical_trials"]);
    let http = kgfed::http::spawn(store.clone(), "127.0.0.1:0").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for cfg in ["drug_interactions", "pathways", "clinical_trials"] {
        let server = McpServer::for_tenant(t.clone(), Some(&config(cfg)), &no_overrides()).unwrap();
        let report = dual_execution(&server, &t, &http.url(), "fed", 12, &mut rng);
        assert!(report.mismatches.is_empty(), "{cfg}: {:?}", report.mismatches);
        assert_eq!(report.calls, report.tools * 12);
        assert!(
            report.tools_with_rows * 10 >= report.tools * 8,
            "{cfg}: only {}/{} tools returned rows",
            report.tools_with_rows,
            report.tools
        );
    }
}

#[test]
fn planted_federation_through_tools() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_corpus(42, Scale::Small, tmp.path()).unwrap();
    let store = GraphStore::new();
    let t = store.create_tenant("fed").unwrap();
    load_corpus(&t, tmp.path(), &manifest, &["drug_interactions", "pathways", "clinical_trials"]);
    let trials = McpServer::for_tenant(t.clone(), Some(&config("clinical_trials")), &no_overrides()).unwrap();
    let out = call(&trials, "drug_trials", json!({"drug_name": "Warfarin", "limit": 200}));
    let got: BTreeSet<String> = out.rows.iter().map(Value::to_string).collect();
    let expected: BTreeSet<String> =
        manifest.query("warfarin_trials").unwrap().rows.iter().map(|r| json!(r).to_string()).collect();
    assert!(!expected.is_empty());
    assert!(expected.is_subset(&got));
    let pathways = McpServer::for_tenant(t, Some(&config("pathways")), &no_overrides()).unwrap();
    let impact = call(&pathways, "drug_pathway_impact", json!({"drug_name": "Metformin", "limit": 200}));
    let got: BTreeSet<String> = impact.rows.iter().map(Value::to_string).collect();
    for row in &manifest.query("metformin_pathways").unwrap().rows {
        assert!(got.contains(&json!(row).to_string()), "{row:?}");
    }
}

#[test]
fn row_cap_truncates() {
    let store = GraphStore::new();
    let t = store.create_tenant("t").unwrap();
    for i in 0..250 {
        execute_text(&t, &format!("CREATE (:Item {{name: 'item{i:03}'}})"), &Params::new()).unwrap();
    }
    let server = McpServer::for_tenant(t, None, &no_overrides()).unwrap();
    let out = call(&server, "search_item", json!({"query": "item", "limit": 1000}));
    assert_eq!(out.rows.len(), 200);
    assert!(out.truncated);
    let out = call(&server, "search_item", json!({"query": "item", "limit": 200}));
    assert!(!out.truncated);
}

#[test]
fn arguments_never_change_the_query_shape() {
    let store = GraphStore::new();
    let t = store.create_tenant("p").unwrap();
    pathways_fixture(&t);
    let server = McpServer::for_tenant(t, Some(&config("pathways")), &no_overrides()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let strings = adversarial_strings(1000, &mut rng);
    let report = injection_check(&server, &["pathway_members", "search_protein", "get_pathway"], &strings);
    assert_eq!(report.checks, 3000);
    assert!(report.violations.is_empty(), "{:?}", &report.violations[..report.violations.len().min(5)]);
    assert!(report.splice_breaks > 1000, "splicing control broke only {}", report.splice_breaks);
}

fn name_strategy() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9_ ]{0,7}"
}

fn schema_strategy() -> impl Strategy<Value = GraphSchema> {
    (
        prop::collection::btree_set(name_strategy(), 0..8),
        prop::collection::btree_set(name_strategy(), 0..8),
        prop::collection::vec(name_strategy(), 0..5),
        any::<u64>(),
    )
        .prop_map(|(labels, etypes, props, seed)| {
            let labels: Vec<String> = labels.into_iter().collect();
            let labels_schema = labels
                .iter()
                .enumerate()
                .map(|(i, l)| LabelSchema {
                    name: l.clone(),
                    count: 1,
                    properties: props.iter().skip(i % (props.len() + 1)).cloned().collect(),
                    indexed: Vec::new(),
                })
                .collect();
            let edge_types = etypes
                .into_iter()
                .enumerate()
                .map(|(i, e)| {
                    let pick = |k: u64| -> Vec<String> {
                        if labels.is_empty() {
                            return Vec::new();
                        }
                        let n = ((seed >> (k % 60)) % 3) as usize;
                        (0..n).map(|j| labels[(i + j + k as usize) % labels.len()].clone()).collect::<BTreeSet<_>>().into_iter().collect()
                    };
                    EdgeTypeSchema {
                        name: e,
                        count: 1,
                        source_labels: pick(i as u64),
                        target_labels: pick(i as u64 + 7),
                    }
                })
                .collect();
            GraphSchema {
                labels: labels_schema,
                edge_types,
            }
        })
}

fn template_names(tool: &ToolSpec) -> (BTreeSet<String>, BTreeSet<String>) {
    let q = cypher::parse(&tool.template).unwrap();
    let labels = q.match_patterns().flat_map(|p| p.nodes().filter_map(|n| n.label.clone())).collect();
    let types = q.match_patterns().flat_map(|p| p.steps.iter().map(|(r, _)| r.etype.clone())).collect();
    (labels, types)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tool_count_formula_holds(schema in schema_strategy(), domain_tools in 0usize..4) {
        let yaml: String = std::iter::once("tools:\n".to_string())
            .chain((0..domain_tools).map(|i| format!("  - {{name: domain_tool_{i}, cypher: 'MATCH (n) RETURN n'}}\n")))
            .collect();
        let cfg = DomainConfig::from_yaml(&yaml).unwrap();
        let catalog = discover_tools(&schema, Some(&cfg), &BTreeMap::new()).unwrap();
        prop_assert_eq!(catalog.len(), 3 * schema.labels.len() + schema.edge_types.len() + domain_tools);
        let names: BTreeSet<&str> = catalog.tools.iter().map(|t| t.name.as_str()).collect();
        prop_assert_eq!(names.len(), catalog.len());
        let labels: BTreeSet<String> = schema.labels.iter().map(|l| l.name.clone()).collect();
        let types: BTreeSet<String> = schema.edge_types.iter().map(|e| e.name.clone()).collect();
        for tool in catalog.tools.iter().filter(|t| t.origin != ToolOrigin::Domain) {
            let (used_labels, used_types) = template_names(tool);
            prop_assert!(used_labels.is_subset(&labels), "{}", tool.template);
            prop_assert!(used_types.is_subset(&types), "{}", tool.template);
            let q = cypher::parse(&tool.template).unwrap();
            let declared: BTreeSet<String> = tool.params.iter().map(|p| p.name.clone()).collect();
            prop_assert_eq!(q.parameters, declared);
        }
    }

    #[test]
    fn domain_tools_shadow_autos(n_labels in 1usize..5) {
        let schema = GraphSchema {
            labels: (0..n_labels).map(|i| LabelSchema {
                name: format!("L{i}"),
                count: 1,
                properties: vec!["name".into()],
                indexed: vec![],
            }).collect(),
            edge_types: vec![],
        };
        let cfg = DomainConfig::from_yaml(
            "tools:\n  - {name: count_l0, description: custom, cypher: 'MATCH (n:L0) RETURN count(*)'}\n",
        ).unwrap();
        let catalog = discover_tools(&schema, Some(&cfg), &BTreeMap::new()).unwrap();
        prop_assert_eq!(catalog.len(), 3 * n_labels);
        let shadow = catalog.get("count_l0").unwrap();
        prop_assert_eq!(shadow.origin, ToolOrigin::Domain);
        prop_assert_eq!(&shadow.description, "custom");
    }
}
