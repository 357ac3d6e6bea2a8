//! `kgfed` command line.
//!
//! Tenants persist between invocations as `<data>/<tenant>.sgsnap`. Exit
//! codes: 0 ok, 1 usage, 2 data or parse fault, 3 runtime fault.

mod output;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use kgfed::cypher::{self, CypherError, Params};
use kgfed::etl::{
    gen_corpus, load_cypher, load_native_tenant, CorpusManifest, DedupRegistry, EtlError, HttpEndpoint,
    LoadOptions, MappingConfig, Scale, DEFAULT_BATCH_SIZE, FEDERATION_QUERIES,
};
use kgfed::graph::{GraphError, GraphStore, TenantHandle};
use kgfed::mcp::{DomainConfig, McpServer};
use kgfed::snapshot::{self, ImportConfig, SnapshotError};
use serde_json::json;

use output::Format;

#[derive(Parser)]
#[command(name = "kgfed", version, about = "Property-graph engine with snapshot federation and MCP tools")]
struct Cli {
    /// Directory holding tenant snapshots. KGFED_DATA takes precedence.
    #[arg(long, global = true, default_value = "kgfed-data")]
    data: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API, optionally with an MCP server on stdio.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7070")]
        http: String,
        /// Run the MCP request loop on stdin/stdout; exits at end of input.
        #[arg(long)]
        mcp: bool,
        /// Domain tool definitions (YAML).
        #[arg(long)]
        mcp_config: Option<PathBuf>,
        /// Tenant the MCP tools query.
        #[arg(long, default_value = "default")]
        tenant: String,
    },
    /// Append snapshot files to a tenant.
    Import {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "default")]
        tenant: String,
        /// Extra exact-match index, as Label.property.
        #[arg(long = "index")]
        indexes: Vec<String>,
    },
    /// Write a tenant to a snapshot file.
    Export {
        #[arg(long, default_value = "default")]
        tenant: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a query; rows go to stdout and latency to stderr. CREATE makes the
    /// tenant if it does not exist.
    Query {
        text: String,
        #[arg(long, default_value = "default")]
        tenant: String,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Query parameters as a JSON object.
        #[arg(long)]
        params: Option<String>,
    },
    /// Print the operator tree for a query.
    Explain {
        text: String,
        #[arg(long, default_value = "default")]
        tenant: String,
    },
    /// Load delimited sources described by a mapping file into a tenant.
    Load {
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long, default_value = "default")]
        tenant: String,
        #[arg(long, value_enum, default_value = "native")]
        via: Via,
        /// Rows per request for the HTTP loader.
        #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
        batch: usize,
        /// Abort on the first malformed row.
        #[arg(long)]
        strict: bool,
        /// Server for `--via http`; without it a local server is started.
        #[arg(long)]
        url: Option<String>,
    },
    /// Generate a seeded synthetic corpus with its manifest.
    GenCorpus {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "small")]
        scale: Scale,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Time a query suite; reports the median of several runs.
    Bench {
        #[arg(long, default_value = "default")]
        tenant: String,
        #[arg(long, value_enum, default_value = "single")]
        suite: Suite,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Corpus manifest to check federation rows against.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Check a snapshot file and report every fault.
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Via {
    Native,
    Http,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Single,
    Federation,
}

/// A failure with its exit code.
#[derive(Debug)]
enum Fault {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl Fault {
    fn code(&self) -> u8 {
        match self {
            Fault::Usage(_) => 1,
            Fault::Data(_) => 2,
            Fault::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Fault::Usage(m) | Fault::Data(m) | Fault::Runtime(m) => m,
        }
    }
}

impl From<CypherError> for Fault {
    fn from(e: CypherError) -> Self {
        match e.position() {
            Some(p) => Fault::Data(format!("{}: {e} (line {}, column {})", e.kind(), p.line, p.column)),
            None => Fault::Data(format!("{}: {e}", e.kind())),
        }
    }
}

impl From<SnapshotError> for Fault {
    fn from(e: SnapshotError) -> Self {
        Fault::Data(e.to_string())
    }
}

impl From<GraphError> for Fault {
    fn from(e: GraphError) -> Self {
        Fault::Data(e.to_string())
    }
}

impl From<EtlError> for Fault {
    fn from(e: EtlError) -> Self {
        match e {
            EtlError::Unreachable { .. } | EtlError::BatchRejected { .. } | EtlError::BatchMismatch { .. } => {
                Fault::Runtime(e.to_string())
            }
            _ => Fault::Data(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Fault>;

fn runtime(e: impl std::fmt::Display) -> Fault {
    Fault::Runtime(e.to_string())
}

fn print_json(v: &impl serde::Serialize) -> CliResult {
    println!("{}", serde_json::to_string_pretty(v).map_err(runtime)?);
    Ok(())
}

/// Tenant snapshots in a directory.
struct DataDir {
    root: PathBuf,
}

impl DataDir {
    fn path(&self, tenant: &str) -> CliResult<PathBuf> {
        let valid = !tenant.is_empty()
            && tenant.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            && !tenant.starts_with('.');
        if !valid {
            return Err(Fault::Usage(format!(
                "invalid tenant name `{tenant}` (letters, digits, `_`, `-`, `.`)"
            )));
        }
        Ok(self.root.join(format!("{tenant}.sgsnap")))
    }

    /// Loads a stored tenant into `store`. Missing tenants are created empty
    /// when `create` is set and are an error otherwise.
    fn open(&self, store: &GraphStore, tenant: &str, create: bool, config: &ImportConfig) -> CliResult<TenantHandle> {
        let path = self.path(tenant)?;
        let handle = store.create_tenant(tenant)?;
        if path.exists() {
            let file = File::open(&path).map_err(|e| Fault::Data(format!("{}: {e}", path.display())))?;
            snapshot::import_into_tenant(&handle, BufReader::new(file), config)
                .map_err(|e| Fault::Data(format!("{}: {e}", path.display())))?;
        } else if !create {
            return Err(Fault::Data(format!("unknown tenant `{tenant}` (no {})", path.display())));
        } else {
            let mut g = handle.write();
            for (label, props) in &config.indexes {
                for p in props {
                    g.declare_index(label, p);
                }
            }
        }
        Ok(handle)
    }

    /// Writes the tenant back through a temporary file.
    fn save(&self, tenant: &TenantHandle, name: &str) -> CliResult {
        let path = self.path(name)?;
        fs::create_dir_all(&self.root).map_err(runtime)?;
        let tmp = path.with_extension("sgsnap.tmp");
        let file = File::create(&tmp).map_err(|e| Fault::Runtime(format!("{}: {e}", tmp.display())))?;
        snapshot::export_tenant(tenant, BufWriter::new(file)).map_err(runtime)?;
        fs::rename(&tmp, &path).map_err(runtime)
    }

    /// Every stored tenant, by name.
    fn load_all(&self, store: &GraphStore) -> CliResult<Vec<String>> {
        let mut names = Vec::new();
        let entries = match fs::read_dir(&self.root) {
            Ok(entries) => entries,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(names),
            Err(e) => return Err(Fault::Data(format!("{}: {e}", self.root.display()))),
        };
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "sgsnap"))
            .collect();
        paths.sort();
        for p in paths {
            let name = p.file_stem().unwrap().to_string_lossy().to_string();
            self.open(store, &name, false, &ImportConfig::default())?;
            names.push(name);
        }
        Ok(names)
    }
}

fn parse_indexes(specs: &[String]) -> CliResult<ImportConfig> {
    let mut config = ImportConfig::default();
    for s in specs {
        let (label, prop) = s
            .split_once('.')
            .filter(|(l, p)| !l.is_empty() && !p.is_empty())
            .ok_or_else(|| Fault::Usage(format!("--index expects Label.property, got `{s}`")))?;
        config.indexes.entry(label.to_string()).or_default().push(prop.to_string());
    }
    Ok(config)
}

fn serve(data: &DataDir, http: &str, mcp: bool, mcp_config: Option<&Path>, tenant: &str) -> CliResult {
    let domain = match mcp_config {
        Some(p) => Some(DomainConfig::load(p).map_err(|e| Fault::Data(e.to_string()))?),
        None => None,
    };
    let store = Arc::new(GraphStore::new());
    let names = data.load_all(&store)?;
    eprintln!("loaded {} tenant(s) from {}", names.len(), data.root.display());
    let server = kgfed::http::spawn(store.clone(), http).map_err(|e| Fault::Runtime(format!("cannot bind {http}: {e}")))?;
    eprintln!("listening on {}", server.url());
    if !mcp {
        return server.wait().map_err(runtime);
    }
    let handle = store.get_or_create_tenant(tenant)?;
    let mcp = McpServer::for_tenant(handle, domain.as_ref(), &BTreeMap::new()).map_err(|e| Fault::Data(e.to_string()))?;
    eprintln!("mcp: {} tools on tenant `{tenant}`", mcp.catalog().len());
    mcp.serve(io::stdin().lock(), io::stdout().lock()).map_err(runtime)?;
    server.shutdown().map_err(runtime)
}

fn import(data: &DataDir, files: &[PathBuf], tenant: &str, indexes: &[String]) -> CliResult {
    let config = parse_indexes(indexes)?;
    let store = GraphStore::new();
    let handle = data.open(&store, tenant, true, &config)?;
    for f in files {
        let file = File::open(f).map_err(|e| Fault::Data(format!("{}: {e}", f.display())))?;
        let stats = snapshot::import_into_tenant(&handle, BufReader::new(file), &config)
            .map_err(|e| Fault::Data(format!("{}: {e}", f.display())))?;
        let g = handle.read();
        print_json(&json!({
            "file": f.display().to_string(),
            "stats": stats,
            "tenant_nodes": g.node_count(),
            "tenant_edges": g.edge_count(),
        }))?;
    }
    data.save(&handle, tenant)
}

fn export(data: &DataDir, tenant: &str, output: &Path) -> CliResult {
    let store = GraphStore::new();
    let handle = data.open(&store, tenant, false, &ImportConfig::default())?;
    let file = File::create(output).map_err(|e| Fault::Runtime(format!("{}: {e}", output.display())))?;
    let header = snapshot::export_tenant(&handle, BufWriter::new(file)).map_err(runtime)?;
    print_json(&header)
}

fn query(data: &DataDir, text: &str, tenant: &str, format: Format, params: Option<&str>) -> CliResult {
    let params = match params {
        None => Params::new(),
        Some(p) => {
            let v: serde_json::Value =
                serde_json::from_str(p).map_err(|e| Fault::Usage(format!("--params is not JSON: {e}")))?;
            cypher::params_from_json(&v).map_err(Fault::Usage)?
        }
    };
    let parsed = cypher::parse(text)?;
    let store = GraphStore::new();
    let handle = data.open(&store, tenant, parsed.is_create(), &ImportConfig::default())?;
    let table = cypher::execute_text(&handle, text, &params)?;
    output::write_table(&table, format, &mut io::stdout().lock()).map_err(runtime)?;
    eprintln!("{} row(s) in {:.2} ms", table.rows.len(), table.latency_ms);
    if parsed.is_create() {
        data.save(&handle, tenant)?;
    }
    Ok(())
}

fn explain(data: &DataDir, text: &str, tenant: &str) -> CliResult {
    let store = GraphStore::new();
    let handle = data.open(&store, tenant, false, &ImportConfig::default())?;
    print!("{}", cypher::explain(&handle, text)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn load(
    data: &DataDir,
    mapping: &Path,
    tenant: &str,
    via: Via,
    batch: usize,
    strict: bool,
    url: Option<&str>,
) -> CliResult {
    let mapping = MappingConfig::from_file(mapping)?;
    let opts = LoadOptions { strict };
    let mut registry = DedupRegistry::new();
    if let (Via::Http, Some(url)) = (via, url) {
        let stats = load_cypher(&mut HttpEndpoint::new(url, tenant), &mapping, batch, &mut registry, &opts)?;
        return print_json(&stats);
    }
    let store = Arc::new(GraphStore::new());
    let handle = data.open(&store, tenant, true, &ImportConfig::default())?;
    let stats = match via {
        Via::Native => load_native_tenant(&handle, &mapping, &mut registry, &opts)?,
        Via::Http => {
            let server = kgfed::http::spawn(store.clone(), "127.0.0.1:0").map_err(runtime)?;
            let mut endpoint = HttpEndpoint::new(&server.url(), tenant);
            let stats = load_cypher(&mut endpoint, &mapping, batch, &mut registry, &opts);
            server.shutdown().map_err(runtime)?;
            stats?
        }
    };
    print_json(&stats)?;
    data.save(&handle, tenant)
}

fn gen(seed: u64, scale: Scale, output: &Path) -> CliResult {
    let started = Instant::now();
    let manifest = gen_corpus(seed, scale, output)?;
    let kgs: Vec<_> = manifest
        .kgs
        .iter()
        .map(|k| json!({"name": k.name, "mapping": k.mapping, "nodes": k.node_total(), "edges": k.edge_total()}))
        .collect();
    print_json(&json!({
        "seed": seed,
        "scale": scale,
        "directory": output.display().to_string(),
        "kgs": kgs,
        "seconds": started.elapsed().as_secs_f64(),
    }))
}

const SINGLE_SUITE: [(&str, &str); 5] = [
    (
        "drug_targets",
        "MATCH (d:Drug {name: 'Metformin'})-[:INTERACTS_WITH_GENE]->(g:Gene) RETURN g.gene_name",
    ),
    (
        "drug_side_effects",
        "MATCH (d:Drug {name: 'Warfarin'})-[:HAS_SIDE_EFFECT]->(s:SideEffect) RETURN s.name",
    ),
    (
        "protein_pathways",
        "MATCH (p:Protein {name: 'TP53'})-[:PARTICIPATES_IN]->(pw:Pathway) RETURN pw.name",
    ),
    (
        "top_breast_conditions",
        "MATCH (c:Condition)<-[:STUDIES]-(ct:ClinicalTrial) WHERE c.name CONTAINS 'Breast' \
         RETURN c.name, count(ct) AS trials ORDER BY trials DESC LIMIT 5",
    ),
    ("trial_lookup", "MATCH (ct:ClinicalTrial {nct_id: 'NCT00835861'}) RETURN ct.title, ct.phase"),
];

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn bench(data: &DataDir, tenant: &str, suite: Suite, runs: usize, manifest: Option<&Path>) -> CliResult {
    if runs == 0 {
        return Err(Fault::Usage("--runs must be at least 1".into()));
    }
    let manifest = match manifest {
        Some(p) => Some(CorpusManifest::from_file(p)?),
        None => None,
    };
    let store = GraphStore::new();
    let handle = data.open(&store, tenant, false, &ImportConfig::default())?;
    let queries: &[(&str, &str)] = match suite {
        Suite::Single => &SINGLE_SUITE,
        Suite::Federation => &FEDERATION_QUERIES,
    };
    let mut failed = Vec::new();
    let mut table = vec![vec![
        "query".to_string(),
        "rows".into(),
        "median_ms".into(),
        "min_ms".into(),
        "max_ms".into(),
        "expected".into(),
    ]];
    for (name, text) in queries {
        let mut times = Vec::with_capacity(runs);
        let mut last = None;
        for _ in 0..runs {
            let out = cypher::execute_text(&handle, text, &Params::new())
                .map_err(|e| Fault::Runtime(format!("{name}: {e}")))?;
            times.push(out.latency_ms);
            last = Some(out);
        }
        let out = last.unwrap();
        let check = match manifest.as_ref().and_then(|m| m.query(name)) {
            None => "-".to_string(),
            Some(expected) => {
                let rows: Vec<Vec<String>> =
                    out.rows.iter().map(|r| r.iter().map(output::cell_text).collect()).collect();
                if rows == expected.rows {
                    "match".into()
                } else {
                    failed.push(name.to_string());
                    "MISMATCH".into()
                }
            }
        };
        let (min, max) = times.iter().fold((f64::MAX, 0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        table.push(vec![
            name.to_string(),
            out.rows.len().to_string(),
            format!("{:.2}", median(times)),
            format!("{min:.2}"),
            format!("{max:.2}"),
            check,
        ]);
    }
    output::write_aligned(&table, &mut io::stdout().lock()).map_err(runtime)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Fault::Runtime(format!("rows differ from the manifest: {}", failed.join(", "))))
    }
}

fn validate(file: &Path) -> CliResult {
    let f = File::open(file).map_err(|e| Fault::Data(format!("{}: {e}", file.display())))?;
    let report = snapshot::validate_snapshot(BufReader::new(f));
    print_json(&report)?;
    if report.faults.is_empty() {
        Ok(())
    } else {
        Err(Fault::Data(format!("{} fault(s) in {}", report.faults.len(), file.display())))
    }
}

fn run(cli: Cli) -> CliResult {
    let root = std::env::var_os("KGFED_DATA").map(PathBuf::from).unwrap_or(cli.data);
    let data = DataDir { root };
    match cli.command {
        Command::Serve {
            http,
            mcp,
            mcp_config,
            tenant,
        } => serve(&data, &http, mcp, mcp_config.as_deref(), &tenant),
        Command::Import { files, tenant, indexes } => import(&data, &files, &tenant, &indexes),
        Command::Export { tenant, output } => export(&data, &tenant, &output),
        Command::Query {
            text,
            tenant,
            format,
            params,
        } => query(&data, &text, &tenant, format, params.as_deref()),
        Command::Explain { text, tenant } => explain(&data, &text, &tenant),
        Command::Load {
            mapping,
            tenant,
            via,
            batch,
            strict,
            url,
        } => load(&data, &mapping, &tenant, via, batch, strict, url.as_deref()),
        Command::GenCorpus { seed, scale, output } => gen(seed, scale, &output),
        Command::Bench {
            tenant,
            suite,
            runs,
            manifest,
        } => bench(&data, &tenant, suite, runs, manifest.as_deref()),
        Command::Validate { file } => validate(&file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
