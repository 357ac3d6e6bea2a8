use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use kgfed::cypher::{self, Params};
use kgfed::etl::{
    gen_corpus, load_native_tenant, CorpusManifest, DedupRegistry, LoadOptions, MappingConfig, Scale, FEDERATION_QUERIES,
};
use kgfed::graph::{GraphStore, TenantHandle};
use kgfed::snapshot::{export_tenant, import_into_tenant, ImportConfig};

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    manifest: CorpusManifest,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let manifest = gen_corpus(42, Scale::Small, &root).unwrap();
        Fixture {
            _dir: dir,
            root,
            manifest,
        }
    }

    fn mapping(&self, i: usize) -> MappingConfig {
        MappingConfig::from_file(self.root.join(&self.manifest.kgs[i].mapping)).unwrap()
    }

    fn load(&self, store: &GraphStore, tenant: &str, kgs: &[usize]) -> TenantHandle {
        let handle = store.create_tenant(tenant).unwrap();
        for &i in kgs {
            load_native_tenant(&handle, &self.mapping(i), &mut DedupRegistry::new(), &LoadOptions::default()).unwrap();
        }
        handle
    }
}

fn snapshot_bytes(handle: &TenantHandle) -> Vec<u8> {
    let mut buf = Vec::new();
    export_tenant(handle, &mut buf).unwrap();
    buf
}

fn bench_load(c: &mut Criterion, fx: &Fixture) {
    let mut group = c.benchmark_group("load");
    group.sample_size(10);
    for (i, kg) in fx.manifest.kgs.iter().enumerate() {
        let mapping = fx.mapping(i);
        group.bench_function(format!("native/{}", kg.name), |b| {
            b.iter_batched(
                GraphStore::new,
                |store| {
                    let h = store.create_tenant("t").unwrap();
                    load_native_tenant(&h, &mapping, &mut DedupRegistry::new(), &LoadOptions::default()).unwrap()
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn bench_snapshot(c: &mut Criterion, fx: &Fixture) {
    let store = GraphStore::new();
    let handle = fx.load(&store, "all", &[0, 1, 2]);
    let bytes = snapshot_bytes(&handle);
    let mut group = c.benchmark_group("snapshot");
    group.sample_size(10);
    group.bench_function("export", |b| b.iter(|| snapshot_bytes(&handle)));
    group.bench_function("import", |b| {
        b.iter_batched(
            GraphStore::new,
            |store| {
                let h = store.create_tenant("t").unwrap();
                import_into_tenant(&h, bytes.as_slice(), &ImportConfig::default()).unwrap()
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn bench_query(c: &mut Criterion, fx: &Fixture) {
    let store = GraphStore::new();
    let handle = fx.load(&store, "fed", &[0, 1, 2]);
    let params = Params::new();
    let mut group = c.benchmark_group("query");
    group.bench_function("parse", |b| b.iter(|| cypher::parse(FEDERATION_QUERIES[0].1).unwrap()));
    group.bench_function("one_hop", |b| {
        b.iter(|| {
            cypher::execute_text(
                &handle,
                "MATCH (d:Drug {name: 'Metformin'})-[:INTERACTS_WITH_GENE]->(g:Gene) RETURN g.gene_name",
                &params,
            )
            .unwrap()
        })
    });
    for (name, text) in FEDERATION_QUERIES {
        group.bench_function(format!("federation/{name}"), |b| {
            b.iter(|| cypher::execute_text(&handle, text, &params).unwrap())
        });
    }
    group.finish();
}

fn benches(c: &mut Criterion) {
    let fx = Fixture::new();
    bench_load(c, &fx);
    bench_snapshot(c, &fx);
    bench_query(c, &fx);
}

criterion_group!(engine, benches);
criterion_main!(engine);
