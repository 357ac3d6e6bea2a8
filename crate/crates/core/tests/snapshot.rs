use std::io::Read;

use flate2::read::GzDecoder;
use kgfed::graph::{canonical_form, isomorphic, Graph, Properties, PropertyValue};
use kgfed::snapshot::{export_snapshot, import_snapshot, read_header, validate_snapshot, ImportConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod support;

use support::graphgen::random_property_graph;

fn export(g: &Graph) -> Vec<u8> {
    let mut buf = Vec::new();
    export_snapshot(g, &mut buf).unwrap();
    buf
}

fn import_into(g: &mut Graph, bytes: &[u8]) -> kgfed::snapshot::ImportStats {
    import_snapshot(g, bytes, &ImportConfig::default()).unwrap()
}

/// Record lines after the header.
fn body(bytes: &[u8]) -> Vec<String> {
    let mut text = String::new();
    GzDecoder::new(bytes).read_to_string(&mut text).unwrap();
    text.lines().skip(1).map(str::to_string).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn export_import_export_is_content_identical(seed in any::<u64>(), n in 0usize..300) {
        let src = random_property_graph(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let first = export(&src);
        let mut copy = Graph::new("copy");
        let stats = import_into(&mut copy, &first);
        prop_assert_eq!(stats.nodes_imported as usize, src.node_count());
        prop_assert_eq!(stats.edges_imported as usize, src.edge_count());
        prop_assert!(isomorphic(&src, &copy));
        let second = export(&copy);
        prop_assert_eq!(body(&first), body(&second));
        prop_assert!(validate_snapshot(&second[..]).faults.is_empty());
    }

    #[test]
    fn imports_append_with_fresh_ids(seed in any::<u64>(), a in 0usize..80, b in 0usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ga, gb) = (random_property_graph(&mut rng, a), random_property_graph(&mut rng, b));
        let mut fed = Graph::new("fed");
        import_into(&mut fed, &export(&ga));
        import_into(&mut fed, &export(&gb));
        // Importing the same snapshot twice keeps both copies.
        import_into(&mut fed, &export(&ga));
        prop_assert_eq!(fed.node_count(), 2 * ga.node_count() + gb.node_count());
        prop_assert_eq!(fed.edge_count(), 2 * ga.edge_count() + gb.edge_count());
        let mut expected = canonical_form(&ga);
        let other = canonical_form(&gb);
        expected.nodes.extend(expected.nodes.clone().into_iter().chain(other.nodes));
        expected.edges.extend(expected.edges.clone().into_iter().chain(other.edges));
        expected.nodes.sort_unstable();
        expected.edges.sort_unstable();
        prop_assert_eq!(canonical_form(&fed), expected);
    }

    #[test]
    fn header_counts_match_the_records(seed in any::<u64>(), n in 0usize..200) {
        let g = random_property_graph(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let bytes = export(&g);
        let header = read_header(&bytes[..]).unwrap();
        prop_assert_eq!(header.node_count as usize, g.node_count());
        prop_assert_eq!(header.edge_count as usize, g.edge_count());
        prop_assert_eq!(body(&bytes).len(), n + g.edge_count());
    }
}

#[test]
fn truncated_snapshot_leaves_the_target_unchanged() {
    let src = random_property_graph(&mut ChaCha8Rng::seed_from_u64(3), 50);
    let mut text = String::new();
    GzDecoder::new(&export(&src)[..]).read_to_string(&mut text).unwrap();
    let cut: Vec<&str> = text.lines().take(20).collect();
    let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::fast());
    std::io::Write::write_all(&mut enc, cut.join("\n").as_bytes()).unwrap();
    let bytes = enc.finish().unwrap();
    let mut target = random_property_graph(&mut ChaCha8Rng::seed_from_u64(4), 10);
    let before = canonical_form(&target);
    assert!(import_snapshot(&mut target, &bytes[..], &ImportConfig::default()).is_err());
    assert_eq!(canonical_form(&target), before);
    assert!(!validate_snapshot(&bytes[..]).faults.is_empty());
}


#[test]
fn reals_round_trip_bit_exact() {
    let mut g = Graph::new("r");
    for r in [949232.2729224891, 0.1 + 0.2, f64::MIN_POSITIVE, f64::MAX, -0.0, 5e-324] {
        let p = Properties::from([("v".to_string(), PropertyValue::Real(r))]);
        g.create_node(["N"], p, &[]).unwrap();
    }
    let mut copy = Graph::new("copy");
    import_into(&mut copy, &export(&g));
    for (a, b) in g.nodes().iter().zip(copy.nodes()) {
        let (PropertyValue::Real(x), PropertyValue::Real(y)) = (&a.properties["v"], &b.properties["v"]) else {
            panic!("reals stay reals")
        };
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
