mod support;

use std::collections::{BTreeMap, BTreeSet};

use kgfed::graph::{Graph, IndexPolicy, PropertyValue};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::graphgen::{properties, random_property_graph, value, LABELS, TYPES};

const KEYS: [&str; 6] = ["name", "score", "synonyms", "gene_name", "k é", "_id"];

/// Reference match: scalar equality with integral reals equal to integers,
/// per-element membership for text-lists probed with text.
fn oracle_match(stored: &PropertyValue, probe: &PropertyValue) -> bool {
    use PropertyValue::*;
    let int_real = |i: i64, r: f64| r.fract() == 0.0 && (-9.223_372_036_854_776e18..9.223_372_036_854_776e18).contains(&r) && r as i64 == i;
    match (stored, probe) {
        (TextList(items), Text(p)) => items.contains(p),
        (TextList(a), TextList(b)) => a == b,
        (Text(a), Text(b)) => a == b,
        (Integer(a), Integer(b)) => a == b,
        (Real(a), Real(b)) => a.to_bits() == b.to_bits() || (a == b && a.fract() == 0.0),
        (Integer(i), Real(r)) | (Real(r), Integer(i)) => int_real(*i, *r),
        (Flag(a), Flag(b)) => a == b,
        _ => false,
    }
}

fn brute_force(g: &Graph, label: &str, key: &str, probe: &PropertyValue) -> Vec<u64> {
    g.nodes()
        .iter()
        .filter(|n| n.labels.iter().any(|l| &**l == label))
        .filter(|n| n.properties.get(key).is_some_and(|v| oracle_match(v, probe)))
        .map(|n| n.id)
        .collect()
}

/// Probes drawn from stored values, their text-list elements, and fresh values.
fn probes(g: &Graph, rng: &mut ChaCha8Rng) -> Vec<PropertyValue> {
    let mut out: Vec<PropertyValue> = Vec::new();
    for _ in 0..40 {
        if let Some(n) = g.nodes().choose(rng) {
            if let Some((_, v)) = n.properties.iter().collect::<Vec<_>>().choose(rng) {
                if let PropertyValue::TextList(items) = v {
                    if let Some(s) = items.choose(rng) {
                        out.push(PropertyValue::Text(s.clone()));
                    }
                }
                out.push((*v).clone());
            }
        }
        out.push(value(rng));
    }
    out.push(PropertyValue::Integer(0));
    out.push(PropertyValue::Real(0.0));
    out.push(PropertyValue::Real(-0.0));
    out
}

/// Builds a graph from a random mix of inserts, index declarations,
/// set-if-absent writes and rolled-back batches.
fn build(seed: u64, auto: bool) -> (Graph, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = if auto {
        {
        let n = rng.gen_range(0..=600);
        random_property_graph(&mut rng, n)
    }
    } else {
        let mut g = Graph::with_policy("manual", IndexPolicy { auto: false });
        for _ in 0..rng.gen_range(0..=300) {
            let k = rng.gen_range(1..=3);
            let labels: Vec<&str> = LABELS.choose_multiple(&mut rng, k).copied().collect();
            let p = properties(&mut rng, 4);
            g.create_node(labels, p, &[]).unwrap();
        }
        g
    };
    for _ in 0..rng.gen_range(0..60) {
        match rng.gen_range(0..5) {
            0 => {
                g.declare_index(LABELS.choose(&mut rng).unwrap(), KEYS.choose(&mut rng).unwrap());
            }
            1 => add_nodes(&mut g, &mut rng, 5),
            2 => add_edges(&mut g, &mut rng, 10),
            3 => {
                if g.node_count() > 0 {
                    let id = rng.gen_range(0..g.node_count()) as u64;
                    let v = value(&mut rng);
                    g.set_property_if_absent(id, KEYS.choose(&mut rng).unwrap(), v).unwrap();
                }
            }
            _ => {
                let before = (g.node_count(), g.edge_count());
                let cp = g.checkpoint();
                add_nodes(&mut g, &mut rng, 10);
                add_edges(&mut g, &mut rng, 10);
                if g.node_count() > before.0 {
                    let id = rng.gen_range(before.0..g.node_count()) as u64;
                    let v = value(&mut rng);
                    g.set_property_if_absent(id, KEYS.choose(&mut rng).unwrap(), v).unwrap();
                }
                g.declare_index(LABELS.choose(&mut rng).unwrap(), KEYS.choose(&mut rng).unwrap());
                g.rollback(cp);
                assert_eq!((g.node_count(), g.edge_count()), before);
            }
        }
    }
    (g, rng)
}

fn add_nodes(g: &mut Graph, rng: &mut ChaCha8Rng, max: usize) {
    for _ in 0..rng.gen_range(0..=max) {
        let k = rng.gen_range(1..=3);
        let labels: Vec<&str> = LABELS.choose_multiple(rng, k).copied().collect();
        let p = properties(rng, 4);
        let id = g.create_node(labels, p, &[]).unwrap();
        assert_eq!(id as usize, g.node_count() - 1);
    }
}

fn add_edges(g: &mut Graph, rng: &mut ChaCha8Rng, max: usize) {
    if g.node_count() == 0 {
        return;
    }
    for _ in 0..rng.gen_range(0..=max) {
        let a = rng.gen_range(0..g.node_count()) as u64;
        let b = rng.gen_range(0..g.node_count()) as u64;
        let p = properties(rng, 2);
        let id = g.create_edge(a, b, TYPES.choose(rng).unwrap(), p).unwrap();
        assert_eq!(id as usize, g.edge_count() - 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn indexed_lookups_equal_brute_force(seed in any::<u64>(), auto in any::<bool>()) {
        let (g, mut rng) = build(seed, auto);
        let probes = probes(&g, &mut rng);
        for label in LABELS {
            for key in KEYS {
                for probe in &probes {
                    let expected = brute_force(&g, label, key, probe);
                    prop_assert_eq!(g.nodes_by_label_prop(label, key, probe), expected.clone(),
                        "{}.{} = {:?}", label, key, probe);
                    prop_assert_eq!(g.scan_label_prop(label, key, probe), expected);
                }
            }
        }
    }

    #[test]
    fn edges_reference_existing_nodes(seed in any::<u64>(), auto in any::<bool>()) {
        let (g, _) = build(seed, auto);
        let mut out: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        let mut inc: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for e in g.edges() {
            prop_assert!(g.node(e.src).is_some() && g.node(e.dst).is_some());
            out.entry(e.src).or_default().push(e.id);
            inc.entry(e.dst).or_default().push(e.id);
        }
        for n in g.nodes() {
            let (o, i) = (out.remove(&n.id).unwrap_or_default(), inc.remove(&n.id).unwrap_or_default());
            prop_assert_eq!(g.out_edges(n.id), o.as_slice());
            prop_assert_eq!(g.in_edges(n.id), i.as_slice());
        }
    }

    #[test]
    fn schema_counts_equal_full_scan(seed in any::<u64>(), auto in any::<bool>()) {
        let (g, _) = build(seed, auto);
        let mut labels: BTreeMap<String, (usize, BTreeSet<String>)> = BTreeMap::new();
        for n in g.nodes() {
            for l in &n.labels {
                let entry = labels.entry(l.to_string()).or_default();
                entry.0 += 1;
                entry.1.extend(n.properties.keys().cloned());
            }
        }
        let mut types: BTreeMap<String, (usize, BTreeSet<String>, BTreeSet<String>)> = BTreeMap::new();
        for e in g.edges() {
            let entry = types.entry(e.etype.to_string()).or_default();
            entry.0 += 1;
            entry.1.extend(g.node(e.src).unwrap().labels.iter().map(|l| l.to_string()));
            entry.2.extend(g.node(e.dst).unwrap().labels.iter().map(|l| l.to_string()));
        }
        let schema = g.schema();
        let got: BTreeMap<String, (usize, BTreeSet<String>)> = schema
            .labels
            .iter()
            .map(|l| (l.name.clone(), (l.count, l.properties.iter().cloned().collect())))
            .collect();
        prop_assert_eq!(got, labels);
        let got: BTreeMap<String, (usize, BTreeSet<String>, BTreeSet<String>)> = schema
            .edge_types
            .iter()
            .map(|t| {
                let set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
                (t.name.clone(), (t.count, set(&t.source_labels), set(&t.target_labels)))
            })
            .collect();
        prop_assert_eq!(got, types);
        for l in &schema.labels {
            for key in &l.indexed {
                prop_assert!(g.is_indexed(&l.name, key));
            }
        }
    }

    #[test]
    fn ids_are_dense_and_increasing(seed in any::<u64>(), auto in any::<bool>()) {
        let (g, _) = build(seed, auto);
        for (i, n) in g.nodes().iter().enumerate() {
            prop_assert_eq!(n.id, i as u64);
        }
        for (i, e) in g.edges().iter().enumerate() {
            prop_assert_eq!(e.id, i as u64);
        }
        for label in LABELS {
            prop_assert!(g.nodes_by_label(label).windows(2).all(|w| w[0] < w[1]));
        }
    }
}
