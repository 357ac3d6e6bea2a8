//! Random property graphs with every value type, for snapshot tests.

use kgfed::graph::{Graph, Properties, PropertyValue};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const LABELS: [&str; 5] = ["Drug", "Gene", "Protein", "Pathway", "Ünïcode label"];
pub const TYPES: [&str; 4] = ["TARGETS", "PARTICIPATES_IN", "CHILD_OF", "weird type"];
const WORDS: [&str; 8] = ["", "TP53", "a\"quote", "tab\tand\nnewline", "émoji 🧬", "back\\slash", "{\"t\":\"n\"}", "x"];

pub fn value(rng: &mut ChaCha8Rng) -> PropertyValue {
    match rng.gen_range(0..6) {
        0 => PropertyValue::Text(WORDS.choose(rng).unwrap().to_string()),
        1 => PropertyValue::Text(format!("s{}", rng.gen::<u32>())),
        2 => PropertyValue::Integer(*[i64::MIN, -1, 0, 700, i64::MAX, rng.gen()].choose(rng).unwrap()),
        3 => PropertyValue::Real(*[0.0, -0.0, 0.1, 1e300, -2.5e-300, rng.gen::<f64>() * 1e6].choose(rng).unwrap()),
        4 => PropertyValue::Flag(rng.gen()),
        _ => {
            let n = rng.gen_range(0..4);
            PropertyValue::TextList((0..n).map(|_| WORDS[1..].choose(rng).unwrap().to_string()).collect())
        }
    }
}

pub fn properties(rng: &mut ChaCha8Rng, max: usize) -> Properties {
    let mut p = Properties::new();
    for _ in 0..rng.gen_range(0..=max) {
        let key = *["name", "score", "synonyms", "gene_name", "k é", "_id"].choose(rng).unwrap();
        p.insert(key.to_string(), value(rng));
    }
    p
}

/// A graph with `nodes` nodes and up to twice as many edges.
pub fn random_property_graph(rng: &mut ChaCha8Rng, nodes: usize) -> Graph {
    let mut g = Graph::new("random");
    for _ in 0..nodes {
        let k = rng.gen_range(1..=3);
        let labels: Vec<&str> = LABELS.choose_multiple(rng, k).copied().collect();
        let p = properties(rng, 4);
        g.create_node(labels, p, &[]).unwrap();
    }
    if nodes > 0 {
        for _ in 0..rng.gen_range(0..=2 * nodes) {
            let a = rng.gen_range(0..nodes) as u64;
            let b = rng.gen_range(0..nodes) as u64;
            let p = properties(rng, 2);
            g.create_edge(a, b, TYPES.choose(rng).unwrap(), p).unwrap();
        }
    }
    g
}
