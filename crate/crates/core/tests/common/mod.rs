#![allow(dead_code)]

use std::collections::BTreeMap;

use forestvol::canon::{canonical_form, IsoKey};
use forestvol::Graph;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Every connected graph on `1..=max_n` vertices with maximum degree at most
/// `max_deg`, one per isomorphism class.
///
/// Each connected graph has a vertex whose removal keeps it connected, so
/// adding one vertex joined to a non-empty subset reaches every class.
pub fn connected_graphs(max_n: usize, max_deg: usize) -> Vec<Graph> {
    let mut layer: BTreeMap<IsoKey, Graph> = BTreeMap::new();
    let single = Graph::empty(1);
    layer.insert(canonical_form(&single).unwrap(), single);
    let mut all: Vec<Graph> = layer.values().cloned().collect();
    for n in 1..max_n {
        let mut next: BTreeMap<IsoKey, Graph> = BTreeMap::new();
        for g in layer.values() {
            for mask in 1u32..1 << n {
                let nbrs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                if nbrs.len() > max_deg || nbrs.iter().any(|&v| g.degree(v) >= max_deg) {
                    continue;
                }
                let mut edges = g.edges().to_vec();
                edges.extend(nbrs.iter().map(|&v| (v, n)));
                let h = Graph::new(n + 1, edges).unwrap();
                next.entry(canonical_form(&h).unwrap()).or_insert(h);
            }
        }
        all.extend(next.values().cloned());
        layer = next;
    }
    all
}

/// Every graph (connected or not) on exactly `n` vertices, one per class.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    let slots = Graph::complete(n).edges().to_vec();
    let mut seen: BTreeMap<IsoKey, Graph> = BTreeMap::new();
    for mask in 0u64..1 << slots.len() {
        let g = Graph::new(n, (0..slots.len()).filter(|e| mask >> e & 1 == 1).map(|e| slots[e])).unwrap();
        seen.entry(canonical_form(&g).unwrap()).or_insert(g);
    }
    seen.into_values().collect()
}

/// Random graph on `n` vertices: shuffled candidate pairs, each kept with
/// probability `p` while both endpoints have degree below `max_deg`.
pub fn random_graph(rng: &mut impl Rng, n: usize, max_deg: usize, p: f64) -> Graph {
    let mut pairs = Graph::complete(n).edges().to_vec();
    pairs.shuffle(rng);
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    for (u, v) in pairs {
        if deg[u] < max_deg && deg[v] < max_deg && rng.random::<f64>() < p {
            deg[u] += 1;
            deg[v] += 1;
            edges.push((u, v));
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_order(rng: &mut impl Rng, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    order
}

/// The 3-cube.
pub fn cube() -> Graph {
    Graph::new(
        8,
        (0..8usize)
            .flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b))))
            .filter(|&(u, v)| u < v),
    )
    .unwrap()
}
