//! Node2vec output distribution commutes with node relabelling.

use dynembed::experiments::ks_two_sample;
use dynembed::generators::{build_preset, PresetName, SystemPreset};
use dynembed::skipgram::{node2vec, SkipGramConfig};
use nalgebra::DMatrix;

const SEEDS: u64 = 50;

fn cosine_distance(e: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let (x, y) = (e.row(a), e.row(b));
    1.0 - x.dot(&y) / (x.norm() * y.norm()).max(1e-300)
}

#[test]
fn relabelled_graph_gives_the_same_distance_distribution() {
    let n = 24;
    let net = build_preset(&SystemPreset::new(PresetName::Merge, n, 1)).unwrap().sample(3).unwrap();
    // perm[i] is the new label of node i.
    let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 5) % n).collect();
    let relabelled = net.permute(&perm).unwrap();
    let (a, b) = (0, n - 1);
    let cfg = |seed| SkipGramConfig { d: 4, walks_per_node: 5, walk_length: 20, epochs: 2, seed, ..SkipGramConfig::default() };
    let original: Vec<f64> = (0..SEEDS)
        .map(|s| cosine_distance(&node2vec(net.snapshot(0), &cfg(s)).unwrap(), a, b))
        .collect();
    let permuted: Vec<f64> = (0..SEEDS)
        .map(|s| cosine_distance(&node2vec(relabelled.snapshot(0), &cfg(10_000 + s)).unwrap(), perm[a], perm[b]))
        .collect();
    let ks = ks_two_sample(&original, &permuted);
    assert!(ks.p_value > 0.01, "KS p = {}", ks.p_value);
}
