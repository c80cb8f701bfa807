//! Skip-gram embeddings: node2vec of the dilated unfolded matrix versus
//! separate node2vec runs per snapshot, on the static system. The unfolded
//! version keeps each node's two time points comparable.
//!
//! `cargo run --release --example unfolded_node2vec`

use dynembed::generators::{build_preset, PresetName, SystemPreset};
use dynembed::skipgram::{independent_node2vec, unfolded_node2vec, SkipGramConfig};
use dynembed::DynamicEmbedding;

fn mean_displacement(emb: &DynamicEmbedding) -> f64 {
    let (n, y) = (emb.n(), emb.dynamic());
    (0..n).map(|i| (y.row(i) - y.row(n + i)).norm()).sum::<f64>() / n as f64
}

fn main() -> dynembed::Result<()> {
    let network = build_preset(&SystemPreset::new(PresetName::Static, 200, 2))?.sample(2)?;
    let cfg = SkipGramConfig { d: 2, seed: 9, ..SkipGramConfig::default() };
    let unfolded = unfolded_node2vec(&network, &cfg)?;
    let independent = independent_node2vec(&network, &cfg)?;
    println!("unfolded node2vec: {} dims, mean per-node displacement {:.3}", unfolded.d(), mean_displacement(&unfolded));
    println!("independent node2vec: {} dims, mean per-node displacement {:.3}", independent.d(), mean_displacement(&independent));
    Ok(())
}
