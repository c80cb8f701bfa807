//! Write a sampled network as a temporal edge list, read it back, embed it
//! and store the embedding as CSV and JSON.
//!
//! `cargo run --release --example edge_list_roundtrip`

use dynembed::generators::{build_preset, PresetName, SystemPreset};
use dynembed::io::{load_edge_list, read_embedding, write_edge_list, write_embedding, Delimiter, EmbeddingFormat};
use dynembed::spectral::uase;

fn main() -> dynembed::Result<()> {
    let dir = std::env::temp_dir().join("dynembed-roundtrip");
    std::fs::create_dir_all(&dir)?;
    let network = build_preset(&SystemPreset::new(PresetName::Merge, 50, 3))?.sample(8)?;
    let tel = dir.join("merge.tel");
    write_edge_list(&network, &tel)?;
    let back = load_edge_list(&tel, Delimiter::Auto)?;
    println!("{}: n={} T={} edges={} (original {})", tel.display(), back.n(), back.t(), back.edge_count(), network.edge_count());
    let emb = uase(&back, 2, 0)?;
    for (name, format) in [("emb.csv", EmbeddingFormat::Csv), ("emb.json", EmbeddingFormat::Json)] {
        let path = dir.join(name);
        write_embedding(&emb, &path, format)?;
        let same = read_embedding(&path)?.dynamic() == emb.dynamic();
        println!("{}: lossless={same}", path.display());
    }
    Ok(())
}
