//! Sample every benchmark system and summarise it.
//!
//! `cargo run --release --example presets`

use dynembed::generators::{build_preset, PresetName, SystemPreset};

fn main() -> dynembed::Result<()> {
    for name in PresetName::ALL {
        let preset = SystemPreset::new(name, 200, 4);
        let system = build_preset(&preset)?;
        let network = system.sample(1)?;
        let per_snapshot: Vec<usize> = network.snapshots().iter().map(|a| a.nnz() / 2).collect();
        println!(
            "{:<13} n={} T={} change at t={} noise-free rank={} edges per snapshot={:?}",
            name.as_str(),
            network.n(),
            network.t(),
            preset.change_at(),
            preset.noise_free_rank(),
            per_snapshot
        );
    }
    Ok(())
}
