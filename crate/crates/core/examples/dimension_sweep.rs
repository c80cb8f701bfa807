//! Power of the community-level temporal test against embedding dimension
//! on an 8-community system whose second community changes.
//!
//! `cargo run --release --example dimension_sweep -- [replicates]`

use dynembed::experiments::{dimension_sweep, EmbeddingMethod, ExperimentSpec, Level, TestKind};
use dynembed::generators::{PresetName, SystemPreset};
use dynembed::spectral::SpectralKind;

fn main() -> dynembed::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let p: Vec<f64> = (0..8).map(|k| 0.3 + 0.6 * k as f64 / 7.0).collect();
    let preset = SystemPreset::new(PresetName::KCommunity, 400, 2).with_p(p);
    let spec = ExperimentSpec {
        replicates,
        n_sim: 500,
        ..ExperimentSpec::new(preset, EmbeddingMethod::spectral(SpectralKind::Uase, 1), TestKind::Temporal, Level::Community(1))
    };
    let dims: Vec<usize> = (1..=12).collect();
    for r in dimension_sweep(&spec, &dims)? {
        println!("d={:>2} power={:.3} {}", r.d, r.power_at_5pct, "#".repeat((r.power_at_5pct * 40.0).round() as usize));
    }
    Ok(())
}
