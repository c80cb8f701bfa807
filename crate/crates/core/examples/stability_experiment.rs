//! Replicated p-value study: sample a system many times, test each
//! embedding, and classify the cumulative p̂ distribution against uniform.
//!
//! `cargo run --release --example stability_experiment -- [preset] [method] [replicates]`

use dynembed::experiments::{empirical_cdf, run_experiment, EmbeddingMethod, ExperimentSpec, Level, TestKind};
use dynembed::generators::{PresetName, SystemPreset};

fn main() -> dynembed::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let preset: PresetName = args.first().map_or(Ok(PresetName::Static), |s| s.parse())?;
    let method: EmbeddingMethod = args.get(1).map_or(Ok(EmbeddingMethod::spectral(dynembed::spectral::SpectralKind::Uase, 2)), |s| s.parse())?;
    let replicates = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let spec = ExperimentSpec {
        replicates,
        ..ExperimentSpec::new(SystemPreset::new(preset, 200, 2), method, TestKind::Temporal, Level::Graph)
    };
    let report = run_experiment(&spec)?;
    println!("{} on {}: {} (KS {:.3}, p {:.3})", report.method, preset, report.ks_decision, report.ks_statistic, report.ks_p_value);
    for level in [0.05, 0.25, 0.5, 0.75] {
        println!("  P(p̂ ≤ {level:.2}) = {:.3}", empirical_cdf(&report.p_values, level));
    }
    println!("  {:.1}s", report.wall_time_secs);
    Ok(())
}
