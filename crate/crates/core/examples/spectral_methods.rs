//! Embed the moving system with every spectral method and report how far
//! each community's mean position moves between the two time points.
//! Only community 1 changes; stable methods keep community 0 in place.
//!
//! `cargo run --release --example spectral_methods`

use dynembed::generators::{build_preset, PresetName, SystemPreset};
use dynembed::spectral::{SpectralKind, SpectralMethod};
use nalgebra::DMatrix;

fn community_mean(y: &DMatrix<f64>, rows: std::ops::Range<usize>) -> Vec<f64> {
    let len = rows.len() as f64;
    (0..y.ncols()).map(|j| rows.clone().map(|i| y[(i, j)]).sum::<f64>() / len).collect()
}

fn main() -> dynembed::Result<()> {
    let n = 400;
    let network = build_preset(&SystemPreset::new(PresetName::Moving, n, 2))?.sample(11)?;
    println!("{:<15} {:>12} {:>12}", "method", "shift c0", "shift c1");
    for kind in SpectralKind::ALL {
        let emb = SpectralMethod::new(kind, 2).embed(&network, 0)?;
        let (y1, y2) = (emb.split_dynamic(0)?, emb.split_dynamic(1)?);
        let shift = |rows: std::ops::Range<usize>| {
            let (a, b) = (community_mean(&y1, rows.clone()), community_mean(&y2, rows));
            a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
        };
        println!("{:<15} {:>12.4} {:>12.4}", kind.as_str(), shift(0..n / 2), shift(n / 2..n));
    }
    Ok(())
}
