//! Temporal and spatial paired displacement tests on one URLSE embedding of
//! the moving system: community 1 moves, community 0 does not, and the two
//! communities differ at every time point.
//!
//! `cargo run --release --example paired_displacement_test`

use dynembed::generators::{build_preset, PresetName, SystemPreset};
use dynembed::spectral::urlse;
use dynembed::stability::{spatial_test, temporal_test, SpatialTestSpec, TemporalTestSpec};

fn main() -> dynembed::Result<()> {
    let n = 400;
    let network = build_preset(&SystemPreset::new(PresetName::Moving, n, 2))?.sample(5)?;
    let emb = urlse(&network, 2, None, 0)?;
    let c0: Vec<usize> = (0..n / 2).collect();
    let c1: Vec<usize> = (n / 2..n).collect();
    for (name, nodes) in [("community 0", &c0), ("community 1", &c1)] {
        let spec = TemporalTestSpec { nodes: nodes.clone(), tc: 1, r1: 1, r2: 1, n_sim: 1000 };
        let r = temporal_test(&emb, &spec, 1)?;
        println!("temporal {name}: t_obs={:.4} p̂={:.4}", r.t_obs, r.p_hat);
    }
    let spec = SpatialTestSpec { nodes1: c0, nodes2: c1, times: vec![0], n_sim: 1000 };
    let r = spatial_test(&emb, &spec, 1)?;
    println!("spatial c0 vs c1 at t=0: t_obs={:.4} p̂={:.4}", r.t_obs, r.p_hat);
    Ok(())
}
