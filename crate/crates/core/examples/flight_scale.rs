//! Time UASE at d=50 on a sparse Chung-Lu network the size of a year of
//! monthly airport snapshots: 17,388 nodes, 36 snapshots, about 3M edges.
//!
//! `cargo run --release --example flight_scale`

use std::time::Instant;

use dynembed::generators::{power_law_weights, sample_chung_lu, ChungLuSpec, PowerLaw};
use dynembed::spectral::uase;

/// Power-law weights scaled to `edges` expected edges over `t` snapshots,
/// with the heaviest weights capped so every pair probability stays ≤ 1.
fn weights(n: usize, t: usize, edges: f64) -> dynembed::Result<Vec<f64>> {
    let mut w = power_law_weights(n, PowerLaw { exponent: 3.5, w_min: 5.8 }, 0)?;
    let total: f64 = w.iter().sum();
    let factor = 2.0 * edges / t as f64 / total;
    w.iter_mut().for_each(|x| *x *= factor);
    loop {
        let cap = w.iter().sum::<f64>().sqrt();
        if w.iter().all(|&x| x <= cap) {
            return Ok(w);
        }
        w.iter_mut().for_each(|x| *x = x.min(cap));
    }
}

fn main() -> dynembed::Result<()> {
    let (n, t) = (17_388, 36);
    let spec = ChungLuSpec::new(weights(n, t, 3.0e6)?, vec![1.0; t])?;
    let network = sample_chung_lu(&spec, 1)?;
    println!("sampled {} edges", network.edge_count());
    let start = Instant::now();
    let emb = uase(&network, 50, 0)?;
    println!("UASE d={} in {:.1}s", emb.d(), start.elapsed().as_secs_f64());
    Ok(())
}
