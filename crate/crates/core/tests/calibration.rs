//! Exact-test calibration under exchangeable rows.

use dynembed::experiments::ks_uniform;
use dynembed::seed;
use dynembed::stability::{spatial_test, temporal_test, SpatialTestSpec, TemporalTestSpec};
use dynembed::DynamicEmbedding;
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

const REPLICATES: u64 = 200;
const N_SIM: usize = 1000;
const KS_LEVEL: f64 = 0.01;

/// Every row i.i.d. standard normal, so any two row-sets are exchangeable.
fn gaussian_embedding(n: usize, t: usize, d: usize, replicate: u64) -> DynamicEmbedding {
    let mut rng = seed::rng(7, &[replicate]);
    let y = DMatrix::from_fn(n * t, d, |_, _| StandardNormal.sample(&mut rng));
    DynamicEmbedding::new(n, t, None, y).unwrap()
}

#[test]
fn temporal_p_values_are_uniform_under_exchangeability() {
    let spec = TemporalTestSpec { nodes: (0..40).collect(), tc: 2, r1: 2, r2: 2, n_sim: N_SIM };
    let p: Vec<f64> = (0..REPLICATES)
        .map(|r| temporal_test(&gaussian_embedding(40, 4, 3, r), &spec, r).unwrap().p_hat)
        .collect();
    let ks = ks_uniform(&p);
    assert!(ks.p_value > KS_LEVEL, "KS p = {}", ks.p_value);
}

#[test]
fn spatial_p_values_are_uniform_under_exchangeability() {
    let spec = SpatialTestSpec { nodes1: (0..25).collect(), nodes2: (25..50).collect(), times: vec![0, 1], n_sim: N_SIM };
    let p: Vec<f64> = (0..REPLICATES)
        .map(|r| spatial_test(&gaussian_embedding(50, 2, 3, 1000 + r), &spec, r).unwrap().p_hat)
        .collect();
    let ks = ks_uniform(&p);
    assert!(ks.p_value > KS_LEVEL, "KS p = {}", ks.p_value);
}

#[test]
fn shifted_rows_are_detected() {
    let spec = TemporalTestSpec { nodes: (0..40).collect(), tc: 1, r1: 1, r2: 1, n_sim: 199 };
    let mut emb = gaussian_embedding(40, 2, 2, 99);
    let mut y = emb.dynamic().clone();
    y.rows_mut(40, 40).add_scalar_mut(1.0);
    emb = DynamicEmbedding::new(40, 2, None, y).unwrap();
    assert!(temporal_test(&emb, &spec, 0).unwrap().p_hat <= 0.01);
}
