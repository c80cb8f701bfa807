//! Cluster the time points of a seasonal network: three regimes repeat with
//! period 3, and k-means on the temporal dissimilarity matrix recovers them.
//!
//! `cargo run --release --example temporal_clustering`

use dynembed::experiments::{kmeans_time_clusters, temporal_dissimilarity};
use dynembed::generators::{equal_communities, sample_dsbm, DsbmSpec};
use dynembed::spectral::urlse;
use nalgebra::DMatrix;

fn main() -> dynembed::Result<()> {
    let (n, t) = (300, 12);
    let regimes = [
        DMatrix::from_row_slice(2, 2, &[0.30, 0.05, 0.05, 0.30]),
        DMatrix::from_row_slice(2, 2, &[0.15, 0.15, 0.15, 0.15]),
        DMatrix::from_row_slice(2, 2, &[0.40, 0.10, 0.10, 0.05]),
    ];
    let b = (0..t).map(|s| regimes[s % 3].clone()).collect();
    let network = sample_dsbm(&DsbmSpec::new(2, equal_communities(n, 2), b)?, 4)?;
    let emb = urlse(&network, 3, None, 0)?;
    let r = temporal_dissimilarity(&emb, &(0..n).collect::<Vec<_>>())?;
    let labels = kmeans_time_clusters(&r, 3, 0)?;
    println!("time:  {:?}", (0..t).collect::<Vec<_>>());
    println!("label: {labels:?}");
    Ok(())
}
