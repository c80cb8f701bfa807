//! Paired displacement permutation tests.
//!
//! The statistic is `‖Σ S₁ − Σ S₂‖₂` over two row sets of an embedding. A
//! permutation is a boolean mask over the pooled rows; both sums are
//! accumulated in pooled order so identical row sets give identical values.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::DynamicEmbedding;
use crate::seed;

/// `‖colsum(S₁) − colsum(S₂)‖₂`.
pub fn displacement_statistic(s1: &DMatrix<f64>, s2: &DMatrix<f64>) -> Result<f64> {
    if s1.ncols() != s2.ncols() {
        return Err(Error::ShapeMismatch { expected: format!("{} columns", s1.ncols()), found: format!("{}", s2.ncols()) });
    }
    let diff = s1.row_sum() - s2.row_sum();
    Ok(diff.norm())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalTestSpec {
    pub nodes: Vec<usize>,
    /// First time point of the second window.
    pub tc: usize,
    pub r1: usize,
    pub r2: usize,
    pub n_sim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialTestSpec {
    pub nodes1: Vec<usize>,
    pub nodes2: Vec<usize>,
    /// Time points whose rows enter both sets (usually a single one).
    pub times: Vec<usize>,
    pub n_sim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t_obs: f64,
    /// Observed statistic first, then one per permutation.
    pub permuted_stats: Vec<f64>,
    pub p_hat: f64,
}

fn check_nodes(nodes: &[usize], n: usize, what: &str) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} is empty")));
    }
    if let Some(&i) = nodes.iter().find(|&&i| i >= n) {
        return Err(Error::OutOfRange { index: i, limit: n });
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!("{what} contains repeated nodes")));
    }
    Ok(())
}

impl TemporalTestSpec {
    pub fn validate(&self, emb: &DynamicEmbedding) -> Result<()> {
        check_nodes(&self.nodes, emb.n(), "node set")?;
        if self.r1 == 0 || self.r2 == 0 || self.n_sim == 0 {
            return Err(Error::InvalidArgument("r1, r2 and n_sim must be ≥ 1".into()));
        }
        if self.r1 > self.tc || self.tc + self.r2 > emb.t() {
            return Err(Error::InvalidArgument(format!(
                "windows [{}, {}) and [{}, {}) do not fit in {} time points",
                self.tc as isize - self.r1 as isize,
                self.tc,
                self.tc,
                self.tc + self.r2,
                emb.t()
            )));
        }
        Ok(())
    }
}

impl SpatialTestSpec {
    pub fn validate(&self, emb: &DynamicEmbedding) -> Result<()> {
        check_nodes(&self.nodes1, emb.n(), "first node set")?;
        check_nodes(&self.nodes2, emb.n(), "second node set")?;
        if self.nodes1.iter().any(|i| self.nodes2.contains(i)) {
            return Err(Error::InvalidArgument("spatial node sets overlap".into()));
        }
        check_nodes(&self.times, emb.t(), "time list")?;
        if self.n_sim == 0 {
            return Err(Error::InvalidArgument("n_sim must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Observed statistic, permutation statistics and `p̂ = #{T* ≥ t_obs} / (n_sim + 1)`.
fn finish(t_obs: f64, permuted: Vec<f64>) -> TestResult {
    let mut stats = Vec::with_capacity(permuted.len() + 1);
    stats.push(t_obs);
    stats.extend(permuted);
    let hits = stats.iter().filter(|&&t| t >= t_obs).count();
    TestResult { t_obs, p_hat: hits as f64 / stats.len() as f64, permuted_stats: stats }
}

/// `‖Σ_{mask} r − Σ_{!mask} r‖₂` over `rows`.
fn masked_statistic<'a>(rows: impl Iterator<Item = (&'a [f64], bool)>, d: usize) -> f64 {
    let mut s1 = vec![0.0; d];
    let mut s2 = vec![0.0; d];
    for (r, in_first) in rows {
        let acc = if in_first { &mut s1 } else { &mut s2 };
        acc.iter_mut().zip(r).for_each(|(a, b)| *a += b);
    }
    s1.iter().zip(&s2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Temporal test: each node's rows over `tc−r1 .. tc+r2` are shuffled
/// independently; the first `r1` shuffled positions form `S₁`.
pub fn temporal_test(emb: &DynamicEmbedding, spec: &TemporalTestSpec, seed: u64) -> Result<TestResult> {
    spec.validate(emb)?;
    let (n, d) = (emb.n(), emb.d());
    let w = spec.r1 + spec.r2;
    let start = spec.tc - spec.r1;
    // rows[node][pos] for window position `pos`.
    let rows: Vec<Vec<Vec<f64>>> = spec
        .nodes
        .iter()
        .map(|&i| (0..w).map(|k| emb.dynamic().row(n * (start + k) + i).iter().copied().collect()).collect())
        .collect();
    let stat = |masks: &[Vec<bool>]| {
        let pairs = rows.iter().zip(masks).flat_map(|(node_rows, m)| node_rows.iter().map(Vec::as_slice).zip(m.iter().copied()));
        masked_statistic(pairs, d)
    };
    let base: Vec<bool> = (0..w).map(|k| k < spec.r1).collect();
    let t_obs = stat(&vec![base.clone(); rows.len()]);
    let permuted: Vec<f64> = (0..spec.n_sim)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed, &[b as u64]);
            let masks: Vec<Vec<bool>> = (0..rows.len())
                .map(|_| {
                    let mut m = base.clone();
                    m.shuffle(&mut rng);
                    m
                })
                .collect();
            stat(&masks)
        })
        .collect();
    Ok(finish(t_obs, permuted))
}

/// Spatial test: pooled rows of both sets at the listed times are
/// reassigned uniformly, preserving the set sizes.
pub fn spatial_test(emb: &DynamicEmbedding, spec: &SpatialTestSpec, seed: u64) -> Result<TestResult> {
    spec.validate(emb)?;
    let (n, d) = (emb.n(), emb.d());
    let gather = |nodes: &[usize]| -> Vec<Vec<f64>> {
        spec.times
            .iter()
            .flat_map(|&t| nodes.iter().map(move |&i| emb.dynamic().row(n * t + i).iter().copied().collect::<Vec<f64>>()))
            .collect()
    };
    let mut pooled = gather(&spec.nodes1);
    let first = pooled.len();
    pooled.extend(gather(&spec.nodes2));
    let stat = |mask: &[bool]| masked_statistic(pooled.iter().map(Vec::as_slice).zip(mask.iter().copied()), d);
    let base: Vec<bool> = (0..pooled.len()).map(|k| k < first).collect();
    let t_obs = stat(&base);
    let permuted: Vec<f64> = (0..spec.n_sim)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed, &[b as u64]);
            let mut mask = base.clone();
            mask.shuffle(&mut rng);
            stat(&mask)
        })
        .collect();
    Ok(finish(t_obs, permuted))
}
