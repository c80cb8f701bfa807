//! Replicated p-value studies, dimension sweeps and temporal clustering.

mod kmeans;
mod ks;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans, KMeansResult};
pub use ks::{kolmogorov_q, ks_two_sample, ks_uniform, KsResult};

use crate::error::{Error, Result};
use crate::generators::{build_preset, SystemPreset};
use crate::network::{DynamicEmbedding, DynamicNetwork};
use crate::seed;
use crate::skipgram::{independent_node2vec, unfolded_node2vec, SkipGramConfig};
use crate::spectral::{SpectralKind, SpectralMethod};
use crate::stability::{spatial_test, temporal_test, SpatialTestSpec, TemporalTestSpec};

/// Significance level of the uniformity decision and of the reported power.
pub const ALPHA: f64 = 0.05;

/// Restarts used by [`kmeans_time_clusters`].
pub const KMEANS_RESTARTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsDecision {
    Uniform,
    /// Too many small p-values: false positives.
    SuperUniform,
    /// Too few small p-values: a conservative test.
    SubUniform,
}

impl KsDecision {
    pub fn as_str(self) -> &'static str {
        match self {
            KsDecision::Uniform => "uniform",
            KsDecision::SuperUniform => "super-uniform",
            KsDecision::SubUniform => "sub-uniform",
        }
    }
}

impl fmt::Display for KsDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fraction of `p_values` at or below `level`.
pub fn empirical_cdf(p_values: &[f64], level: f64) -> f64 {
    if p_values.is_empty() {
        return 0.0;
    }
    p_values.iter().filter(|&&p| p <= level).count() as f64 / p_values.len() as f64
}

/// Uniform unless KS rejects at `ALPHA`; a rejection is split by the ECDF at `ALPHA`.
pub fn uniformity_decision(p_values: &[f64]) -> (KsResult, KsDecision) {
    let ks = ks_uniform(p_values);
    let decision = if ks.p_value >= ALPHA {
        KsDecision::Uniform
    } else if empirical_cdf(p_values, ALPHA) > ALPHA {
        KsDecision::SuperUniform
    } else {
        KsDecision::SubUniform
    };
    (ks, decision)
}

/// An embedding method with its full configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum EmbeddingMethod {
    Spectral(SpectralMethod),
    UnfoldedNode2vec(SkipGramConfig),
    IndependentNode2vec(SkipGramConfig),
}

impl EmbeddingMethod {
    pub fn spectral(kind: SpectralKind, d: usize) -> Self {
        EmbeddingMethod::Spectral(SpectralMethod::new(kind, d))
    }

    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingMethod::Spectral(m) => m.kind.as_str(),
            EmbeddingMethod::UnfoldedNode2vec(_) => "unfolded-node2vec",
            EmbeddingMethod::IndependentNode2vec(_) => "independent-node2vec",
        }
    }

    pub fn d(&self) -> usize {
        match self {
            EmbeddingMethod::Spectral(m) => m.d,
            EmbeddingMethod::UnfoldedNode2vec(c) | EmbeddingMethod::IndependentNode2vec(c) => c.d,
        }
    }

    pub fn with_d(mut self, d: usize) -> Self {
        match &mut self {
            EmbeddingMethod::Spectral(m) => m.d = d,
            EmbeddingMethod::UnfoldedNode2vec(c) | EmbeddingMethod::IndependentNode2vec(c) => c.d = d,
        }
        self
    }

    /// Embeds `network`; skip-gram methods take `seed` in place of their configured one.
    pub fn embed(&self, network: &DynamicNetwork, seed: u64) -> Result<DynamicEmbedding> {
        match self {
            EmbeddingMethod::Spectral(m) => m.embed(network, seed),
            EmbeddingMethod::UnfoldedNode2vec(c) => unfolded_node2vec(network, &SkipGramConfig { seed, ..*c }),
            EmbeddingMethod::IndependentNode2vec(c) => independent_node2vec(network, &SkipGramConfig { seed, ..*c }),
        }
    }
}

impl FromStr for EmbeddingMethod {
    type Err = Error;

    /// Parses a method name at the default dimension 2.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unfolded-node2vec" => Ok(EmbeddingMethod::UnfoldedNode2vec(SkipGramConfig::default())),
            "independent-node2vec" => Ok(EmbeddingMethod::IndependentNode2vec(SkipGramConfig::default())),
            other => Ok(EmbeddingMethod::spectral(other.parse()?, 2)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    Temporal,
    Spatial,
}

/// Granularity of the tested node sets.
///
/// Temporal tests compare the windows before and after the preset's change
/// point. Spatial tests compare community `c` with community `c + 1 (mod K)`
/// at the last time point, or node `i` with the first node of the next
/// community over every time point from the change point on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Graph,
    Community(usize),
    Node(usize),
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Graph => f.write_str("graph"),
            Level::Community(c) => write!(f, "community:{c}"),
            Level::Node(i) => write!(f, "node:{i}"),
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    /// `graph`, `community[:c]` or `node[:i]`; the index defaults to 0.
    fn from_str(s: &str) -> Result<Self> {
        let (head, idx) = match s.split_once(':') {
            Some((h, i)) => {
                let i = i.parse().map_err(|_| Error::InvalidArgument(format!("bad level index in '{s}'")))?;
                (h, i)
            }
            None => (s, 0),
        };
        match head {
            "graph" => Ok(Level::Graph),
            "community" => Ok(Level::Community(idx)),
            "node" => Ok(Level::Node(idx)),
            _ => Err(Error::InvalidArgument(format!("unknown level '{s}'"))),
        }
    }
}

/// Either test spec, instantiated for one system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestSpec {
    Temporal(TemporalTestSpec),
    Spatial(SpatialTestSpec),
}

impl TestSpec {
    pub fn run(&self, emb: &DynamicEmbedding, seed: u64) -> Result<f64> {
        let result = match self {
            TestSpec::Temporal(s) => temporal_test(emb, s, seed)?,
            TestSpec::Spatial(s) => spatial_test(emb, s, seed)?,
        };
        Ok(result.p_hat)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub preset: SystemPreset,
    pub method: EmbeddingMethod,
    pub test: TestKind,
    pub level: Level,
    pub replicates: usize,
    pub n_sim: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    /// Defaults of 200 replicates, `n_sim = 1000` and seed 0.
    pub fn new(preset: SystemPreset, method: EmbeddingMethod, test: TestKind, level: Level) -> Self {
        Self { preset, method, test, level, replicates: 200, n_sim: 1000, master_seed: 0 }
    }

    /// Concrete node sets and windows for this system.
    pub fn test_spec(&self) -> Result<TestSpec> {
        let (n, t) = (self.preset.n, self.preset.t);
        let system = build_preset(&self.preset)?;
        let tau = system.communities().map(<[usize]>::to_vec).unwrap_or_else(|| vec![0; n]);
        let k = tau.iter().max().map_or(0, |m| m + 1);
        let community = |c: usize| -> Result<Vec<usize>> {
            if c >= k {
                return Err(Error::OutOfRange { index: c, limit: k });
            }
            Ok((0..n).filter(|&i| tau[i] == c).collect())
        };
        let check_node = |i: usize| if i < n { Ok(i) } else { Err(Error::OutOfRange { index: i, limit: n }) };
        let tc = self.preset.change_at();
        match self.test {
            TestKind::Temporal => {
                let nodes = match self.level {
                    Level::Graph => (0..n).collect(),
                    Level::Community(c) => community(c)?,
                    Level::Node(i) => vec![check_node(i)?],
                };
                Ok(TestSpec::Temporal(TemporalTestSpec { nodes, tc, r1: tc, r2: t - tc, n_sim: self.n_sim }))
            }
            TestKind::Spatial => {
                if k < 2 {
                    return Err(Error::InvalidArgument("spatial tests need at least two communities".into()));
                }
                let (nodes1, nodes2, times) = match self.level {
                    Level::Graph => {
                        return Err(Error::InvalidArgument("spatial tests need community or node level".into()))
                    }
                    Level::Community(c) => (community(c)?, community((c + 1) % k)?, vec![t - 1]),
                    Level::Node(i) => {
                        let other = community((tau[check_node(i)?] + 1) % k)?[0];
                        (vec![i], vec![other], (tc.min(t - 1)..t).collect())
                    }
                };
                Ok(TestSpec::Spatial(SpatialTestSpec { nodes1, nodes2, times, n_sim: self.n_sim }))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 || self.n_sim == 0 {
            return Err(Error::InvalidArgument("replicates and n_sim must be ≥ 1".into()));
        }
        if self.method.d() == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be ≥ 1".into()));
        }
        self.test_spec().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub method: String,
    pub d: usize,
    /// One p̂ per replicate, in replicate order.
    pub p_values: Vec<f64>,
    /// Ascending copy of `p_values`, ready for cumulative plots.
    pub sorted_p_values: Vec<f64>,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub ks_decision: KsDecision,
    pub power_at_5pct: f64,
    /// The only field not reproducible across runs.
    pub wall_time_secs: f64,
}

/// Replicate `r` samples with seed `(master, r, 0)`, embeds with `(master, r, 1)`
/// and tests with `(master, r, 2)`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let start = Instant::now();
    spec.validate()?;
    let system = build_preset(&spec.preset)?;
    let test = spec.test_spec()?;
    let master = spec.master_seed;
    let outcomes: Vec<Result<f64>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let r = r as u64;
            let network = system.sample(seed::derive(master, &[r, 0]))?;
            let emb = spec.method.embed(&network, seed::derive(master, &[r, 1]))?;
            test.run(&emb, seed::derive(master, &[r, 2]))
        })
        .collect();
    let mut p_values = Vec::with_capacity(outcomes.len());
    for (index, outcome) in outcomes.into_iter().enumerate() {
        p_values.push(outcome.map_err(|e| Error::Replicate { index, source: Box::new(e) })?);
    }
    let mut sorted = p_values.clone();
    sorted.sort_by(f64::total_cmp);
    let (ks, decision) = uniformity_decision(&sorted);
    Ok(ExperimentReport {
        spec: spec.clone(),
        method: spec.method.name().to_string(),
        d: spec.method.d(),
        power_at_5pct: empirical_cdf(&p_values, ALPHA),
        p_values,
        sorted_p_values: sorted,
        ks_statistic: ks.statistic,
        ks_p_value: ks.p_value,
        ks_decision: decision,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// One report per dimension, all on the same replicate seeds.
pub fn dimension_sweep(spec: &ExperimentSpec, dims: &[usize]) -> Result<Vec<ExperimentReport>> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("dimension list is empty".into()));
    }
    dims.iter()
        .map(|&d| run_experiment(&ExperimentSpec { method: spec.method.with_d(d), ..spec.clone() }))
        .collect()
}

/// `T × T` matrix of displacement statistics between time slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    pub r: DMatrix<f64>,
}

impl DissimilarityMatrix {
    pub fn t(&self) -> usize {
        self.r.nrows()
    }
}

/// `R_ij = ‖Σ_{v∈N} Y^(i)_v − Σ_{v∈N} Y^(j)_v‖`.
pub fn temporal_dissimilarity(emb: &DynamicEmbedding, nodes: &[usize]) -> Result<DissimilarityMatrix> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("node set is empty".into()));
    }
    if let Some(&bad) = nodes.iter().find(|&&v| v >= emb.n()) {
        return Err(Error::OutOfRange { index: bad, limit: emb.n() });
    }
    let (n, t, d) = (emb.n(), emb.t(), emb.d());
    let y = emb.dynamic();
    let sums: Vec<Vec<f64>> = (0..t)
        .map(|s| {
            let mut acc = vec![0.0; d];
            for &v in nodes {
                acc.iter_mut().zip(y.row(s * n + v).iter()).for_each(|(a, b)| *a += b);
            }
            acc
        })
        .collect();
    // Squared differences are sign-symmetric, so R is symmetric bit for bit.
    let r = DMatrix::from_fn(t, t, |i, j| {
        sums[i].iter().zip(&sums[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    });
    Ok(DissimilarityMatrix { r })
}

/// k-means on the rows of `R` (k-means++ seeding, 100 restarts).
pub fn kmeans_time_clusters(r: &DissimilarityMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    Ok(kmeans(&r.r, k, KMEANS_RESTARTS, seed)?.labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::PresetName;
    use crate::stability::displacement_statistic;
    use rand::Rng;

    fn small(name: PresetName, method: EmbeddingMethod, test: TestKind, level: Level) -> ExperimentSpec {
        ExperimentSpec {
            replicates: 12,
            n_sim: 99,
            master_seed: 5,
            ..ExperimentSpec::new(SystemPreset::new(name, 40, 2), method, test, level)
        }
    }

    fn random_embedding(n: usize, t: usize, d: usize, seed: u64) -> DynamicEmbedding {
        let mut rng = seed::rng(seed, &[]);
        let y = DMatrix::from_fn(n * t, d, |_, _| rng.random::<f64>() - 0.5);
        DynamicEmbedding::new(n, t, None, y).unwrap()
    }

    #[test]
    fn decision_rule() {
        let grid: Vec<f64> = (1..=200).map(|i| i as f64 / 200.0).collect();
        assert_eq!(uniformity_decision(&grid).1, KsDecision::Uniform);
        assert_eq!(uniformity_decision(&vec![0.001; 200]).1, KsDecision::SuperUniform);
        assert_eq!(uniformity_decision(&vec![0.9; 200]).1, KsDecision::SubUniform);
    }

    #[test]
    fn report_fields_are_consistent_and_reproducible() {
        let spec = small(PresetName::Static, EmbeddingMethod::spectral(SpectralKind::Uase, 2), TestKind::Temporal, Level::Graph);
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a.p_values, b.p_values);
        assert_eq!(a.p_values.len(), 12);
        assert!(a.p_values.iter().all(|&p| p > 0.0 && p <= 1.0));
        assert_eq!(a.power_at_5pct, empirical_cdf(&a.p_values, 0.05));
        assert!(a.sorted_p_values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn moving_community_is_detected() {
        let spec = small(PresetName::Moving, EmbeddingMethod::spectral(SpectralKind::Uase, 2), TestKind::Temporal, Level::Community(1));
        let spec = ExperimentSpec { preset: SystemPreset::new(PresetName::Moving, 200, 2), ..spec };
        assert!(run_experiment(&spec).unwrap().power_at_5pct > 0.5);
    }

    #[test]
    fn test_spec_templates() {
        let m = EmbeddingMethod::spectral(SpectralKind::Uase, 2);
        let mut spec = small(PresetName::Merge, m, TestKind::Spatial, Level::Community(0));
        spec.preset.t = 50;
        let TestSpec::Spatial(s) = spec.test_spec().unwrap() else { panic!() };
        assert_eq!((s.nodes1.len(), s.nodes2[0], s.times.clone()), (20, 20, vec![49]));
        spec.level = Level::Node(0);
        let TestSpec::Spatial(s) = spec.test_spec().unwrap() else { panic!() };
        assert_eq!((s.nodes1, s.nodes2, s.times.len()), (vec![0], vec![20], 25));
        spec.test = TestKind::Temporal;
        let TestSpec::Temporal(s) = spec.test_spec().unwrap() else { panic!() };
        assert_eq!((s.tc, s.r1, s.r2), (25, 25, 25));
        spec.level = Level::Graph;
        spec.test = TestKind::Spatial;
        assert!(spec.validate().is_err());
        spec.preset.name = PresetName::StaticPower;
        spec.level = Level::Community(0);
        assert!(spec.validate().is_err());
        spec.test = TestKind::Temporal;
        spec.level = Level::Node(40);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn replicate_errors_carry_the_index() {
        let mut spec = small(PresetName::Static, EmbeddingMethod::spectral(SpectralKind::Uase, 500), TestKind::Temporal, Level::Graph);
        spec.replicates = 3;
        match run_experiment(&spec) {
            Err(Error::Replicate { index: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sweep_reports_each_dimension() {
        let spec = small(PresetName::Static, EmbeddingMethod::spectral(SpectralKind::Urlse, 2), TestKind::Temporal, Level::Graph);
        let reports = dimension_sweep(&spec, &[1, 3]).unwrap();
        assert_eq!(reports.iter().map(|r| r.d).collect::<Vec<_>>(), vec![1, 3]);
        assert!(dimension_sweep(&spec, &[]).is_err());
    }

    #[test]
    fn method_parsing_and_serde() {
        let m: EmbeddingMethod = "ise-procrustes".parse().unwrap();
        assert_eq!((m.name(), m.d()), ("ise-procrustes", 2));
        let m: EmbeddingMethod = "unfolded-node2vec".parse().unwrap();
        let json = serde_json::to_string(&m.with_d(7)).unwrap();
        assert_eq!(serde_json::from_str::<EmbeddingMethod>(&json).unwrap().d(), 7);
        assert!("pca".parse::<EmbeddingMethod>().is_err());
        assert_eq!("community:3".parse::<Level>().unwrap(), Level::Community(3));
        assert_eq!("node".parse::<Level>().unwrap(), Level::Node(0));
        assert!("vertex".parse::<Level>().is_err());
    }

    #[test]
    fn dissimilarity_matches_brute_force() {
        let emb = random_embedding(7, 5, 3, 11);
        let nodes = [0, 2, 3, 6];
        let r = temporal_dissimilarity(&emb, &nodes).unwrap();
        for i in 0..5 {
            assert_eq!(r.r[(i, i)], 0.0);
            for j in 0..5 {
                assert_eq!(r.r[(i, j)], r.r[(j, i)]);
                let si = emb.split_dynamic(i).unwrap().select_rows(&nodes);
                let sj = emb.split_dynamic(j).unwrap().select_rows(&nodes);
                assert!((r.r[(i, j)] - displacement_statistic(&si, &sj).unwrap()).abs() < 1e-12);
            }
        }
        assert!(temporal_dissimilarity(&emb, &[7]).is_err());
    }

    #[test]
    fn constant_embedding_has_zero_dissimilarity() {
        let y = DMatrix::from_fn(12, 2, |i, j| ((i % 4) * 3 + j) as f64 * 0.7);
        let emb = DynamicEmbedding::new(4, 3, None, y).unwrap();
        assert!(temporal_dissimilarity(&emb, &[0, 1, 2, 3]).unwrap().r.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn planted_regimes_are_clustered() {
        // Times 0..3 and 6..9 share one regime, 3..6 another.
        let (n, t) = (5, 9);
        let mut rng = seed::rng(2, &[]);
        let y = DMatrix::from_fn(n * t, 2, |row, j| {
            let regime = if (3..6).contains(&(row / n)) { 4.0 } else { 0.0 };
            regime * (j as f64 + 1.0) + 0.05 * rng.random::<f64>()
        });
        let emb = DynamicEmbedding::new(n, t, None, y).unwrap();
        let r = temporal_dissimilarity(&emb, &(0..n).collect::<Vec<_>>()).unwrap();
        assert_eq!(kmeans_time_clusters(&r, 2, 0).unwrap(), vec![0, 0, 0, 1, 1, 1, 0, 0, 0]);
        assert_eq!(kmeans_time_clusters(&r, 1, 0).unwrap(), vec![0; 9]);
        assert!(kmeans_time_clusters(&r, 10, 0).is_err());
    }
}
