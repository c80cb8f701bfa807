//! node2vec: biased random walks followed by skip-gram with negative sampling.
//!
//! Walk generation is parallel over start nodes; every walk draws from its
//! own stream derived from `(seed, round, start)`, so corpora do not depend on
//! the thread count. Training is single-threaded and deterministic.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{dilate, unfold, DynamicEmbedding, DynamicNetwork};
use crate::seed;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipGramConfig {
    pub d: usize,
    pub walks_per_node: usize,
    /// Nodes per walk, start included.
    pub walk_length: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self {
            d: 2,
            walks_per_node: 10,
            walk_length: 80,
            window: 10,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            p: 1.0,
            q: 1.0,
            seed: 0,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [self.d, self.walks_per_node, self.walk_length, self.window, self.negatives];
        if counts.contains(&0) {
            return Err(Error::InvalidArgument("skip-gram counts must be ≥ 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.p > 0.0 && self.q > 0.0) {
            return Err(Error::InvalidArgument("learning rate, p and q must be positive".into()));
        }
        Ok(())
    }
}

/// Walker's alias table over `weights.len()` outcomes.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Self {
        let k = weights.len();
        let total: f64 = weights.iter().sum();
        let mut prob: Vec<f64> = weights.iter().map(|w| w * k as f64 / total).collect();
        let mut alias = vec![0u32; k];
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..k).partition(|&i| prob[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            alias[s] = l as u32;
            prob[l] -= 1.0 - prob[s];
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
        }
        Self { prob, alias }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

/// Random walks over a graph's node indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<usize>>,
    /// Nodes without neighbours; no walk starts from them.
    pub isolated: Vec<usize>,
}

impl WalkCorpus {
    pub fn token_count(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }
}

/// Per-node alias tables over weighted neighbours, aligned with the CSR rows.
struct NeighbourTables<'a> {
    adj: &'a CsrMatrix,
    tables: Vec<Option<AliasTable>>,
}

impl<'a> NeighbourTables<'a> {
    fn new(adj: &'a CsrMatrix) -> Self {
        let tables = (0..adj.nrows())
            .map(|i| if adj.row_nnz(i) == 0 { None } else { Some(AliasTable::new(adj.row_values(i))) })
            .collect();
        Self { adj, tables }
    }

    fn step(&self, v: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        self.tables[v].as_ref().map(|t| self.adj.row_indices(v)[t.sample(rng)])
    }
}

pub fn generate_walks(adj: &CsrMatrix, cfg: &SkipGramConfig) -> Result<WalkCorpus> {
    cfg.validate()?;
    if adj.nrows() != adj.ncols() || !adj.is_symmetric() || adj.data().iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidArgument("walks need a symmetric non-negative adjacency matrix".into()));
    }
    let tables = NeighbourTables::new(adj);
    let (starts, isolated): (Vec<usize>, Vec<usize>) = (0..adj.nrows()).partition(|&i| adj.row_nnz(i) > 0);
    let (inv_p, inv_q) = (1.0 / cfg.p, 1.0 / cfg.q);
    let f_max = inv_p.max(1.0).max(inv_q);
    let biased = cfg.p != 1.0 || cfg.q != 1.0;

    let mut walks = Vec::with_capacity(starts.len() * cfg.walks_per_node);
    for round in 0..cfg.walks_per_node {
        let mut order = starts.clone();
        order.shuffle(&mut seed::rng(cfg.seed, &[round as u64]));
        let batch: Vec<Vec<usize>> = order
            .par_iter()
            .map(|&start| {
                let mut rng = seed::rng(cfg.seed, &[round as u64, start as u64]);
                let mut walk = Vec::with_capacity(cfg.walk_length);
                walk.push(start);
                while walk.len() < cfg.walk_length {
                    let cur = walk[walk.len() - 1];
                    let next = if !biased || walk.len() == 1 {
                        tables.step(cur, &mut rng)
                    } else {
                        // Rejection sampling against the first-order proposal.
                        let prev = walk[walk.len() - 2];
                        loop {
                            let x = tables.step(cur, &mut rng).expect("walks only visit non-isolated nodes");
                            let f = if x == prev {
                                inv_p
                            } else if adj.contains(prev, x) {
                                1.0
                            } else {
                                inv_q
                            };
                            if rng.random::<f64>() * f_max < f {
                                break Some(x);
                            }
                        }
                    };
                    match next {
                        Some(x) => walk.push(x),
                        None => break,
                    }
                }
                walk
            })
            .collect();
        walks.extend(batch);
    }
    Ok(WalkCorpus { walks, isolated })
}

/// Input (`embedding`) and output (`context`) vectors of a skip-gram model.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsModel {
    pub input: DMatrix<f64>,
    pub output: DMatrix<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl SgnsModel {
    /// Negative-sampling objective per positive pair: `positives` are scored
    /// as true pairs and `negatives` (noise draws, typically k per positive) as noise.
    pub fn loss(&self, positives: &[(usize, usize)], negatives: &[(usize, usize)]) -> f64 {
        let score = |(a, b): (usize, usize)| self.input.row(a).dot(&self.output.row(b));
        let pos: f64 = positives.iter().map(|&pr| -sigmoid(score(pr)).max(1e-300).ln()).sum();
        let neg: f64 = negatives.iter().map(|&pr| -sigmoid(-score(pr)).max(1e-300).ln()).sum();
        (pos + neg) / positives.len().max(1) as f64
    }
}

/// Train skip-gram with negative sampling and return the model.
///
/// Negatives follow the unigram distribution raised to 3/4. The window is
/// shrunk uniformly at random per centre token and the learning rate decays
/// linearly to `1e-4` of its initial value.
pub fn train_sgns_model(corpus: &WalkCorpus, vocab_size: usize, cfg: &SkipGramConfig) -> Result<SgnsModel> {
    cfg.validate()?;
    if corpus.walks.iter().all(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let d = cfg.d;
    let mut counts = vec![0.0f64; vocab_size];
    for &w in corpus.walks.iter().flatten() {
        if w >= vocab_size {
            return Err(Error::OutOfRange { index: w, limit: vocab_size });
        }
        counts[w] += 1.0;
    }
    let noise = AliasTable::new(&counts.iter().map(|c| c.powf(0.75)).collect::<Vec<_>>());

    let mut init_rng = seed::rng(cfg.seed, &[0x1417]);
    let half = 0.5 / d as f64;
    // Row-major storage: row i is the vector of node i.
    let mut input: Vec<f64> = (0..vocab_size * d).map(|_| init_rng.random_range(-half..half)).collect();
    let mut output = vec![0.0f64; vocab_size * d];

    let total = (cfg.epochs * corpus.token_count()).max(1) as f64;
    let mut processed = 0usize;
    let mut grad = vec![0.0f64; d];
    for epoch in 0..cfg.epochs {
        let mut rng = seed::rng(cfg.seed, &[0x5e9, epoch as u64]);
        for walk in &corpus.walks {
            for (i, &centre) in walk.iter().enumerate() {
                let lr = cfg.learning_rate * (1.0 - processed as f64 / total).max(1e-4);
                processed += 1;
                let reach = cfg.window - rng.random_range(0..cfg.window);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(walk.len() - 1);
                for (j, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let vin = centre * d;
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let vout = target * d;
                        let dot: f64 = (0..d).map(|c| input[vin + c] * output[vout + c]).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for c in 0..d {
                            grad[c] += g * output[vout + c];
                            output[vout + c] += g * input[vin + c];
                        }
                    }
                    for c in 0..d {
                        input[vin + c] += grad[c];
                    }
                }
            }
        }
    }
    Ok(SgnsModel {
        input: DMatrix::from_row_slice(vocab_size, d, &input),
        output: DMatrix::from_row_slice(vocab_size, d, &output),
    })
}

/// Input vectors of a trained skip-gram model, one row per node.
pub fn train_sgns(corpus: &WalkCorpus, vocab_size: usize, cfg: &SkipGramConfig) -> Result<DMatrix<f64>> {
    Ok(train_sgns_model(corpus, vocab_size, cfg)?.input)
}

/// Static node2vec of one symmetric adjacency matrix.
pub fn node2vec(adj: &CsrMatrix, cfg: &SkipGramConfig) -> Result<DMatrix<f64>> {
    let corpus = generate_walks(adj, cfg)?;
    train_sgns(&corpus, adj.nrows(), cfg)
}

/// node2vec of the dilated unfolded matrix, trained at `2·cfg.d` dimensions
/// to match the dilated spectral methods.
pub fn unfolded_node2vec(network: &DynamicNetwork, cfg: &SkipGramConfig) -> Result<DynamicEmbedding> {
    let dilated = dilate(&unfold(network));
    let cfg = SkipGramConfig { d: 2 * cfg.d, ..*cfg };
    let stacked = node2vec(dilated.matrix(), &cfg)?;
    DynamicEmbedding::from_stacked(network.n(), network.t(), &stacked)
}

/// Separate node2vec per snapshot, each with seed derived from `(seed, t)`.
pub fn independent_node2vec(network: &DynamicNetwork, cfg: &SkipGramConfig) -> Result<DynamicEmbedding> {
    let n = network.n();
    let mut dynamic = DMatrix::zeros(n * network.t(), cfg.d);
    for (t, a) in network.snapshots().iter().enumerate() {
        let local = SkipGramConfig { seed: seed::derive(cfg.seed, &[t as u64]), ..*cfg };
        dynamic.rows_mut(n * t, n).copy_from(&node2vec(a, &local)?);
    }
    DynamicEmbedding::new(n, network.t(), None, dynamic)
}
