//! Seeded samplers for dynamic stochastic block models and Chung-Lu
//! networks, plus the named benchmark systems.
//!
//! Both samplers visit only the realised edges: Bernoulli trials inside a
//! block (or a run of equal-probability pairs) are skipped geometrically.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::DynamicNetwork;
use crate::seed;
use crate::sparse::CsrMatrix;

/// Dynamic SBM: fixed assignment `tau`, one `K×K` probability matrix per snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct DsbmSpec {
    k: usize,
    tau: Vec<usize>,
    b: Vec<DMatrix<f64>>,
}

impl DsbmSpec {
    pub fn new(k: usize, tau: Vec<usize>, b: Vec<DMatrix<f64>>) -> Result<Self> {
        if k == 0 || tau.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument("DSBM needs K ≥ 1, n ≥ 1 and T ≥ 1".into()));
        }
        if let Some(&c) = tau.iter().find(|&&c| c >= k) {
            return Err(Error::OutOfRange { index: c, limit: k });
        }
        for (t, m) in b.iter().enumerate() {
            if m.shape() != (k, k) {
                return Err(Error::ShapeMismatch { expected: format!("{k}x{k}"), found: format!("{:?}", m.shape()) });
            }
            if m.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidArgument(format!("B^({t}) has an entry outside [0, 1]")));
            }
            if m != &m.transpose() {
                return Err(Error::InvalidArgument(format!("B^({t}) is not symmetric")));
            }
        }
        Ok(Self { k, tau, b })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.tau.len()
    }

    pub fn t(&self) -> usize {
        self.b.len()
    }

    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    pub fn b(&self) -> &[DMatrix<f64>] {
        &self.b
    }
}

/// Chung-Lu: `P_ij^(t) = scale_t · w_i w_j / Σ_k w_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChungLuSpec {
    w: Vec<f64>,
    scale: Vec<f64>,
}

impl ChungLuSpec {
    pub fn new(w: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if w.is_empty() || scale.is_empty() {
            return Err(Error::InvalidArgument("Chung-Lu needs n ≥ 1 and T ≥ 1".into()));
        }
        if w.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::InvalidArgument("Chung-Lu weights must be positive".into()));
        }
        if scale.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
            return Err(Error::InvalidArgument("Chung-Lu scales must lie in (0, 1]".into()));
        }
        let total: f64 = w.iter().sum();
        let mut sorted = w.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let top = if sorted.len() > 1 { sorted[0] * sorted[1] } else { 0.0 };
        let smax = scale.iter().cloned().fold(0.0, f64::max);
        if smax * top / total > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "Chung-Lu edge probability {:.4} exceeds 1",
                smax * top / total
            )));
        }
        Ok(Self { w, scale })
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn t(&self) -> usize {
        self.scale.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }
}

/// Parameters of the Pareto weight law used by the sparse systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    /// Density exponent: `f(w) ∝ w^{-exponent}` for `w ≥ w_min`.
    pub exponent: f64,
    pub w_min: f64,
}

impl Default for PowerLaw {
    fn default() -> Self {
        Self { exponent: 3.0, w_min: 5.0 }
    }
}

/// Draw `n` power-law weights, rescaled so every pair probability is ≤ 1.
pub fn power_law_weights(n: usize, law: PowerLaw, seed: u64) -> Result<Vec<f64>> {
    if law.exponent <= 1.0 || law.w_min <= 0.0 {
        return Err(Error::InvalidArgument("power law needs exponent > 1 and w_min > 0".into()));
    }
    let pareto = Pareto::new(law.w_min, law.exponent - 1.0)
        .map_err(|e| Error::InvalidArgument(format!("power law: {e}")))?;
    let mut rng = seed::rng(seed, &[0x9a7]);
    let mut w: Vec<f64> = (0..n).map(|_| pareto.sample(&mut rng)).collect();
    let total: f64 = w.iter().sum();
    let wmax = w.iter().cloned().fold(0.0, f64::max);
    let c = (total / (wmax * wmax)).min(1.0);
    w.iter_mut().for_each(|x| *x *= c);
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Static,
    Moving,
    Merge,
    StaticPower,
    MovingPower,
    KCommunity,
}

impl PresetName {
    pub const ALL: [PresetName; 6] = [
        PresetName::Static,
        PresetName::Moving,
        PresetName::Merge,
        PresetName::StaticPower,
        PresetName::MovingPower,
        PresetName::KCommunity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Static => "static",
            PresetName::Moving => "moving",
            PresetName::Merge => "merge",
            PresetName::StaticPower => "static-power",
            PresetName::MovingPower => "moving-power",
            PresetName::KCommunity => "k-community",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{s}'")))
    }
}

/// A named benchmark system at a chosen size.
///
/// Snapshots before `change_at()` use the first regime, the rest the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemPreset {
    pub name: PresetName,
    pub n: usize,
    pub t: usize,
    /// Within-community probabilities for `k-community`; its length is K.
    pub p: Vec<f64>,
    pub power_law: PowerLaw,
    /// Seed of the fixed node weights of the power systems.
    pub weight_seed: u64,
}

impl SystemPreset {
    pub fn new(name: PresetName, n: usize, t: usize) -> Self {
        Self { name, n, t, p: vec![0.5; 8], power_law: PowerLaw::default(), weight_seed: 0 }
    }

    pub fn with_p(mut self, p: Vec<f64>) -> Self {
        self.p = p;
        self
    }

    /// First snapshot index of the second regime.
    pub fn change_at(&self) -> usize {
        self.t.div_ceil(2)
    }

    /// Rank of the noise-free unfolded probability matrix.
    pub fn noise_free_rank(&self) -> usize {
        match self.name {
            PresetName::Static | PresetName::Moving | PresetName::Merge => 2,
            PresetName::StaticPower | PresetName::MovingPower => 1,
            PresetName::KCommunity => self.p.len(),
        }
    }
}

/// A sampleable system.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    Dsbm(DsbmSpec),
    ChungLu(ChungLuSpec),
}

impl SystemSpec {
    pub fn sample(&self, seed: u64) -> Result<DynamicNetwork> {
        match self {
            SystemSpec::Dsbm(s) => sample_dsbm(s, seed),
            SystemSpec::ChungLu(s) => sample_chung_lu(s, seed),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SystemSpec::Dsbm(s) => s.n(),
            SystemSpec::ChungLu(s) => s.n(),
        }
    }

    pub fn t(&self) -> usize {
        match self {
            SystemSpec::Dsbm(s) => s.t(),
            SystemSpec::ChungLu(s) => s.t(),
        }
    }

    /// Community assignment; `None` for Chung-Lu systems.
    pub fn communities(&self) -> Option<&[usize]> {
        match self {
            SystemSpec::Dsbm(s) => Some(s.tau()),
            SystemSpec::ChungLu(_) => None,
        }
    }
}

/// Equal split into `k` contiguous communities, remainder to the last.
pub fn equal_communities(n: usize, k: usize) -> Vec<usize> {
    let size = n / k;
    (0..n).map(|i| i.checked_div(size).unwrap_or(i).min(k - 1)).collect()
}

pub fn build_preset(preset: &SystemPreset) -> Result<SystemSpec> {
    let (n, t) = (preset.n, preset.t);
    if n == 0 || t == 0 {
        return Err(Error::InvalidArgument("preset needs n ≥ 1 and T ≥ 1".into()));
    }
    let split = preset.change_at();
    let regimes = |b1: DMatrix<f64>, b2: DMatrix<f64>| -> Vec<DMatrix<f64>> {
        (0..t).map(|s| if s < split { b1.clone() } else { b2.clone() }).collect()
    };
    let two = |v: [f64; 4]| DMatrix::from_row_slice(2, 2, &v);
    let spec = match preset.name {
        PresetName::Static => {
            let b = two([0.5, 0.5, 0.5, 0.4]);
            SystemSpec::Dsbm(DsbmSpec::new(2, equal_communities(n, 2), regimes(b.clone(), b))?)
        }
        PresetName::Moving => SystemSpec::Dsbm(DsbmSpec::new(
            2,
            equal_communities(n, 2),
            regimes(two([0.5, 0.2, 0.2, 0.5]), two([0.5, 0.2, 0.2, 0.53])),
        )?),
        PresetName::Merge => SystemSpec::Dsbm(DsbmSpec::new(
            2,
            equal_communities(n, 2),
            regimes(two([0.9, 0.2, 0.2, 0.1]), two([0.5; 4])),
        )?),
        PresetName::KCommunity => {
            let k = preset.p.len();
            if k < 2 {
                return Err(Error::InvalidArgument("k-community needs at least two communities".into()));
            }
            let b1 = DMatrix::from_fn(k, k, |i, j| if i == j { preset.p[i] } else { 0.2 });
            let mut b2 = b1.clone();
            b2[(1, 1)] += 0.03;
            SystemSpec::Dsbm(DsbmSpec::new(k, equal_communities(n, k), regimes(b1, b2))?)
        }
        PresetName::StaticPower | PresetName::MovingPower => {
            let w = power_law_weights(n, preset.power_law, preset.weight_seed)?;
            let late = if preset.name == PresetName::MovingPower { 0.97 } else { 1.0 };
            let scale = (0..t).map(|s| if s < split { 1.0 } else { late }).collect();
            SystemSpec::ChungLu(ChungLuSpec::new(w, scale)?)
        }
    };
    Ok(spec)
}

/// Geometric skip length for Bernoulli(p) trials: failures before the next success.
#[inline]
fn skip(rng: &mut ChaCha8Rng, log_q: f64) -> u64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / log_q).floor().min(u64::MAX as f64 / 4.0) as u64
}

/// Indices of successful trials among `count` Bernoulli(p) trials.
fn bernoulli_hits(count: u64, p: f64, rng: &mut ChaCha8Rng, mut hit: impl FnMut(u64)) {
    if p <= 0.0 || count == 0 {
        return;
    }
    if p >= 1.0 {
        (0..count).for_each(hit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut idx = skip(rng, log_q);
    while idx < count {
        hit(idx);
        idx = idx.saturating_add(1 + skip(rng, log_q));
    }
}

pub fn sample_dsbm(spec: &DsbmSpec, seed: u64) -> Result<DynamicNetwork> {
    let n = spec.n();
    let mut members = vec![Vec::new(); spec.k];
    for (i, &c) in spec.tau.iter().enumerate() {
        members[c].push(i);
    }
    let mut snapshots = Vec::with_capacity(spec.t());
    for (t, b) in spec.b.iter().enumerate() {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for a in 0..spec.k {
            for c in a..spec.k {
                let mut rng = seed::rng(seed, &[t as u64, a as u64, c as u64]);
                let (ma, mc) = (&members[a], &members[c]);
                if a == c {
                    let m = ma.len() as u64;
                    bernoulli_hits(m * m.saturating_sub(1) / 2, b[(a, a)], &mut rng, |idx| {
                        let (i, j) = triangle_pair(idx);
                        edges.push((ma[i], ma[j]));
                    });
                } else {
                    let width = mc.len() as u64;
                    bernoulli_hits(ma.len() as u64 * width, b[(a, c)], &mut rng, |idx| {
                        edges.push((ma[(idx / width) as usize], mc[(idx % width) as usize]));
                    });
                }
            }
        }
        snapshots.push(binary_snapshot(n, &edges)?);
    }
    DynamicNetwork::new(n, snapshots)
}

/// Pair `(i, j)` with `i > j` at position `idx` of the row-major strict lower triangle.
fn triangle_pair(idx: u64) -> (usize, usize) {
    let mut i = (((8.0 * idx as f64 + 1.0).sqrt() + 1.0) / 2.0).floor() as u64;
    while i * (i - 1) / 2 > idx {
        i -= 1;
    }
    while (i + 1) * i / 2 <= idx {
        i += 1;
    }
    let j = idx - i * (i - 1) / 2;
    (i as usize, j as usize)
}

pub fn sample_chung_lu(spec: &ChungLuSpec, seed: u64) -> Result<DynamicNetwork> {
    let n = spec.n();
    let total: f64 = spec.w.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| spec.w[b].total_cmp(&spec.w[a]).then(a.cmp(&b)));
    let w: Vec<f64> = order.iter().map(|&i| spec.w[i]).collect();
    let mut snapshots = Vec::with_capacity(spec.t());
    for (t, &s) in spec.scale.iter().enumerate() {
        let mut rng = seed::rng(seed, &[t as u64]);
        let mut edges = Vec::new();
        // Weights are non-increasing along each row, so the probability of the
        // current candidate bounds every later one and acts as the skip rate.
        for u in 0..n.saturating_sub(1) {
            let mut v = u + 1;
            let mut p = (s * w[u] * w[v] / total).min(1.0);
            while v < n && p > 0.0 {
                if p < 1.0 {
                    let r: f64 = 1.0 - rng.random::<f64>();
                    v += (r.ln() / (1.0 - p).ln()).floor().min(n as f64) as usize;
                }
                if v < n {
                    let q = (s * w[u] * w[v] / total).min(1.0);
                    if rng.random::<f64>() < q / p {
                        edges.push((order[u], order[v]));
                    }
                    p = q;
                    v += 1;
                }
            }
        }
        snapshots.push(binary_snapshot(n, &edges)?);
    }
    DynamicNetwork::new(n, snapshots)
}

fn binary_snapshot(n: usize, edges: &[(usize, usize)]) -> Result<CsrMatrix> {
    CsrMatrix::from_triplets(n, n, edges.iter().flat_map(|&(i, j)| [(i, j, 1.0), (j, i, 1.0)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_density(net: &DynamicNetwork, tau: &[usize], t: usize, a: usize, c: usize) -> (f64, f64) {
        let mut hits = 0.0;
        for (i, j, _) in net.snapshot(t).triplets() {
            if i < j && ((tau[i] == a && tau[j] == c) || (tau[i] == c && tau[j] == a)) {
                hits += 1.0;
            }
        }
        let na = tau.iter().filter(|&&x| x == a).count() as f64;
        let nc = tau.iter().filter(|&&x| x == c).count() as f64;
        let pairs = if a == c { na * (na - 1.0) / 2.0 } else { na * nc };
        (hits, pairs)
    }

    #[test]
    fn triangle_indexing_is_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for idx in 0..(30 * 29 / 2) {
            let (i, j) = triangle_pair(idx);
            assert!(j < i && i < 30);
            assert!(seen.insert((i, j)));
        }
    }

    #[test]
    fn trivial_probabilities() {
        let tau = equal_communities(7, 2);
        let zero = DsbmSpec::new(2, tau.clone(), vec![DMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(sample_dsbm(&zero, 1).unwrap().edge_count(), 0);
        let one = DsbmSpec::new(2, tau, vec![DMatrix::from_element(2, 2, 1.0)]).unwrap();
        let net = sample_dsbm(&one, 1).unwrap();
        assert_eq!(net.snapshot(0).nnz(), 7 * 6);
        assert!((0..7).all(|i| net.snapshot(0).get(i, i) == 0.0));
    }

    #[test]
    fn moving_preset_densities_within_three_se() {
        let preset = SystemPreset::new(PresetName::Moving, 40, 2);
        let spec = build_preset(&preset).unwrap();
        let tau = spec.communities().unwrap().to_vec();
        let SystemSpec::Dsbm(dsbm) = &spec else { unreachable!() };
        let mut acc = [[[0.0f64; 2]; 3]; 2];
        for rep in 0..500 {
            let net = spec.sample(rep).unwrap();
            for t in 0..2 {
                for (slot, (a, c)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                    let (h, p) = block_density(&net, &tau, t, a, c);
                    acc[t][slot][0] += h;
                    acc[t][slot][1] += p;
                }
            }
        }
        for t in 0..2 {
            for (slot, (a, c)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                let p = dsbm.b()[t][(a, c)];
                let est = acc[t][slot][0] / acc[t][slot][1];
                let se = (p * (1.0 - p) / acc[t][slot][1]).sqrt();
                assert!((est - p).abs() < 3.0 * se, "t={t} block=({a},{c}) est={est} p={p}");
            }
        }
    }

    #[test]
    fn table_matrices() {
        let get = |name| match build_preset(&SystemPreset::new(name, 10, 2)).unwrap() {
            SystemSpec::Dsbm(s) => s,
            _ => unreachable!(),
        };
        let s = get(PresetName::Static);
        assert_eq!(s.b()[0], s.b()[1]);
        assert_eq!(s.b()[0], DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.4]));
        let m = get(PresetName::Merge);
        assert_eq!(m.b()[0], DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.2, 0.1]));
        assert_eq!(m.b()[1], DMatrix::from_element(2, 2, 0.5));
        let k = get(PresetName::KCommunity);
        let diff = &k.b()[1] - &k.b()[0];
        for i in 0..8 {
            for j in 0..8 {
                let want = if (i, j) == (1, 1) { 0.03 } else { 0.0 };
                assert!((diff[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn node_level_presets_switch_halfway() {
        let SystemSpec::Dsbm(s) = build_preset(&SystemPreset::new(PresetName::Moving, 10, 50)).unwrap() else {
            unreachable!()
        };
        assert!((0..25).all(|t| s.b()[t][(1, 1)] == 0.5));
        assert!((25..50).all(|t| s.b()[t][(1, 1)] == 0.53));
    }

    #[test]
    fn chung_lu_constant_weights_is_erdos_renyi() {
        let n = 300;
        let spec = ChungLuSpec::new(vec![30.0; n], vec![1.0]).unwrap();
        let p = 30.0 / n as f64;
        let pairs = (n * (n - 1) / 2) as f64;
        let mut edges = 0.0;
        let reps = 20;
        for r in 0..reps {
            edges += sample_chung_lu(&spec, r).unwrap().edge_count() as f64;
        }
        let trials = pairs * reps as f64;
        let se = (p * (1.0 - p) / trials).sqrt();
        assert!((edges / trials - p).abs() < 3.0 * se);
    }

    #[test]
    fn chung_lu_pair_probabilities() {
        // Small enough to check every pair frequency against w_i w_j / Σw.
        let w = vec![3.0, 2.5, 2.0, 1.0, 0.5];
        let total: f64 = w.iter().sum();
        let spec = ChungLuSpec::new(w.clone(), vec![1.0]).unwrap();
        let reps = 4000;
        let mut counts = DMatrix::<f64>::zeros(5, 5);
        for r in 0..reps {
            for (i, j, _) in sample_chung_lu(&spec, r).unwrap().snapshot(0).triplets() {
                counts[(i, j)] += 1.0;
            }
        }
        for i in 0..5 {
            for j in 0..5 {
                if i == j {
                    assert_eq!(counts[(i, j)], 0.0);
                    continue;
                }
                let p = w[i] * w[j] / total;
                let se = (p * (1.0 - p) / reps as f64).sqrt();
                assert!((counts[(i, j)] / reps as f64 - p).abs() < 4.0 * se, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn scaled_snapshot_has_fewer_edges() {
        let w = power_law_weights(400, PowerLaw::default(), 3).unwrap();
        let spec = ChungLuSpec::new(w, vec![1.0, 0.97]).unwrap();
        let (mut e0, mut e1) = (0.0, 0.0);
        for r in 0..200 {
            let net = sample_chung_lu(&spec, r).unwrap();
            e0 += net.snapshot(0).nnz() as f64;
            e1 += net.snapshot(1).nnz() as f64;
        }
        assert!((e1 / e0 - 0.97).abs() < 0.01, "ratio {}", e1 / e0);
    }

    #[test]
    fn power_law_weights_are_valid() {
        let w = power_law_weights(500, PowerLaw::default(), 1).unwrap();
        assert!(ChungLuSpec::new(w.clone(), vec![1.0]).is_ok());
        assert_eq!(w, power_law_weights(500, PowerLaw::default(), 1).unwrap());
    }

    #[test]
    fn single_node_is_empty() {
        let spec = ChungLuSpec::new(vec![1.0], vec![1.0, 1.0]).unwrap();
        let net = sample_chung_lu(&spec, 0).unwrap();
        assert_eq!(net.edge_count(), 0);
        assert_eq!(net.t(), 2);
    }

    #[test]
    fn invalid_specs() {
        assert!(DsbmSpec::new(2, vec![0, 2], vec![DMatrix::zeros(2, 2)]).is_err());
        assert!(DsbmSpec::new(1, vec![0], vec![DMatrix::from_element(1, 1, 1.5)]).is_err());
        assert!(DsbmSpec::new(2, vec![0, 1], vec![DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.1])]).is_err());
        assert!(ChungLuSpec::new(vec![10.0, 10.0], vec![1.0]).is_err());
        assert!("nope".parse::<PresetName>().is_err());
        assert_eq!("moving-power".parse::<PresetName>().unwrap(), PresetName::MovingPower);
    }

    #[test]
    fn seeds_control_samples() {
        let spec = build_preset(&SystemPreset::new(PresetName::Static, 60, 2)).unwrap();
        assert_eq!(spec.sample(5).unwrap(), spec.sample(5).unwrap());
        assert_ne!(spec.sample(5).unwrap(), spec.sample(6).unwrap());
    }
}
