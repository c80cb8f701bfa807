//! Spectral dynamic embeddings.
//!
//! Unfolded methods apply a static embedding to the dilated unfolded matrix
//! and split the rows into anchor and dynamic blocks. Any `StaticEmbedding`
//! that commutes with node relabelling yields a stable dynamic embedding
//! this way. ISE, ISE-Procrustes and OMNI are provided for comparison.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_max_abs_sign, apply_positive_sum_sign, procrustes_align, scaled_eigenvectors, scaled_singular_vectors, truncated_eig_operator,
    truncated_svd, SolverOptions, SymmetricOperator,
};
use crate::network::{dilate, unfold, DynamicEmbedding, DynamicNetwork};
use crate::seed;
use crate::sparse::CsrMatrix;

/// A static embedding of a symmetric matrix: one row per node.
pub trait StaticEmbedding {
    fn embed(&self, a: &CsrMatrix, seed: u64) -> Result<DMatrix<f64>>;
}

/// Adjacency spectral embedding `U |Λ|^{1/2}` over the `d` largest-magnitude eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ase {
    pub d: usize,
}

impl StaticEmbedding for Ase {
    fn embed(&self, a: &CsrMatrix, seed: u64) -> Result<DMatrix<f64>> {
        let eig = truncated_eig_operator(a, self.d, seed, &SolverOptions::default())?;
        Ok(scaled_eigenvectors(&eig))
    }
}

/// Regularised Laplacian embedding: ASE of `D_γ^{-1/2} A D_γ^{-1/2}`, `D_γ = D + γI`.
///
/// `gamma = None` uses the average degree of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rlse {
    pub d: usize,
    pub gamma: Option<f64>,
}

impl StaticEmbedding for Rlse {
    fn embed(&self, a: &CsrMatrix, seed: u64) -> Result<DMatrix<f64>> {
        let normalized = regularized_laplacian(a, self.gamma)?;
        Ase { d: self.d }.embed(&normalized, seed)
    }
}

fn resolve_gamma(gamma: Option<f64>, mean_degree: f64) -> Result<f64> {
    match gamma {
        Some(g) if !(g >= 0.0 && g.is_finite()) => {
            Err(Error::InvalidArgument(format!("gamma must be finite and ≥ 0, got {g}")))
        }
        Some(g) => Ok(g),
        None => Ok(mean_degree),
    }
}

/// `(deg + γ)^{-1/2}`, or 0 where `deg + γ = 0`.
fn degree_scale(degrees: &[f64], gamma: f64) -> Vec<f64> {
    let mut isolated = 0usize;
    let scale = degrees
        .iter()
        .map(|&deg| {
            let dg = deg + gamma;
            if dg > 0.0 {
                dg.powf(-0.5)
            } else {
                isolated += 1;
                0.0
            }
        })
        .collect();
    if isolated > 0 {
        log::warn!("{isolated} zero-degree rows with gamma = 0 embed at the origin");
    }
    scale
}

/// `D_γ^{-1/2} A D_γ^{-1/2}`. Rows with `deg + γ = 0` become zero rows.
pub fn regularized_laplacian(a: &CsrMatrix, gamma: Option<f64>) -> Result<CsrMatrix> {
    let degrees = a.row_sums();
    let gamma = resolve_gamma(gamma, degrees.iter().sum::<f64>() / degrees.len() as f64)?;
    let scale = degree_scale(&degrees, gamma);
    Ok(a.scale(&scale, &scale))
}

/// Apply `f` to the dilated unfolded matrix and split its rows.
pub fn embed_dilated(network: &DynamicNetwork, f: &dyn StaticEmbedding, seed: u64) -> Result<DynamicEmbedding> {
    let dilated = dilate(&unfold(network));
    let stacked = f.embed(dilated.matrix(), seed)?;
    DynamicEmbedding::from_stacked(network.n(), network.t(), &stacked)
}

fn check_d(d: usize, limit: usize) -> Result<()> {
    if d == 0 || d > limit {
        return Err(Error::InvalidArgument(format!("embedding dimension {d} outside 1..={limit}")));
    }
    Ok(())
}

/// Unfolded ASE: `X = U Σ^{1/2}`, `Y = V Σ^{1/2}` from the rank-d SVD of the unfolded matrix.
pub fn uase(network: &DynamicNetwork, d: usize, seed: u64) -> Result<DynamicEmbedding> {
    check_d(d, network.n())?;
    let svd = truncated_svd(unfold(network).matrix(), d, seed)?;
    let (x, y) = scaled_singular_vectors(&svd);
    DynamicEmbedding::new(network.n(), network.t(), Some(x), y)
}

/// Rank-2d ASE of the dilated matrix (`2d` output columns).
pub fn dilated_ase(network: &DynamicNetwork, d: usize, seed: u64) -> Result<DynamicEmbedding> {
    check_d(d, network.n())?;
    embed_dilated(network, &Ase { d: 2 * d }, seed)
}

/// Unfolded regularised Laplacian embedding (`2d` output columns).
///
/// The degree matrix of a dilation is block diagonal, so the regularised
/// Laplacian of the dilated matrix is the dilation of
/// `L = D_rows^{-1/2} 𝒜 D_cols^{-1/2}`. Its top `2d` eigenpairs are
/// `±σ_k` with vectors `(u_k, ±v_k)/√2`, read off a rank-d SVD of `L`.
/// This equals `embed_dilated(network, &Rlse { d: 2d, gamma }, seed)` up to
/// column signs, at the cost of an `n × nT` rather than `(n+nT)`-square solve.
pub fn urlse(network: &DynamicNetwork, d: usize, gamma: Option<f64>, seed: u64) -> Result<DynamicEmbedding> {
    check_d(d, network.n())?;
    let unfolded = unfold(network);
    let m = unfolded.matrix();
    let (rows, cols) = (m.row_sums(), m.col_sums());
    let gamma = resolve_gamma(gamma, 2.0 * m.sum() / (rows.len() + cols.len()) as f64)?;
    let l = m.scale(&degree_scale(&rows, gamma), &degree_scale(&cols, gamma));
    let svd = truncated_svd(&l, d, seed)?;
    let (n, nt) = (m.nrows(), m.ncols());
    let mut stacked = DMatrix::zeros(n + nt, 2 * d);
    for (k, &s) in svd.s.iter().enumerate() {
        let w = (s / 2.0).sqrt();
        for (col, sign) in [(2 * k, 1.0), (2 * k + 1, -1.0)] {
            stacked.view_mut((0, col), (n, 1)).copy_from(&(svd.u.column(k) * w));
            stacked.view_mut((n, col), (nt, 1)).copy_from(&(svd.v.column(k) * (sign * w)));
        }
    }
    apply_max_abs_sign(&mut stacked);
    DynamicEmbedding::from_stacked(network.n(), network.t(), &stacked)
}

fn ise_snapshots(network: &DynamicNetwork, d: usize, seed: u64) -> Result<Vec<DMatrix<f64>>> {
    check_d(d, network.n())?;
    network
        .snapshots()
        .iter()
        .enumerate()
        .map(|(t, a)| {
            let mut y = Ase { d }.embed(a, seed::derive(seed, &[t as u64]))?;
            apply_positive_sum_sign(&mut y);
            Ok(y)
        })
        .collect()
}

fn stack(n: usize, blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d = blocks[0].ncols();
    let mut out = DMatrix::zeros(n * blocks.len(), d);
    for (t, b) in blocks.iter().enumerate() {
        out.rows_mut(n * t, n).copy_from(b);
    }
    out
}

/// Independent per-snapshot ASE with column sums made positive.
pub fn ise(network: &DynamicNetwork, d: usize, seed: u64) -> Result<DynamicEmbedding> {
    let ys = ise_snapshots(network, d, seed)?;
    DynamicEmbedding::new(network.n(), network.t(), None, stack(network.n(), &ys))
}

/// ISE with each time point rotated onto the previous aligned one.
pub fn ise_procrustes(network: &DynamicNetwork, d: usize, seed: u64) -> Result<DynamicEmbedding> {
    let mut ys = ise_snapshots(network, d, seed)?;
    for t in 1..ys.len() {
        ys[t] = procrustes_align(&ys[t - 1], &ys[t])?;
    }
    DynamicEmbedding::new(network.n(), network.t(), None, stack(network.n(), &ys))
}

/// The `nT × nT` omnibus matrix with blocks `(A_s + A_t) / 2`, applied
/// without materialising it: block `s` of `M x` is `(A_s Σ_t x_t + Σ_t A_t x_t) / 2`.
pub struct OmniOperator<'a> {
    snapshots: &'a [CsrMatrix],
    n: usize,
}

impl<'a> OmniOperator<'a> {
    pub fn new(network: &'a DynamicNetwork) -> Self {
        Self { snapshots: network.snapshots(), n: network.n() }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (n, t) = (self.n, self.snapshots.len());
        let mut m = DMatrix::zeros(n * t, n * t);
        for s in 0..t {
            for u in 0..t {
                let block = (self.snapshots[s].to_dense() + self.snapshots[u].to_dense()) * 0.5;
                m.view_mut((n * s, n * u), (n, n)).copy_from(&block);
            }
        }
        m
    }
}

impl SymmetricOperator for OmniOperator<'_> {
    fn dim(&self) -> usize {
        self.n * self.snapshots.len()
    }

    fn apply_block(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let b = x.ncols();
        let mut total_x = DMatrix::zeros(n, b);
        let mut total_ax = DMatrix::zeros(n, b);
        for (t, a) in self.snapshots.iter().enumerate() {
            let xt = x.rows(n * t, n).into_owned();
            total_ax += a.mul_dense(&xt);
            total_x += xt;
        }
        let mut out = DMatrix::zeros(n * self.snapshots.len(), b);
        for (s, a) in self.snapshots.iter().enumerate() {
            let block = (a.mul_dense(&total_x) + &total_ax) * 0.5;
            out.rows_mut(n * s, n).copy_from(&block);
        }
        out
    }
}

/// Omnibus embedding: rank-d `U |Λ|^{1/2}` of the omnibus matrix, split by time.
pub fn omni(network: &DynamicNetwork, d: usize, seed: u64) -> Result<DynamicEmbedding> {
    check_d(d, network.n())?;
    let op = OmniOperator::new(network);
    let eig = truncated_eig_operator(&op, d, seed, &SolverOptions::default())?;
    DynamicEmbedding::new(network.n(), network.t(), None, scaled_eigenvectors(&eig))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralKind {
    Uase,
    Urlse,
    Ise,
    IseProcrustes,
    Omni,
}

impl SpectralKind {
    pub const ALL: [SpectralKind; 5] =
        [SpectralKind::Uase, SpectralKind::Urlse, SpectralKind::Ise, SpectralKind::IseProcrustes, SpectralKind::Omni];

    pub fn as_str(self) -> &'static str {
        match self {
            SpectralKind::Uase => "uase",
            SpectralKind::Urlse => "urlse",
            SpectralKind::Ise => "ise",
            SpectralKind::IseProcrustes => "ise-procrustes",
            SpectralKind::Omni => "omni",
        }
    }
}

impl fmt::Display for SpectralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpectralKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown spectral method '{s}'")))
    }
}

/// A spectral method with its dimension and (URLSE only) regulariser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMethod {
    pub kind: SpectralKind,
    pub d: usize,
    /// `None` selects the average degree of the dilated matrix.
    pub gamma: Option<f64>,
}

impl SpectralMethod {
    pub fn new(kind: SpectralKind, d: usize) -> Self {
        Self { kind, d, gamma: None }
    }

    pub fn embed(&self, network: &DynamicNetwork, seed: u64) -> Result<DynamicEmbedding> {
        match self.kind {
            SpectralKind::Uase => uase(network, self.d, seed),
            SpectralKind::Urlse => urlse(network, self.d, self.gamma, seed),
            SpectralKind::Ise => ise(network, self.d, seed),
            SpectralKind::IseProcrustes => ise_procrustes(network, self.d, seed),
            SpectralKind::Omni => omni(network, self.d, seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{build_preset, PresetName, SystemPreset};

    fn sample(name: PresetName, n: usize, t: usize, seed: u64) -> DynamicNetwork {
        build_preset(&SystemPreset::new(name, n, t)).unwrap().sample(seed).unwrap()
    }

    fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    /// Match each column of `got` to a column of `want` up to sign; returns the worst error.
    fn columns_match_up_to_sign(got: &DMatrix<f64>, want: &DMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..got.ncols() {
            let g = got.column(j);
            let best = (0..want.ncols())
                .flat_map(|k| [(g - want.column(k)).abs().max(), (g + want.column(k)).abs().max()])
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        worst
    }

    #[test]
    fn uase_single_snapshot_is_ase_pair() {
        let net = sample(PresetName::Moving, 30, 1, 2);
        let emb = uase(&net, 2, 1).unwrap();
        // U = V up to column sign for a symmetric input
        assert!(columns_match_up_to_sign(emb.anchor(), emb.dynamic()) < 1e-8);
    }

    #[test]
    fn duplicated_snapshot_gives_identical_time_points() {
        let net = sample(PresetName::Static, 40, 1, 3);
        let twice = DynamicNetwork::new(40, vec![net.snapshot(0).clone(), net.snapshot(0).clone()]).unwrap();
        for emb in [uase(&twice, 2, 5).unwrap(), urlse(&twice, 2, None, 5).unwrap()] {
            assert!(max_abs(&emb.split_dynamic(0).unwrap(), &emb.split_dynamic(1).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn dilated_ase_is_scaled_uase() {
        let net = sample(PresetName::Merge, 24, 3, 4);
        let d = 2;
        let u = uase(&net, d, 1).unwrap();
        let dil = dilated_ase(&net, d, 2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut expected = DMatrix::zeros(24 * 4, 2 * d);
        for j in 0..d {
            for i in 0..24 {
                expected[(i, j)] = r * u.anchor()[(i, j)];
                expected[(i, d + j)] = r * u.anchor()[(i, j)];
            }
            for i in 0..72 {
                expected[(24 + i, j)] = r * u.dynamic()[(i, j)];
                expected[(24 + i, d + j)] = -r * u.dynamic()[(i, j)];
            }
        }
        let mut got = DMatrix::zeros(96, 2 * d);
        got.rows_mut(0, 24).copy_from(dil.anchor());
        got.rows_mut(24, 72).copy_from(dil.dynamic());
        assert!(columns_match_up_to_sign(&got, &expected) < 1e-8);
    }

    #[test]
    fn two_by_two_dilation() {
        let net = DynamicNetwork::from_edges(1, &[vec![(0, 0, 4.0)]]).unwrap();
        let emb = dilated_ase(&net, 1, 1).unwrap();
        let s = 2f64.sqrt();
        for j in 0..2 {
            assert!((emb.anchor()[(0, j)].abs() - s).abs() < 1e-12);
            assert!((emb.dynamic()[(0, j)].abs() - s).abs() < 1e-12);
        }
        assert!(emb.anchor()[(0, 0)] * emb.dynamic()[(0, 0)] * emb.anchor()[(0, 1)] * emb.dynamic()[(0, 1)] < 0.0);
    }

    #[test]
    fn empty_network_has_no_spectrum() {
        let net = DynamicNetwork::from_edges(5, &[vec![], vec![]]).unwrap();
        assert!(matches!(dilated_ase(&net, 1, 1), Err(Error::DegenerateSpectrum)));
    }

    #[test]
    fn laplacian_entries_shrink_with_gamma() {
        let net = sample(PresetName::Moving, 20, 2, 9);
        let a = dilate(&unfold(&net)).into_matrix();
        let mut prev = regularized_laplacian(&a, Some(0.0)).unwrap();
        for g in [0.5, 2.0, 10.0, 100.0] {
            let next = regularized_laplacian(&a, Some(g)).unwrap();
            assert!(next.data().iter().zip(prev.data()).all(|(x, y)| x < y));
            prev = next;
        }
        assert!(regularized_laplacian(&a, Some(-1.0)).is_err());
    }

    #[test]
    fn regular_graph_laplacian_scales_ase() {
        // With T = 1 the dilation of a cycle is itself 2-regular.
        let n = 12;
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        let net = DynamicNetwork::from_edges(n, &[edges]).unwrap();
        let a = dilate(&unfold(&net)).into_matrix();
        let r = 2.0;
        let lap = regularized_laplacian(&a, Some(0.0)).unwrap();
        let dense = a.to_dense() / r;
        assert!((lap.to_dense() - dense).abs().max() < 1e-15);
        // Eigenvalues of the normalised dilation are those of the dilation divided by r.
        let e_a = a.to_dense().symmetric_eigen().eigenvalues;
        let e_l = lap.to_dense().symmetric_eigen().eigenvalues;
        let mut x: Vec<f64> = e_a.iter().map(|v| v / r).collect();
        let mut y: Vec<f64> = e_l.iter().copied().collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn zero_degree_rows_are_finite() {
        let net = DynamicNetwork::from_edges(4, &[vec![(0, 1, 1.0), (1, 2, 1.0)], vec![(0, 1, 1.0)]]).unwrap();
        let emb = urlse(&net, 1, Some(0.0), 1).unwrap();
        assert!(emb.anchor().row(3).iter().all(|&v| v.abs() < 1e-8));
        assert!(emb.dynamic().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ise_identical_snapshots() {
        let net = sample(PresetName::Moving, 40, 1, 1);
        let twice = DynamicNetwork::new(40, vec![net.snapshot(0).clone(), net.snapshot(0).clone()]).unwrap();
        let a = ise(&twice, 2, 3).unwrap();
        assert!(max_abs(&a.split_dynamic(0).unwrap(), &a.split_dynamic(1).unwrap()) < 1e-8);
        let b = ise_procrustes(&twice, 2, 3).unwrap();
        assert!(max_abs(a.dynamic(), b.dynamic()) < 1e-10);
        assert!(!a.has_anchor());
    }

    #[test]
    fn ise_permuted_snapshot() {
        let net = sample(PresetName::Moving, 30, 1, 5);
        let perm: Vec<usize> = (0..30).map(|i| (i * 7 + 2) % 30).collect();
        let permuted = net.permute(&perm).unwrap();
        let both = DynamicNetwork::new(30, vec![net.snapshot(0).clone(), permuted.snapshot(0).clone()]).unwrap();
        let emb = ise(&both, 2, 4).unwrap();
        let (y1, y2) = (emb.split_dynamic(0).unwrap(), emb.split_dynamic(1).unwrap());
        for i in 0..30 {
            for j in 0..2 {
                assert!((y2[(perm[i], j)] - y1[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn procrustes_never_increases_step_distance() {
        let net = sample(PresetName::Moving, 40, 4, 8);
        let raw = ise(&net, 2, 1).unwrap();
        let aligned = ise_procrustes(&net, 2, 1).unwrap();
        for t in 1..4 {
            let d_raw = (raw.split_dynamic(t).unwrap() - aligned.split_dynamic(t - 1).unwrap()).norm();
            let d_al = (aligned.split_dynamic(t).unwrap() - aligned.split_dynamic(t - 1).unwrap()).norm();
            assert!(d_al <= d_raw + 1e-10);
        }
    }

    #[test]
    fn single_time_point_methods_coincide() {
        let net = sample(PresetName::Static, 30, 1, 6);
        let a = ise(&net, 2, 1).unwrap();
        let b = ise_procrustes(&net, 2, 1).unwrap();
        assert_eq!(a, b);
        let o = omni(&net, 2, 1).unwrap();
        let ase = Ase { d: 2 }.embed(net.snapshot(0), 1).unwrap();
        assert!(max_abs(o.dynamic(), &ase) < 1e-8);
    }

    #[test]
    fn omni_operator_matches_dense() {
        let net = sample(PresetName::Merge, 10, 3, 2);
        let op = OmniOperator::new(&net);
        let x = DMatrix::from_fn(30, 3, |i, j| ((i * 3 + j) as f64).sin());
        assert!(max_abs(&op.apply_block(&x), &(op.to_dense() * &x)) < 1e-12);
    }

    #[test]
    fn omni_matches_dense_oracle() {
        let net = sample(PresetName::Moving, 20, 2, 7);
        let emb = omni(&net, 2, 3).unwrap();
        let dense = OmniOperator::new(&net).to_dense().symmetric_eigen();
        let mut order: Vec<usize> = (0..40).collect();
        order.sort_by(|&a, &b| dense.eigenvalues[b].abs().total_cmp(&dense.eigenvalues[a].abs()));
        let mut want = dense.eigenvectors.select_columns(&order[..2]);
        for (j, &k) in order[..2].iter().enumerate() {
            want.column_mut(j).scale_mut(dense.eigenvalues[k].abs().sqrt());
        }
        crate::linalg::apply_max_abs_sign(&mut want);
        assert!(max_abs(emb.dynamic(), &want) < 1e-8);
    }

    #[test]
    fn omni_identical_snapshots() {
        let net = sample(PresetName::Static, 30, 1, 2);
        let three = DynamicNetwork::new(30, vec![net.snapshot(0).clone(); 3]).unwrap();
        let emb = omni(&three, 2, 1).unwrap();
        assert!(max_abs(&emb.split_dynamic(0).unwrap(), &emb.split_dynamic(2).unwrap()) < 1e-8);
    }

    #[test]
    fn method_names_round_trip() {
        for k in SpectralKind::ALL {
            assert_eq!(k.as_str().parse::<SpectralKind>().unwrap(), k);
        }
        assert!(SpectralMethod::new(SpectralKind::Uase, 0).embed(&sample(PresetName::Static, 6, 2, 1), 1).is_err());
    }

    #[test]
    fn urlse_matches_generic_dilated_rlse() {
        let net = sample(PresetName::Moving, 40, 3, 4);
        for gamma in [None, Some(0.0), Some(3.5)] {
            let fast = urlse(&net, 2, gamma, 1).unwrap();
            let generic = embed_dilated(&net, &Rlse { d: 4, gamma }, 1).unwrap();
            let stacked = |e: &DynamicEmbedding| {
                let mut m = DMatrix::zeros(40 * 4, 4);
                m.rows_mut(0, 40).copy_from(e.anchor());
                m.rows_mut(40, 120).copy_from(e.dynamic());
                m
            };
            // ±σ pairs tie in magnitude, so compare up to column order and sign.
            assert!(columns_match_up_to_sign(&stacked(&fast), &stacked(&generic)) < 1e-8);
        }
    }
}
