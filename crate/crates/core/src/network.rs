//! Dynamic networks, their unfolded and dilated matrices, and the anchor /
//! dynamic embedding split.
//!
//! Node identity is positional: node `i` of snapshot `t` is row `i` of
//! `snapshots[t]`. Labels are carried along for display only.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// `T` symmetric, non-negative adjacency snapshots on a shared node set.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicNetwork {
    n: usize,
    snapshots: Vec<CsrMatrix>,
    labels: Option<Vec<String>>,
}

impl DynamicNetwork {
    pub fn new(n: usize, snapshots: Vec<CsrMatrix>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidNetwork("network needs at least one node".into()));
        }
        if snapshots.is_empty() {
            return Err(Error::InvalidNetwork("network needs at least one snapshot".into()));
        }
        for (t, a) in snapshots.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::InvalidNetwork(format!(
                    "snapshot {t} is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if let Some(v) = a.data().iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidNetwork(format!("snapshot {t} has invalid weight {v}")));
            }
            if !a.is_symmetric() {
                return Err(Error::InvalidNetwork(format!("snapshot {t} is not symmetric")));
            }
        }
        Ok(Self { n, snapshots, labels: None })
    }

    /// Build from undirected `(i, j, weight)` edges per snapshot. Each edge is
    /// mirrored; repeated edges accumulate.
    pub fn from_edges(n: usize, edges_per_snapshot: &[Vec<(usize, usize, f64)>]) -> Result<Self> {
        let snapshots = edges_per_snapshot
            .iter()
            .map(|edges| {
                CsrMatrix::from_triplets(
                    n,
                    n,
                    edges.iter().flat_map(|&(i, j, w)| {
                        if i == j {
                            vec![(i, j, w)]
                        } else {
                            vec![(i, j, w), (j, i, w)]
                        }
                    }),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, snapshots)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", self.n),
                found: format!("{}", labels.len()),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.snapshots.len()
    }

    pub fn snapshots(&self) -> &[CsrMatrix] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> &CsrMatrix {
        &self.snapshots[t]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// Number of undirected edges (with multiplicity ignored) summed over snapshots.
    pub fn edge_count(&self) -> usize {
        self.snapshots
            .iter()
            .map(|a| a.triplets().filter(|&(i, j, _)| i <= j).count())
            .sum()
    }

    /// Relabel nodes: node `i` becomes node `perm[i]` in every snapshot.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let snapshots = self
            .snapshots
            .iter()
            .map(|a| CsrMatrix::from_triplets(self.n, self.n, a.triplets().map(|(i, j, v)| (perm[i], perm[j], v))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n, snapshots)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidArgument(format!("permutation has length {}, expected {n}", perm.len())));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Column concatenation of the snapshots, shape `n × nT`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedMatrix {
    n: usize,
    t: usize,
    data: CsrMatrix,
}

impl UnfoldedMatrix {
    pub fn from_matrix(n: usize, t: usize, data: CsrMatrix) -> Result<Self> {
        if data.nrows() != n || data.ncols() != n * t {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{}", n * t),
                found: format!("{}x{}", data.nrows(), data.ncols()),
            });
        }
        Ok(Self { n, t, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.data
    }
}

/// Symmetric dilation `[[0, U], [Uᵀ, 0]]` of an unfolded matrix `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedMatrix {
    n: usize,
    t: usize,
    data: CsrMatrix,
}

impl DilatedMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.n + self.n * self.t
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.data
    }
}

pub fn unfold(network: &DynamicNetwork) -> UnfoldedMatrix {
    let n = network.n();
    let t_count = network.t();
    let nnz: usize = network.snapshots().iter().map(CsrMatrix::nnz).sum();
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(nnz);
    let mut data = Vec::with_capacity(nnz);
    indptr.push(0);
    for i in 0..n {
        for (t, a) in network.snapshots().iter().enumerate() {
            let offset = t * n;
            indices.extend(a.row_indices(i).iter().map(|&j| j + offset));
            data.extend_from_slice(a.row_values(i));
        }
        indptr.push(indices.len());
    }
    let data = CsrMatrix::from_raw(n, n * t_count, indptr, indices, data).expect("unfolded layout is valid CSR");
    UnfoldedMatrix { n, t: t_count, data }
}

pub fn dilate(unfolded: &UnfoldedMatrix) -> DilatedMatrix {
    let n = unfolded.n;
    let m = unfolded.matrix();
    let dim = n + m.ncols();
    let tr = m.transpose();
    let mut indptr = Vec::with_capacity(dim + 1);
    let mut indices = Vec::with_capacity(2 * m.nnz());
    let mut data = Vec::with_capacity(2 * m.nnz());
    indptr.push(0);
    for i in 0..n {
        indices.extend(m.row_indices(i).iter().map(|&j| j + n));
        data.extend_from_slice(m.row_values(i));
        indptr.push(indices.len());
    }
    for r in 0..tr.nrows() {
        indices.extend_from_slice(tr.row_indices(r));
        data.extend_from_slice(tr.row_values(r));
        indptr.push(indices.len());
    }
    let data = CsrMatrix::from_raw(dim, dim, indptr, indices, data).expect("dilated layout is valid CSR");
    DilatedMatrix { n, t: unfolded.t, data }
}

/// Anchor block (`n × d`, or `0 × d` for methods without one) and dynamic
/// block (`nT × d`, row block `t` is time point `t`).
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicEmbedding {
    n: usize,
    t: usize,
    anchor: DMatrix<f64>,
    dynamic: DMatrix<f64>,
}

impl DynamicEmbedding {
    pub fn new(n: usize, t: usize, anchor: Option<DMatrix<f64>>, dynamic: DMatrix<f64>) -> Result<Self> {
        if dynamic.nrows() != n * t {
            return Err(Error::ShapeMismatch {
                expected: format!("{} dynamic rows", n * t),
                found: format!("{}", dynamic.nrows()),
            });
        }
        let d = dynamic.ncols();
        let anchor = anchor.unwrap_or_else(|| DMatrix::zeros(0, d));
        if anchor.nrows() != 0 && (anchor.nrows() != n || anchor.ncols() != d) {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{d} anchor"),
                found: format!("{}x{}", anchor.nrows(), anchor.ncols()),
            });
        }
        if anchor.iter().chain(dynamic.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("embedding has non-finite entries".into()));
        }
        Ok(Self { n, t, anchor, dynamic })
    }

    /// Split a stacked `(n + nT) × d` embedding of a dilated matrix.
    pub fn from_stacked(n: usize, t: usize, stacked: &DMatrix<f64>) -> Result<Self> {
        if stacked.nrows() != n + n * t {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows", n + n * t),
                found: format!("{}", stacked.nrows()),
            });
        }
        let anchor = stacked.rows(0, n).into_owned();
        let dynamic = stacked.rows(n, n * t).into_owned();
        Self::new(n, t, Some(anchor), dynamic)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.dynamic.ncols()
    }

    pub fn has_anchor(&self) -> bool {
        self.anchor.nrows() > 0
    }

    pub fn anchor(&self) -> &DMatrix<f64> {
        &self.anchor
    }

    pub fn dynamic(&self) -> &DMatrix<f64> {
        &self.dynamic
    }

    /// Embedding time point `t`: rows `n·t .. n·(t+1)` of the dynamic block.
    pub fn split_dynamic(&self, t: usize) -> Result<DMatrix<f64>> {
        if t >= self.t {
            return Err(Error::OutOfRange { index: t, limit: self.t });
        }
        Ok(self.dynamic.rows(self.n * t, self.n).into_owned())
    }

    /// Row of node `i` at time `t`, copied out.
    pub fn dynamic_row(&self, t: usize, i: usize) -> Vec<f64> {
        self.dynamic.row(self.n * t + i).iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_snapshot() -> DynamicNetwork {
        DynamicNetwork::from_edges(2, &[vec![(0, 1, 1.0)], vec![]]).unwrap()
    }

    #[test]
    fn rejects_asymmetric_and_negative_snapshots() {
        let asym = CsrMatrix::from_triplets(2, 2, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(DynamicNetwork::new(2, vec![asym]), Err(Error::InvalidNetwork(_))));
        let neg = CsrMatrix::from_triplets(2, 2, [(0, 1, -1.0), (1, 0, -1.0)]).unwrap();
        assert!(DynamicNetwork::new(2, vec![neg]).is_err());
        assert!(DynamicNetwork::new(0, vec![]).is_err());
        assert!(DynamicNetwork::new(2, vec![]).is_err());
        assert!(DynamicNetwork::new(3, vec![CsrMatrix::zeros(2, 2)]).is_err());
    }

    #[test]
    fn unfold_two_snapshots() {
        let u = unfold(&two_snapshot());
        let expected = DMatrix::from_row_slice(2, 4, &[0., 1., 0., 0., 1., 0., 0., 0.]);
        assert_eq!(u.matrix().to_dense(), expected);
    }

    #[test]
    fn unfold_single_snapshot_is_identity() {
        let net = DynamicNetwork::from_edges(3, &[vec![(0, 1, 1.0), (1, 2, 2.0)]]).unwrap();
        assert_eq!(unfold(&net).matrix(), net.snapshot(0));
    }

    #[test]
    fn dilate_scalar() {
        let u = UnfoldedMatrix::from_matrix(1, 1, CsrMatrix::from_triplets(1, 1, [(0, 0, 2.5)]).unwrap()).unwrap();
        let d = dilate(&u).matrix().to_dense();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[0.0, 2.5, 2.5, 0.0]));
    }

    #[test]
    fn dilate_block_placement() {
        let u = unfold(&two_snapshot());
        let d = dilate(&u);
        let dense = d.matrix().to_dense();
        assert_eq!(dense.shape(), (6, 6));
        assert_eq!(dense[(0, 3)], 1.0);
        assert_eq!(dense[(3, 0)], 1.0);
        assert_eq!(dense[(1, 2)], 1.0);
        assert!(dense.view((0, 0), (2, 2)).iter().all(|&v| v == 0.0));
        assert!(dense.view((2, 2), (4, 4)).iter().all(|&v| v == 0.0));
        assert_eq!(d.matrix().nnz(), 2 * u.matrix().nnz());
        assert!(d.matrix().is_symmetric());
    }

    #[test]
    fn split_dynamic_bookkeeping() {
        let n = 3;
        let t = 4;
        let dynamic = DMatrix::from_fn(n * t, 2, |r, c| (r * 10 + c) as f64);
        let emb = DynamicEmbedding::new(n, t, None, dynamic.clone()).unwrap();
        assert!(!emb.has_anchor());
        for s in 0..t {
            let slice = emb.split_dynamic(s).unwrap();
            assert_eq!(slice, dynamic.rows(n * s, n).into_owned());
            assert_eq!(slice[(0, 0)], (n * s * 10) as f64);
        }
        assert!(matches!(emb.split_dynamic(t), Err(Error::OutOfRange { .. })));
        let one = DynamicEmbedding::new(n, 1, None, dynamic.rows(0, n).into_owned()).unwrap();
        assert_eq!(one.split_dynamic(0).unwrap(), *one.dynamic());
    }

    #[test]
    fn dynamic_row_view() {
        let dynamic = DMatrix::from_fn(4, 3, |r, c| (r * 10 + c) as f64);
        let emb = DynamicEmbedding::new(2, 2, None, dynamic).unwrap();
        assert_eq!(emb.dynamic_row(1, 0), vec![20.0, 21.0, 22.0]);
    }

    #[test]
    fn permute_relabels_edges() {
        let net = DynamicNetwork::from_edges(3, &[vec![(0, 1, 1.0)]]).unwrap();
        let p = net.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.snapshot(0).get(2, 0), 1.0);
        assert!(net.permute(&[0, 0, 1]).is_err());
    }
}
