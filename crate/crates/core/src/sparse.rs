//! Compressed sparse row storage with sorted column indices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    /// Build from `(row, col, value)` triplets. Duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, _) in &entries {
            if i >= nrows || j >= ncols {
                return Err(Error::ShapeMismatch {
                    expected: format!("index within {nrows}x{ncols}"),
                    found: format!("({i}, {j})"),
                });
            }
        }
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));

        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut data: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self { nrows, ncols, indptr, indices, data }.prune_zeros())
    }

    /// Build from raw CSR arrays; validates shape and sorted, unique indices.
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != nrows + 1 || indices.len() != data.len() || indptr[nrows] != data.len() {
            return Err(Error::InvalidArgument("inconsistent CSR arrays".into()));
        }
        for i in 0..nrows {
            if indptr[i] > indptr[i + 1] {
                return Err(Error::InvalidArgument("indptr must be non-decreasing".into()));
            }
            let row = &indices[indptr[i]..indptr[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.last().is_some_and(|&j| j >= ncols) {
                return Err(Error::InvalidArgument(format!("row {i} has unsorted or out-of-range indices")));
            }
        }
        Ok(Self { nrows, ncols, indptr, indices, data })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut indptr = Vec::with_capacity(m.nrows() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows: m.nrows(), ncols: m.ncols(), indptr, indices, data }
    }

    fn prune_zeros(self) -> Self {
        if self.data.iter().all(|&v| v != 0.0) {
            return self;
        }
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        indptr.push(0);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                if v != 0.0 {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Iterate the stored `(col, value)` pairs of row `i`, in column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()].iter().copied().zip(self.data[range].iter().copied())
    }

    pub fn row_indices(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.data[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = self.row_indices(i);
        match cols.binary_search(&j) {
            Ok(k) => self.data[self.indptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row_indices(i).binary_search(&j).is_ok()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row_values(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (&j, &v) in self.indices.iter().zip(&self.data) {
            out[j] += v;
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let slot = next[j];
                indices[slot] = i;
                data[slot] = v;
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, data }
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && *self == self.transpose()
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale(&self, left: &[f64], right: &[f64]) -> Self {
        assert_eq!(left.len(), self.nrows);
        assert_eq!(right.len(), self.ncols);
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.data[k] *= left[i] * right[self.indices[k]];
            }
        }
        out.prune_zeros()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `self * x` for a dense block of column vectors.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.ncols, "mul_dense shape mismatch");
        let b = x.ncols();
        let xr = to_row_major(x);
        let mut yr = vec![0.0; self.nrows * b];
        for i in 0..self.nrows {
            let acc = &mut yr[i * b..(i + 1) * b];
            for (j, v) in self.row(i) {
                let xj = &xr[j * b..(j + 1) * b];
                for (a, &xv) in acc.iter_mut().zip(xj) {
                    *a += v * xv;
                }
            }
        }
        DMatrix::from_row_slice(self.nrows, b, &yr)
    }

    /// `selfᵀ * x` for a dense block of column vectors.
    pub fn tr_mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.nrows, "tr_mul_dense shape mismatch");
        let b = x.ncols();
        let xr = to_row_major(x);
        let mut yr = vec![0.0; self.ncols * b];
        for i in 0..self.nrows {
            let xi = &xr[i * b..(i + 1) * b];
            for (j, v) in self.row(i) {
                let acc = &mut yr[j * b..(j + 1) * b];
                for (a, &xv) in acc.iter_mut().zip(xi) {
                    *a += v * xv;
                }
            }
        }
        DMatrix::from_row_slice(self.ncols, b, &yr)
    }

    /// `selfᵀ * self * x`, computed row by row without materialising the
    /// intermediate product.
    pub fn gram_mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.ncols, "gram_mul_dense shape mismatch");
        let b = x.ncols();
        let xr = to_row_major(x);
        let mut yr = vec![0.0; self.ncols * b];
        let mut tmp = vec![0.0; b];
        for i in 0..self.nrows {
            tmp.iter_mut().for_each(|t| *t = 0.0);
            for (j, v) in self.row(i) {
                for (t, &xv) in tmp.iter_mut().zip(&xr[j * b..(j + 1) * b]) {
                    *t += v * xv;
                }
            }
            for (j, v) in self.row(i) {
                for (y, &t) in yr[j * b..(j + 1) * b].iter_mut().zip(&tmp) {
                    *y += v * t;
                }
            }
        }
        DMatrix::from_row_slice(self.ncols, b, &yr)
    }

    /// Entrywise sum of two matrices of equal shape.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.nrows, self.ncols),
                found: format!("{}x{}", other.nrows, other.ncols),
            });
        }
        Self::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()))
    }
}

fn to_row_major(x: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = x.shape();
    let mut out = vec![0.0; r * c];
    for j in 0..c {
        for (i, &v) in x.column(j).iter().enumerate() {
            out[i * c + j] = v;
        }
    }
    out
}
