//! Truncated spectral decompositions of sparse matrices, deterministic sign
//! conventions and orthogonal Procrustes alignment.

mod krylov;
mod procrustes;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::CsrMatrix;

pub use krylov::{Gram, SolverOptions, SymmetricOperator};
pub use procrustes::{procrustes_align, procrustes_rotation};

/// Rank-d singular triplets. `s` is non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// Largest-magnitude eigenpairs, ordered by descending `|λ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedEig {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Eigenvalues at or below this fraction of the largest magnitude are
/// treated as zero. For Gram-based SVD this applies to `σ²`, so singular
/// values below `1e-6·σ₁` are reported as zero.
const NULL_FRACTION: f64 = 1e-12;

pub fn truncated_svd(m: &CsrMatrix, d: usize, seed: u64) -> Result<TruncatedSvd> {
    truncated_svd_with(m, d, seed, &SolverOptions::default())
}

/// Truncated SVD computed from the Gram operator of the smaller side, with
/// the other side recovered as `Mᵀ U Σ⁻¹` (or `M V Σ⁻¹`).
pub fn truncated_svd_with(m: &CsrMatrix, d: usize, seed: u64, opts: &SolverOptions) -> Result<TruncatedSvd> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if d == 0 || d > rows.min(cols) {
        return Err(Error::InvalidArgument(format!("rank {d} outside 1..={} for a {rows}x{cols} matrix", rows.min(cols))));
    }
    let mut rng = seed::rng(seed, &[0x5bd]);
    let wide = rows <= cols;
    let mt = m.transpose();
    let pairs = if wide {
        krylov::largest_magnitude(&Gram(&mt), d, &mut rng, opts)?
    } else {
        krylov::largest_magnitude(&Gram(m), d, &mut rng, opts)?
    };
    let floor = NULL_FRACTION * pairs.values[0];
    let s: Vec<f64> = pairs.values.iter().map(|&t| if t > floor { t.sqrt() } else { 0.0 }).collect();
    let small = pairs.vectors;
    let other = if wide { mt.mul_dense(&small) } else { m.mul_dense(&small) };
    let mut big = DMatrix::zeros(other.nrows(), d);
    for j in 0..d {
        if s[j] > 0.0 {
            big.set_column(j, &(other.column(j) / s[j]));
        }
    }
    let (mut u, mut v) = if wide { (small, big) } else { (big, small) };
    for j in 0..d {
        if flip_for_max_abs(u.column(j).iter()) {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }
    Ok(TruncatedSvd { u, s, v })
}

pub fn truncated_eig_by_magnitude(a: &CsrMatrix, r: usize, seed: u64) -> Result<TruncatedEig> {
    if !a.is_symmetric() {
        return Err(Error::InvalidArgument("eigendecomposition requires a symmetric matrix".into()));
    }
    truncated_eig_operator(a, r, seed, &SolverOptions::default())
}

/// Largest-magnitude eigenpairs of any symmetric operator, with the
/// max-|entry|-positive sign convention.
pub fn truncated_eig_operator(
    op: &dyn SymmetricOperator,
    r: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<TruncatedEig> {
    let mut rng = seed::rng(seed, &[0xe16]);
    let pairs = krylov::largest_magnitude(op, r, &mut rng, opts)?;
    let scale = pairs.values[0].abs();
    let values: Vec<f64> =
        pairs.values.iter().map(|&l| if l.abs() <= NULL_FRACTION * scale { 0.0 } else { l }).collect();
    let mut vectors = pairs.vectors;
    apply_max_abs_sign(&mut vectors);
    Ok(TruncatedEig { values, vectors })
}

/// `U |Λ|^{1/2}` from an eigendecomposition.
pub fn scaled_eigenvectors(eig: &TruncatedEig) -> DMatrix<f64> {
    let mut out = eig.vectors.clone();
    for (j, l) in eig.values.iter().enumerate() {
        out.column_mut(j).scale_mut(l.abs().sqrt());
    }
    out
}

/// `U Σ^{1/2}` and `V Σ^{1/2}`.
pub fn scaled_singular_vectors(svd: &TruncatedSvd) -> (DMatrix<f64>, DMatrix<f64>) {
    let (mut x, mut y) = (svd.u.clone(), svd.v.clone());
    for (j, s) in svd.s.iter().enumerate() {
        x.column_mut(j).scale_mut(s.sqrt());
        y.column_mut(j).scale_mut(s.sqrt());
    }
    (x, y)
}

/// True when the largest-magnitude entry (lowest index on ties) is negative.
fn flip_for_max_abs<'a>(col: impl Iterator<Item = &'a f64>) -> bool {
    let mut best = 0.0f64;
    let mut sign_negative = false;
    for &x in col {
        if x.abs() > best {
            best = x.abs();
            sign_negative = x < 0.0;
        }
    }
    sign_negative
}

/// Flip columns so the largest-magnitude entry is positive.
pub fn apply_max_abs_sign(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        if flip_for_max_abs(m.column(j).iter()) {
            m.column_mut(j).neg_mut();
        }
    }
}

/// Flip columns so each column sum is non-negative.
pub fn apply_positive_sum_sign(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        if m.column(j).sum() < 0.0 {
            m.column_mut(j).neg_mut();
        }
    }
}
