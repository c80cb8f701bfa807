//! Restarted randomized block Krylov eigensolver for symmetric operators.
//!
//! The first block is a randomized range finder (Gaussian test matrix with
//! oversampling). Each cycle extends it by `depth` Krylov blocks, performs a
//! Rayleigh–Ritz projection and restarts from the leading Ritz vectors until
//! every wanted pair meets the residual tolerance.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// A symmetric linear operator applied to blocks of column vectors.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_block(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
}

impl SymmetricOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_block(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.mul_dense(x)
    }
}

/// `MᵀM` for a sparse `M`, applied without forming the product.
pub struct Gram<'a>(pub &'a CsrMatrix);

impl SymmetricOperator for Gram<'_> {
    fn dim(&self) -> usize {
        self.0.ncols()
    }

    fn apply_block(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.0.gram_mul_dense(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub oversample: usize,
    /// Krylov blocks added per cycle (power iterations of the range finder).
    pub depth: usize,
    /// Residual bound relative to each eigenvalue's magnitude.
    pub tol: f64,
    pub max_restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { oversample: 10, depth: 4, tol: 1e-10, max_restarts: 300 }
    }
}

/// Eigenvalues below this fraction of the largest magnitude share its
/// residual floor instead of their own.
const RESIDUAL_FLOOR: f64 = 1e-3;

pub(crate) struct EigPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// The `r` largest-magnitude eigenpairs of `op`, unsorted sign.
pub(crate) fn largest_magnitude(
    op: &dyn SymmetricOperator,
    r: usize,
    rng: &mut ChaCha8Rng,
    opts: &SolverOptions,
) -> Result<EigPairs> {
    let n = op.dim();
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!("requested {r} eigenpairs of a {n}-dimensional operator")));
    }
    let b = (r + opts.oversample).min(n);
    let max_cols = (b * (opts.depth + 1)).min(n);

    let mut q = gaussian(n, b, rng);
    let mut basis = DMatrix::<f64>::zeros(n, max_cols);
    let mut abasis = DMatrix::<f64>::zeros(n, max_cols);
    orthonormalize(&basis, 0, &mut q, rng);
    let mut aq = op.apply_block(&q);
    let mut worst = f64::INFINITY;

    for restart in 0..opts.max_restarts.max(1) {
        basis.columns_mut(0, b).copy_from(&q);
        abasis.columns_mut(0, b).copy_from(&aq);
        let mut filled = b;
        let mut last_start = 0;
        for _ in 0..opts.depth {
            if filled >= max_cols {
                break;
            }
            let width = b.min(max_cols - filled);
            let mut w = abasis.columns(last_start, width).into_owned();
            orthonormalize(&basis, filled, &mut w, rng);
            let aw = op.apply_block(&w);
            basis.columns_mut(filled, width).copy_from(&w);
            abasis.columns_mut(filled, width).copy_from(&aw);
            last_start = filled;
            filled += width;
        }

        let v = basis.columns(0, filled);
        let av = abasis.columns(0, filled);
        let mut h = v.transpose() * av;
        h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..filled).collect();
        order.sort_by(|&a, &c| {
            let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[c]);
            y.abs().total_cmp(&x.abs()).then(y.total_cmp(&x))
        });
        let keep = b.min(filled);
        let y = eig.eigenvectors.select_columns(&order[..keep]);
        let theta: Vec<f64> = order[..keep].iter().map(|&k| eig.eigenvalues[k]).collect();
        let x = v * &y;
        let ax = av * &y;

        let scale = theta[0].abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::DegenerateSpectrum);
        }
        worst = 0.0;
        for i in 0..r {
            let res = (ax.column(i) - x.column(i) * theta[i]).norm();
            let bound = theta[i].abs().max(RESIDUAL_FLOOR * scale);
            worst = f64::max(worst, res / bound);
        }
        if worst <= opts.tol {
            log::debug!("{r} eigenpairs of a {n}-dimensional operator after {} restarts", restart + 1);
            return Ok(EigPairs { values: theta[..r].to_vec(), vectors: x.columns(0, r).into_owned() });
        }
        // Ritz vectors drift from orthonormality over many restarts; the
        // QR keeps the span and `A Q = (A X) R⁻¹` keeps the products exact.
        let qr = x.qr();
        let r_factor = qr.r();
        q = qr.q();
        aq = match r_factor.transpose().solve_lower_triangular(&ax.transpose()) {
            Some(t) => t.transpose(),
            None => op.apply_block(&q),
        };
    }
    Err(Error::NoConvergence { restarts: opts.max_restarts, residual: worst })
}

fn gaussian(n: usize, b: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, b, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Orthonormalize the columns of `w` against the first `filled` columns of
/// `basis` and against each other. Columns that vanish are replaced by fresh
/// random directions.
fn orthonormalize(basis: &DMatrix<f64>, filled: usize, w: &mut DMatrix<f64>, rng: &mut ChaCha8Rng) {
    let n = w.nrows();
    let norms0: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    // Fast path: block Gram-Schmidt with one reorthogonalization pass, each
    // pass a projection followed by a Householder QR.
    project_once(basis, filled, w);
    let qr = w.clone().qr();
    let r = qr.r();
    if (0..w.ncols()).all(|j| r[(j, j)].abs() > 1e-10 * norms0[j] && r[(j, j)] != 0.0) {
        let mut q = qr.q();
        project_once(basis, filled, &mut q);
        let second = q.qr();
        if (0..w.ncols()).all(|j| second.r()[(j, j)].abs() > 0.5) {
            *w = second.q();
            return;
        }
    }
    project_once(basis, filled, w);
    for j in 0..w.ncols() {
        let mut attempt = 0;
        loop {
            for _ in 0..2 {
                for i in 0..j {
                    let dot = w.column(i).dot(&w.column(j));
                    let wi = w.column(i).into_owned();
                    w.column_mut(j).axpy(-dot, &wi, 1.0);
                }
            }
            let norm = w.column(j).norm();
            let reference = if attempt == 0 { norms0[j] } else { 1.0 };
            if norm > 1e-10 * reference && norm > 0.0 {
                w.column_mut(j).scale_mut(1.0 / norm);
                break;
            }
            attempt += 1;
            assert!(filled + j < n && attempt < 50, "cannot extend an orthonormal basis beyond its dimension");
            let fresh = DMatrix::from_fn(n, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
            let fresh_norm = fresh.norm();
            w.column_mut(j).copy_from(&(fresh / fresh_norm));
            let mut col = w.columns(j, 1).into_owned();
            project_out(basis, filled, &mut col);
            w.column_mut(j).copy_from(&col);
        }
    }
}

fn project_out(basis: &DMatrix<f64>, filled: usize, w: &mut DMatrix<f64>) {
    project_once(basis, filled, w);
    project_once(basis, filled, w);
}

fn project_once(basis: &DMatrix<f64>, filled: usize, w: &mut DMatrix<f64>) {
    if filled == 0 {
        return;
    }
    let v = basis.columns(0, filled);
    let c = v.transpose() * &*w;
    *w -= v * c;
}
