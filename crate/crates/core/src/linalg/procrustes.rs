use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Orthogonal matrix `Q` minimising `‖source·Q − target‖_F`.
pub fn procrustes_rotation(target: &DMatrix<f64>, source: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if target.shape() != source.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", target.shape()),
            found: format!("{:?}", source.shape()),
        });
    }
    let cross = source.tr_mul(target);
    let svd = cross.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    Ok(u * v_t)
}

/// `source` rotated onto `target` by the optimal orthogonal transform.
pub fn procrustes_align(target: &DMatrix<f64>, source: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let q = procrustes_rotation(target, source)?;
    Ok(source * q)
}
