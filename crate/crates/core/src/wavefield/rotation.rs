use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ShCoeffVec;
use crate::special_fn::{sh_count, wigner_d_block, EulerAngles};

/// Block-diagonal rotation operator up to `order`; block `n` is the Wigner-D
/// block placed at rows/columns `n²..(n+1)²`.
pub fn rotation_matrix(order: usize, angles: &EulerAngles) -> DMatrix<Complex64> {
    let size = sh_count(order);
    let mut out = DMatrix::zeros(size, size);
    for n in 0..=order {
        let d = wigner_d_block(n, angles);
        out.view_mut((n * n, n * n), (2 * n + 1, 2 * n + 1)).copy_from(&d);
    }
    out
}

/// Actively rotates the field about its expansion center: the result evaluated
/// at `r` equals the input evaluated at `R⁻¹ r`.
pub fn rotate_coeffs(alpha: &ShCoeffVec, angles: &EulerAngles) -> ShCoeffVec {
    if angles.is_identity() {
        return alpha.clone();
    }
    let mut out = alpha.clone();
    for n in 0..=alpha.order() {
        let d = wigner_d_block(n, angles);
        let block = alpha.coeffs.rows(n * n, 2 * n + 1);
        out.coeffs.rows_mut(n * n, 2 * n + 1).copy_from(&(d * block));
    }
    out
}
