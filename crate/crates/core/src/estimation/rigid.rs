use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array::{ArrayGeometry, Baffle};
use crate::error::{Error, Result};
use crate::special_fn::{cart_to_sph, sh_count, sph_hankel2_deriv_array, sph_harmonics_all, ShIndex};
use crate::wavefield::ShCoeffVec;

/// Observation matrix of omnidirectional mics on a rigid sphere:
/// `Π_{i,(n,m)} = -√(4π) i Y_n^m(ŝ_i) / ((kR)² h_n'(kR))`.
///
/// The rigid boundary keeps `h_n'` away from zero, so there are no forbidden
/// frequencies here.
pub fn rigid_sphere_matrix(geom: &ArrayGeometry, k: f64, order: usize) -> Result<DMatrix<Complex64>> {
    let Some(Baffle::RigidSphere { center, radius }) = geom.baffle else {
        return Err(Error::InvalidInput("rigid-sphere estimation needs an array with a rigid baffle".into()));
    };
    geom.validate()?;
    let kr = k * radius;
    let hd = sph_hankel2_deriv_array(order, kr)?;
    let radial: Vec<Complex64> =
        (0..=order).map(|n| Complex64::new(0.0, -(4.0 * PI).sqrt()) / (hd[n] * kr * kr)).collect();
    let q = sh_count(order);
    let mut pi = DMatrix::zeros(geom.len(), q);
    for (i, m) in geom.mics.iter().enumerate() {
        let (_, t, p) = cart_to_sph(&(m.position - center));
        let y = sph_harmonics_all(order, t, p);
        for c in 0..q {
            pi[(i, c)] = radial[ShIndex::from_linear(c).n] * y[c];
        }
    }
    Ok(pi)
}

/// Truncated least-squares estimate `ᾱ = (ΠᴴΠ + ηI)⁻¹ Πᴴ s` about the baffle center.
pub fn rigid_sphere_estimate(s: &DVector<Complex64>, geom: &ArrayGeometry, k: f64, order: usize, eta: f64) -> Result<ShCoeffVec> {
    let q = sh_count(order);
    if geom.len() < q {
        return Err(Error::Insufficient(format!("{} microphones cannot determine order {order} ({q} coefficients)", geom.len())));
    }
    if s.len() != geom.len() {
        return Err(Error::InvalidInput(format!("observation has {} channels, array has {}", s.len(), geom.len())));
    }
    if !(eta >= 0.0) {
        return Err(Error::InvalidInput(format!("eta must be non-negative, got {eta}")));
    }
    let pi = rigid_sphere_matrix(geom, k, order)?;
    let mut normal = pi.adjoint() * &pi;
    for i in 0..q {
        normal[(i, i)] += eta;
    }
    let rhs = pi.adjoint() * s;
    let chol = nalgebra::Cholesky::new(normal).ok_or_else(|| Error::Singular(format!("ΠᴴΠ + ηI is not positive definite (η = {eta})")))?;
    let Some(Baffle::RigidSphere { center, .. }) = geom.baffle else { unreachable!() };
    ShCoeffVec::new(chol.solve(&rhs), center, k)
}
