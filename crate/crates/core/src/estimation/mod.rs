//! Expansion-coefficient estimation from microphone observations.
//!
//! The distributed estimator treats every microphone through its directivity
//! coefficients `c_i` and never truncates the field: the Gram matrix
//! `Ψ_{ii'} = c_iᴴ T(r_i - r_i') c_i'` is exact because each `c_i` has finite
//! order, and the coefficients at any target follow from
//! `α(r) = Ξ(r) (Ψ + λI)⁻¹ s` with `Ξ(r) = [T(r - r_i) c_i]`.

mod rigid;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::wavefield::{translation_matrix, ShCoeffVec};

pub use rigid::{rigid_sphere_estimate, rigid_sphere_matrix};

/// Default extra order used when a translated or Gram-checked expansion needs headroom.
pub const DEFAULT_BUFFER: usize = 10;

/// `c_iᴴ T(r_i - r_i') c_i'` for every pair; exactly Hermitian.
pub fn build_psi(geom: &ArrayGeometry, k: f64) -> DMatrix<Complex64> {
    let n = geom.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mi = &geom.mics[i];
            (i..n)
                .map(|j| {
                    let mj = &geom.mics[j];
                    if i == j {
                        return Complex64::new(mi.dir_coeffs.norm_squared(), 0.0);
                    }
                    let t = translation_matrix(&(mi.position - mj.position), k, mi.dir_order(), mj.dir_order());
                    mi.dir_coeffs.dotc(&(&t.entries * &mj.dir_coeffs))
                })
                .collect()
        })
        .collect();
    let mut psi = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            let j = i + off;
            psi[(i, j)] = *v;
            psi[(j, i)] = v.conj();
        }
    }
    psi
}

/// `Ξ(r)`: column `i` is `T(r - r_i) c_i` cut to `order`. The cut is exact
/// row by row, so no inner buffer is involved.
pub fn build_xi(geom: &ArrayGeometry, target: &Vector3<f64>, k: f64, order: usize) -> DMatrix<Complex64> {
    let cols: Vec<DVector<Complex64>> = geom
        .mics
        .par_iter()
        .map(|m| {
            let t = translation_matrix(&(target - m.position), k, order, m.dir_order());
            &t.entries * &m.dir_coeffs
        })
        .collect();
    DMatrix::from_columns(&cols)
}

/// `1e-3 · tr(Ψ) / I`.
pub fn default_lambda(psi: &DMatrix<Complex64>) -> f64 {
    1e-3 * psi.trace().re / psi.nrows().max(1) as f64
}

/// Gram matrix and its factorization for one array at one wavenumber.
///
/// The factorization of `Ψ + λI` is computed once and reused for every
/// observation, target position and rotation.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    pub geometry: ArrayGeometry,
    pub k: f64,
    /// Output truncation order.
    pub order: usize,
    pub lambda: f64,
    pub psi: DMatrix<Complex64>,
    factor: Cholesky<Complex64, Dyn>,
}

impl EstimatorState {
    /// `lambda = None` selects [`default_lambda`].
    pub fn new(geometry: &ArrayGeometry, k: f64, order: usize, lambda: Option<f64>) -> Result<Self> {
        geometry.validate()?;
        if !(k > 0.0) {
            return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
        }
        let psi = build_psi(geometry, k);
        let lambda = lambda.unwrap_or_else(|| default_lambda(&psi));
        if !(lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("lambda must be non-negative, got {lambda}")));
        }
        let mut a = psi.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += lambda;
        }
        let factor = Cholesky::new(a).ok_or_else(|| Error::Singular(format!("Ψ + λI is not positive definite (λ = {lambda})")))?;
        let diag = factor.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
        if (lo / hi).powi(2) < 1e-14 {
            return Err(Error::Singular(format!("Ψ + λI is numerically singular (λ = {lambda}, pivot ratio {:.2e})", (lo / hi).powi(2))));
        }
        Ok(EstimatorState { geometry: geometry.clone(), k, order, lambda, psi, factor })
    }

    pub fn n_mics(&self) -> usize {
        self.psi.nrows()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_mics() {
            return Err(Error::InvalidInput(format!("observation has {len} channels, array has {}", self.n_mics())));
        }
        Ok(())
    }

    /// `w = (Ψ + λI)⁻¹ s`.
    pub fn solve(&self, s: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.check_len(s.len())?;
        Ok(self.factor.solve(s))
    }

    /// `(Ψ + λI)⁻ᵀ v`, used to turn a row functional into per-mic weights.
    pub fn solve_transpose(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.check_len(v.len())?;
        Ok(self.factor.solve(&v.conjugate()).conjugate())
    }

    pub fn xi(&self, target: &Vector3<f64>) -> DMatrix<Complex64> {
        build_xi(&self.geometry, target, self.k, self.order)
    }

    /// `Ξ(r) w` for a cached solve `w`.
    pub fn coeffs_at(&self, w: &DVector<Complex64>, target: &Vector3<f64>) -> ShCoeffVec {
        self.coeffs_at_order(w, target, self.order)
    }

    pub fn coeffs_at_order(&self, w: &DVector<Complex64>, target: &Vector3<f64>, order: usize) -> ShCoeffVec {
        let xi = build_xi(&self.geometry, target, self.k, order);
        ShCoeffVec::new(xi * w, *target, self.k).expect("square coefficient count")
    }

    pub fn estimate(&self, s: &DVector<Complex64>, target: &Vector3<f64>) -> Result<ShCoeffVec> {
        Ok(self.coeffs_at(&self.solve(s)?, target))
    }
}

/// One-shot `α(r) = Ξ(r)(Ψ + λI)⁻¹ s`.
pub fn estimate_coeffs(
    s: &DVector<Complex64>,
    geom: &ArrayGeometry,
    target: &Vector3<f64>,
    k: f64,
    lambda: Option<f64>,
    order: usize,
) -> Result<ShCoeffVec> {
    EstimatorState::new(geom, k, order, lambda)?.estimate(s, target)
}

/// Relative Frobenius distance between `Ψ` and `Ξ(r)ᴴ Ξ(r)` with `Ξ` cut at `order`.
pub fn gram_deviation(geom: &ArrayGeometry, psi: &DMatrix<Complex64>, target: &Vector3<f64>, k: f64, order: usize) -> f64 {
    let xi = build_xi(geom, target, k, order);
    (xi.adjoint() * xi - psi).norm() / psi.norm()
}

/// Order giving `gram_deviation` far below typical tolerances: the largest
/// mic-to-target distance sets `⌈e k d / 2⌉`, plus the buffer.
pub fn gram_order(geom: &ArrayGeometry, target: &Vector3<f64>, k: f64, buffer: usize) -> usize {
    let d = geom.mics.iter().map(|m| (m.position - target).norm()).fold(0.0, f64::max);
    (std::f64::consts::E * k * d / 2.0).ceil() as usize + buffer
}
