use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{HrtfSet, HrtfShSpectrum};
use crate::error::{Error, Result};
use crate::special_fn::{sh_count, sph_harmonics_all, ShIndex};

/// Diagonal of the order weighting `Q`: `1 + n(n+1)` for every `(n, m)`.
pub fn order_weights(order: usize) -> Vec<f64> {
    ShIndex::iter_to(order).map(|i| 1.0 + (i.n * (i.n + 1)) as f64).collect()
}

/// Scale-relative regularization `1e-6 · tr(YᴴY) / (N+1)²`. For orthonormal
/// harmonics `tr(YᴴY) = J (N+1)² / 4π`.
pub fn default_gamma(n_dirs: usize, order: usize) -> f64 {
    let q = sh_count(order) as f64;
    1e-6 * (n_dirs as f64 * q / (4.0 * std::f64::consts::PI)) / q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub order: usize,
    /// `None` selects [`default_gamma`].
    pub gamma: Option<f64>,
}

/// Least-squares spectra `ψ = (YᴴY + γQ)⁻¹ Yᴴ h` for both ears at every
/// frequency, `Y` holding `Y_n^m(ŝ_j)^*`.
pub fn fit_sh(set: &HrtfSet, order: usize, gamma: f64) -> Result<HrtfShSpectrum> {
    fit_sh_with(set, &FitOptions { order, gamma: Some(gamma) })
}

pub fn fit_sh_with(set: &HrtfSet, opts: &FitOptions) -> Result<HrtfShSpectrum> {
    set.validate()?;
    let order = opts.order;
    let q = sh_count(order);
    let j = set.directions.len();
    if j < q {
        return Err(Error::Insufficient(format!("{j} directions cannot determine {q} coefficients (order {order})")));
    }
    let gamma = opts.gamma.unwrap_or_else(|| default_gamma(j, order));
    if !(gamma >= 0.0) {
        return Err(Error::InvalidInput(format!("gamma must be non-negative, got {gamma}")));
    }

    // Y = A + iB with A = Re Y_n^m, B = -Im Y_n^m (conjugated harmonics)
    let rows: Vec<Vec<Complex64>> = set.directions.par_iter().map(|&(t, p)| sph_harmonics_all(order, t, p)).collect();
    let a = DMatrix::from_fn(j, q, |r, c| rows[r][c].re);
    let b = DMatrix::from_fn(j, q, |r, c| -rows[r][c].im);

    // YᴴY = AᵀA + BᵀB + i(AᵀB - BᵀA), assembled from real products
    let at = a.transpose();
    let bt = b.transpose();
    let real = &at * &a + &bt * &b;
    let m = &at * &b;
    let imag = &m - m.transpose();
    let w = order_weights(order);
    let normal = DMatrix::from_fn(q, q, |r, c| {
        let mut v = Complex64::new(real[(r, c)], imag[(r, c)]);
        if r == c {
            v.re += gamma * w[r];
            v.im = 0.0;
        }
        v
    });

    let chol = Cholesky::<Complex64, Dyn>::new(normal)
        .ok_or_else(|| Error::Singular(format!("HRTF normal matrix is not positive definite (order {order}, gamma {gamma})")))?;
    let diag = chol.l_dirty().diagonal();
    let (dmin, dmax) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
    if (dmin / dmax).powi(2) < 1e-14 {
        return Err(Error::Singular(format!("HRTF normal matrix is numerically singular (pivot ratio {:.2e})", (dmin / dmax).powi(2))));
    }

    // right-hand sides for every (ear, freq) column at once
    let nf = set.freqs.len();
    let cols = 2 * nf;
    let hr = DMatrix::from_fn(j, cols, |r, c| set.responses[c * j + r].re);
    let hi = DMatrix::from_fn(j, cols, |r, c| set.responses[c * j + r].im);
    let rhs_re = &at * &hr + &bt * &hi;
    let rhs_im = &at * &hi - &bt * &hr;
    let rhs = DMatrix::from_fn(q, cols, |r, c| Complex64::new(rhs_re[(r, c)], rhs_im[(r, c)]));
    let sol = chol.solve(&rhs);

    let mut coeffs = Vec::with_capacity(q * cols);
    for c in 0..cols {
        coeffs.extend(sol.column(c).iter().copied());
    }
    Ok(HrtfShSpectrum { order, radius: set.radius, freqs: set.freqs.clone(), coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hrtf::grid::gauss_grid;
    use crate::hrtf::{LEFT, RIGHT};

    fn set_from_fn(dirs: Vec<(f64, f64)>, f: impl Fn(usize, f64, f64) -> Complex64) -> HrtfSet {
        let mut responses = Vec::new();
        for ear in 0..2 {
            for &(t, p) in &dirs {
                responses.push(f(ear, t, p));
            }
        }
        HrtfSet { radius: 1.5, directions: dirs, freqs: vec![1000.0], responses, sample_rate: 48000.0 }
    }

    #[test]
    fn recovers_single_harmonic() {
        let target = ShIndex::new(3, -2);
        let dirs = gauss_grid(32, 64);
        assert!(dirs.len() >= 2000);
        let set = set_from_fn(dirs, |_, t, p| sph_harmonics_all(3, t, p)[target.linear()].conj());
        let spec = fit_sh(&set, 6, 0.0).unwrap();
        let s = spec.slice(0);
        for idx in ShIndex::iter_to(6) {
            let expected = if idx == target { 1.0 } else { 0.0 };
            assert!((s.left[idx.linear()] - expected).norm() < 1e-8, "{idx:?}");
        }
    }

    #[test]
    fn exact_for_band_limited_field() {
        let dirs = gauss_grid(12, 24);
        let coeffs: Vec<Complex64> = (0..sh_count(5)).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let set = set_from_fn(dirs.clone(), |_, t, p| {
            sph_harmonics_all(5, t, p).iter().zip(&coeffs).map(|(y, c)| c * y.conj()).sum()
        });
        let spec = fit_sh(&set, 5, 0.0).unwrap();
        let s = spec.slice(0);
        for (j, &(t, p)) in dirs.iter().enumerate() {
            assert!((s.evaluate(LEFT, t, p) - set.response(LEFT, 0, j)).norm() < 1e-10);
        }
    }

    #[test]
    fn shrinkage_with_gamma() {
        let dirs = gauss_grid(10, 20);
        let set = set_from_fn(dirs, |ear, t, p| Complex64::new((t * 3.0).cos() + ear as f64, p.sin()));
        let mut last = f64::INFINITY;
        let w = order_weights(6);
        for gamma in [0.0, 1e-3, 1e-1, 10.0, 1e3, 1e9] {
            let s = fit_sh(&set, 6, gamma).unwrap().slice(0);
            let norm: f64 = s.left.iter().zip(&w).map(|(c, w)| c.norm_sqr() * w).sum::<f64>().sqrt();
            assert!(norm <= last * (1.0 + 1e-12));
            last = norm;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn insufficient_and_singular() {
        let set = set_from_fn(gauss_grid(3, 4), |_, _, _| Complex64::new(1.0, 0.0));
        assert!(matches!(fit_sh(&set, 4, 0.0), Err(Error::Insufficient(_))));
        // 30 directions on one ring cannot separate zenith dependence
        let ring: Vec<(f64, f64)> = (0..30).map(|i| (1.2, i as f64 * 0.2)).collect();
        let set = set_from_fn(ring, |_, _, _| Complex64::new(1.0, 0.0));
        assert!(matches!(fit_sh(&set, 3, 0.0), Err(Error::Singular(_))));
        assert!(fit_sh(&set, 3, 1e-3).is_ok());
    }

    #[test]
    fn mirror_relation() {
        // right ear sees the y-mirrored field: h_R(θ, φ) = h_L(θ, -φ)
        let dirs = gauss_grid(12, 24);
        let f = |t: f64, p: f64| Complex64::new(t.cos() + 0.3 * p.sin(), 0.5 * (2.0 * p).cos() * t.sin());
        let set = set_from_fn(dirs, |ear, t, p| if ear == LEFT { f(t, p) } else { f(t, -p) });
        let s = fit_sh(&set, 6, 1e-6).unwrap().slice(0);
        for idx in ShIndex::iter_to(6) {
            let neg = ShIndex::new(idx.n, -idx.m);
            let sign = if idx.m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert!((s.ear(RIGHT)[idx.linear()] - s.left[neg.linear()] * sign).norm() < 1e-8);
        }
    }
}
