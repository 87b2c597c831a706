//! Interior soundfield expansions.
//!
//! A field `u(r)` regular around a center `c` is written
//! `u(r) = Σ α_n^m φ_n^m(r - c)` with `φ_n^m(x) = √(4π) j_n(k|x|) Y_n^m(x̂)`.
//! Under this normalization `α_0^0` is the pressure at the center.
//!
//! Time dependence is `e^{+iωt}` throughout, so the free-field Green's function
//! is `e^{-ikR} / (4πR)` and outgoing waves use `h_n = j_n - i y_n`.

mod rotation;
pub mod scattering;
mod translation;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special_fn::{cart_to_sph, order_from_len, sh_count, sph_bessel_j_array, sph_hankel2_array, sph_harmonics_all, ShIndex};

pub use rotation::{rotate_coeffs, rotation_matrix};
pub use translation::{default_buffer, translate_coeffs, translate_coeffs_to, translation_matrix, TranslationMatrix};

/// Truncated interior expansion coefficients about `center` at wavenumber `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShCoeffVec {
    pub coeffs: DVector<Complex64>,
    pub center: Vector3<f64>,
    pub k: f64,
    order: usize,
}

impl ShCoeffVec {
    pub fn new(coeffs: DVector<Complex64>, center: Vector3<f64>, k: f64) -> Result<Self> {
        let order = order_from_len(coeffs.len())
            .ok_or_else(|| Error::InvalidInput(format!("coefficient count {} is not a perfect square", coeffs.len())))?;
        Ok(ShCoeffVec { coeffs, center, k, order })
    }

    pub fn zeros(order: usize, center: Vector3<f64>, k: f64) -> Self {
        ShCoeffVec { coeffs: DVector::zeros(sh_count(order)), center, k, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, idx: ShIndex) -> Complex64 {
        self.coeffs[idx.linear()]
    }

    /// Pressure at the expansion center.
    pub fn pressure(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Same expansion cut (or zero-padded) to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let len = sh_count(order);
        let mut c = DVector::zeros(len);
        let n = len.min(self.coeffs.len());
        c.rows_mut(0, n).copy_from(&self.coeffs.rows(0, n));
        ShCoeffVec { coeffs: c, center: self.center, k: self.k, order }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ShCoeffVec { coeffs: &self.coeffs * s, ..self.clone() }
    }

    fn check_compatible(&self, other: &ShCoeffVec) {
        assert!(self.k == other.k, "coefficient vectors at different wavenumbers ({} vs {})", self.k, other.k);
        assert!(self.center == other.center, "coefficient vectors about different centers");
        assert!(self.order == other.order, "coefficient vectors of different order");
    }
}

impl Add for &ShCoeffVec {
    type Output = ShCoeffVec;
    fn add(self, rhs: &ShCoeffVec) -> ShCoeffVec {
        self.check_compatible(rhs);
        ShCoeffVec { coeffs: &self.coeffs + &rhs.coeffs, ..self.clone() }
    }
}

impl Sub for &ShCoeffVec {
    type Output = ShCoeffVec;
    fn sub(self, rhs: &ShCoeffVec) -> ShCoeffVec {
        self.check_compatible(rhs);
        ShCoeffVec { coeffs: &self.coeffs - &rhs.coeffs, ..self.clone() }
    }
}

impl Mul<Complex64> for &ShCoeffVec {
    type Output = ShCoeffVec;
    fn mul(self, rhs: Complex64) -> ShCoeffVec {
        self.scale(rhs)
    }
}

/// Free-field Green's function `e^{-ik|r - r_src|} / (4π|r - r_src|)`.
pub fn green(r: &Vector3<f64>, r_src: &Vector3<f64>, k: f64) -> Complex64 {
    let d = (r - r_src).norm();
    Complex64::from_polar(1.0 / (4.0 * PI * d), -k * d)
}

/// `φ_n^m(r_rel)` for every index up to `order`.
pub fn wavefunctions_all(order: usize, r_rel: &Vector3<f64>, k: f64) -> Vec<Complex64> {
    let (r, theta, phi) = cart_to_sph(r_rel);
    let j = sph_bessel_j_array(order, k * r);
    let mut y = sph_harmonics_all(order, theta, phi);
    let s4pi = (4.0 * PI).sqrt();
    for (q, v) in y.iter_mut().enumerate() {
        *v *= s4pi * j[ShIndex::from_linear(q).n];
    }
    y
}

/// Spherical wavefunction `φ_n^m(r_rel) = √(4π) j_n(k|r_rel|) Y_n^m`.
pub fn spherical_wavefunction(idx: ShIndex, r_rel: &Vector3<f64>, k: f64) -> Complex64 {
    wavefunctions_all(idx.n, r_rel, k)[idx.linear()]
}

/// Truncated sum `Σ α_n^m φ_n^m(r - center)`.
pub fn evaluate_field(alpha: &ShCoeffVec, r: &Vector3<f64>) -> Complex64 {
    let phi = wavefunctions_all(alpha.order, &(r - alpha.center), alpha.k);
    alpha.coeffs.iter().zip(phi.iter()).map(|(a, p)| a * p).sum()
}

/// Expansion about `center` of a unit point source `G(r, r_src)`.
///
/// `α_n^m = -ik h_n(k|r_src - c|) Y_n^m(ŝ)^* / √(4π)`; valid for
/// `|r - c| < |r_src - c|`.
pub fn point_source_coeffs(r_src: &Vector3<f64>, center: &Vector3<f64>, k: f64, order: usize) -> Result<ShCoeffVec> {
    let rel = r_src - center;
    let (d, theta, phi) = cart_to_sph(&rel);
    if d == 0.0 {
        return Err(Error::Domain("point source coincides with the expansion center".into()));
    }
    let h = sph_hankel2_array(order, k * d)?;
    let y = sph_harmonics_all(order, theta, phi);
    let pre = Complex64::new(0.0, -k) / (4.0 * PI).sqrt();
    let coeffs = DVector::from_iterator(
        y.len(),
        y.iter().enumerate().map(|(q, yv)| pre * h[ShIndex::from_linear(q).n] * yv.conj()),
    );
    Ok(ShCoeffVec { coeffs, center: *center, k, order })
}

/// `i^n` for integer `n` (any sign).
pub(crate) fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Expansion of the unit plane wave `e^{ik⟨η, r - c⟩}` arriving from direction `η`.
pub fn plane_wave_coeffs(direction: &Vector3<f64>, center: &Vector3<f64>, k: f64, order: usize) -> ShCoeffVec {
    let (_, theta, phi) = cart_to_sph(direction);
    let y = sph_harmonics_all(order, theta, phi);
    let s4pi = (4.0 * PI).sqrt();
    let coeffs = DVector::from_iterator(
        y.len(),
        y.iter().enumerate().map(|(q, yv)| i_pow(ShIndex::from_linear(q).n as i64) * yv.conj() * s4pi),
    );
    ShCoeffVec { coeffs, center: *center, k, order }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::{sph_bessel_j, sph_harmonic};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_in_ball(rng: &mut ChaCha8Rng, radius: f64) -> Vector3<f64> {
        loop {
            let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if v.norm() <= 1.0 {
                return v * radius;
            }
        }
    }

    #[test]
    fn wavefunction_at_origin() {
        let z = Vector3::zeros();
        assert!((spherical_wavefunction(ShIndex::new(0, 0), &z, 7.0) - 1.0).norm() < 1e-15);
        assert_eq!(spherical_wavefunction(ShIndex::new(2, 1), &z, 7.0).norm(), 0.0);
    }

    #[test]
    fn wavefunction_composition() {
        let r = Vector3::new(0.0, 0.0, 0.1);
        let v = spherical_wavefunction(ShIndex::new(1, 0), &r, 10.0);
        let expected = (4.0 * PI).sqrt() * sph_bessel_j(1, 1.0) * sph_harmonic(ShIndex::new(1, 0), 0.0, 0.0);
        assert!((v - expected).norm() < 1e-15);
    }

    #[test]
    fn wavefunction_decay() {
        let dir = Vector3::new(0.3, -0.5, 0.8).normalize();
        for &kr in &[1e3, 1e4] {
            let v = spherical_wavefunction(ShIndex::new(3, 2), &(dir * kr), 1.0);
            assert!(v.norm() * kr < 10.0);
        }
    }

    #[test]
    fn field_at_center_is_monopole() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = Vector3::new(0.1, 0.2, -0.3);
        let coeffs = DVector::from_fn(16, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let a = ShCoeffVec::new(coeffs, c, 5.0).unwrap();
        assert!((evaluate_field(&a, &c) - a.pressure()).norm() < 1e-15);
        let z = ShCoeffVec::zeros(4, c, 5.0);
        assert_eq!(evaluate_field(&z, &Vector3::new(0.0, 0.1, 0.0)).norm(), 0.0);
    }

    #[test]
    fn point_source_matches_green() {
        let k = 2.0 * PI * 1000.0 / 346.2;
        let src = Vector3::new(1.5, 0.0, 0.0);
        let c = Vector3::zeros();
        let a = point_source_coeffs(&src, &c, k, 30).unwrap();
        assert!((a.pressure() - green(&c, &src, k)).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let r = random_in_ball(&mut rng, 0.2);
            let g = green(&r, &src, k);
            assert!((evaluate_field(&a, &r) - g).norm() / g.norm() < 1e-6);
        }
    }

    #[test]
    fn point_source_error_decays_with_order() {
        let k = 2.0 * PI * 1000.0 / 346.2;
        let src = Vector3::new(0.4, 0.9, -0.2);
        let r = Vector3::new(0.1, -0.12, 0.05);
        let g = green(&r, &src, k);
        let errs: Vec<f64> = [5usize, 10, 20]
            .iter()
            .map(|&n| (evaluate_field(&point_source_coeffs(&src, &Vector3::zeros(), k, n).unwrap(), &r) - g).norm())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn point_source_axisymmetric() {
        let a = point_source_coeffs(&Vector3::new(0.0, 0.0, 2.0), &Vector3::zeros(), 12.0, 8).unwrap();
        for idx in ShIndex::iter_to(8).filter(|i| i.m != 0) {
            assert!(a.get(idx).norm() < 1e-15);
        }
        assert!(point_source_coeffs(&Vector3::zeros(), &Vector3::zeros(), 1.0, 2).is_err());
    }

    #[test]
    fn plane_wave_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = 10.0;
        for _ in 0..20 {
            let eta = random_in_ball(&mut rng, 1.0).normalize();
            let r = random_in_ball(&mut rng, 0.5);
            let a = plane_wave_coeffs(&eta, &Vector3::zeros(), k, 20);
            let exact = Complex64::from_polar(1.0, k * eta.dot(&r));
            assert!((evaluate_field(&a, &r) - exact).norm() < 1e-6);
        }
        let a = plane_wave_coeffs(&Vector3::z(), &Vector3::zeros(), k, 6);
        assert!((a.pressure() - 1.0).norm() < 1e-15);
        for idx in ShIndex::iter_to(6).filter(|i| i.m != 0) {
            assert!(a.get(idx).norm() < 1e-15);
        }
    }

    #[test]
    #[should_panic(expected = "different wavenumbers")]
    fn mixing_wavenumbers_panics() {
        let a = ShCoeffVec::zeros(2, Vector3::zeros(), 1.0);
        let b = ShCoeffVec::zeros(2, Vector3::zeros(), 2.0);
        let _ = &a + &b;
    }
}
