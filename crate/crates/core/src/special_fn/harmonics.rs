//! Complex spherical harmonics with Condon-Shortley phase:
//!
//! `Y_n^m(θ, φ) = sqrt((2n+1)/(4π) (n-m)!/(n+m)!) P_n^m(cos θ) e^{imφ}`
//!
//! with `θ` the zenith angle and `φ` the azimuth. Negative degrees follow from
//! `Y_n^{-m} = (-1)^m (Y_n^m)^*`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

/// Order/degree pair of a spherical harmonic. The linear index is
/// `q = n² + n + m`, so a truncation at order `N` holds `(N+1)²` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShIndex {
    pub n: usize,
    pub m: isize,
}

impl ShIndex {
    pub fn new(n: usize, m: isize) -> Self {
        assert!(m.unsigned_abs() <= n, "|m| must not exceed n (n={n}, m={m})");
        ShIndex { n, m }
    }

    #[inline]
    pub fn linear(self) -> usize {
        ((self.n * self.n + self.n) as isize + self.m) as usize
    }

    #[inline]
    pub fn from_linear(q: usize) -> Self {
        let n = (q as f64).sqrt().floor() as usize;
        // guard against rounding of the square root for large q
        let n = if (n + 1) * (n + 1) <= q { n + 1 } else if n * n > q { n - 1 } else { n };
        let m = q as isize - (n * n + n) as isize;
        ShIndex { n, m }
    }

    /// All indices up to and including `order`, in linear order.
    pub fn iter_to(order: usize) -> impl Iterator<Item = ShIndex> {
        (0..sh_count(order)).map(ShIndex::from_linear)
    }
}

/// Number of coefficients in an expansion truncated at `order`.
#[inline]
pub fn sh_count(order: usize) -> usize {
    (order + 1) * (order + 1)
}

/// Inverse of [`sh_count`]; `None` when `len` is not a perfect square.
pub fn order_from_len(len: usize) -> Option<usize> {
    if len == 0 {
        return None;
    }
    let n = (len as f64).sqrt().round() as usize;
    (n * n == len).then(|| n - 1)
}

#[inline]
pub(crate) fn tri_index(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

/// Fully normalized associated Legendre values `P̄_n^m(x)` for `0 <= m <= n <= n_max`,
/// including the Condon-Shortley phase and the `sqrt((2n+1)/(4π) ...)` factor,
/// stored at [`tri_index`]`(n, m)`.
pub fn legendre_normalized_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; tri_index(n_max, n_max) + 1];
    let s = (1.0 - x * x).max(0.0).sqrt();
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=n_max {
        let prev = p[tri_index(m - 1, m - 1)];
        p[tri_index(m, m)] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * prev;
    }
    for m in 0..n_max {
        p[tri_index(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * p[tri_index(m, m)];
    }
    for m in 0..=n_max {
        for n in (m + 2)..=n_max {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
            p[tri_index(n, m)] = a * (x * p[tri_index(n - 1, m)] - b * p[tri_index(n - 2, m)]);
        }
    }
    p
}

/// All `Y_n^m(θ, φ)` up to `n_max`, at linear index `n² + n + m`.
pub fn sph_harmonics_all(n_max: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let p = legendre_normalized_all(n_max, theta.cos());
    let mut out = vec![Complex64::new(0.0, 0.0); sh_count(n_max)];
    let mut phase = Vec::with_capacity(n_max + 1);
    for m in 0..=n_max {
        phase.push(Complex64::from_polar(1.0, m as f64 * phi));
    }
    for n in 0..=n_max {
        let base = n * n + n;
        for m in 0..=n {
            let y = phase[m] * p[tri_index(n, m)];
            out[base + m] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[base - m] = y.conj() * sign;
            }
        }
    }
    out
}

/// Single spherical harmonic `Y_n^m(θ, φ)`.
pub fn sph_harmonic(idx: ShIndex, theta: f64, phi: f64) -> Complex64 {
    let m_abs = idx.m.unsigned_abs();
    let p = legendre_normalized_all(idx.n, theta.cos())[tri_index(idx.n, m_abs)];
    let y = Complex64::from_polar(p, m_abs as f64 * phi);
    if idx.m < 0 {
        let sign = if m_abs % 2 == 0 { 1.0 } else { -1.0 };
        y.conj() * sign
    } else {
        y
    }
}

/// Spherical coordinates `(r, θ, φ)` of a Cartesian vector (zenith `θ`, azimuth `φ`).
/// The origin maps to `(0, 0, 0)`.
pub fn cart_to_sph(v: &Vector3<f64>) -> (f64, f64, f64) {
    let r = v.norm();
    if r == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let theta = (v.z / r).clamp(-1.0, 1.0).acos();
    let phi = v.y.atan2(v.x);
    (r, theta, phi)
}

/// Unit vector for zenith `θ` and azimuth `φ`.
pub fn sph_to_unit(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}
