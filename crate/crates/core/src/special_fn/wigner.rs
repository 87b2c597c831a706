//! Rotations in z-y-z Euler angles and their Wigner-D representation.
//!
//! `R(α, β, γ) = Rz(α) Ry(β) Rz(γ)` acts actively on vectors. Blocks satisfy
//! `Y_n^m(R⁻¹ r̂) = Σ_{m'} Y_n^{m'}(r̂) D^n_{m'm}(R)` with
//! `D^n_{m'm} = e^{-i m' α} d^n_{m'm}(β) e^{-i m γ}`.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coupling::ln_factorial;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub const IDENTITY: EulerAngles = EulerAngles { alpha: 0.0, beta: 0.0, gamma: 0.0 };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        assert!(alpha.is_finite() && beta.is_finite() && gamma.is_finite(), "Euler angles must be finite");
        EulerAngles { alpha, beta, gamma }
    }

    /// Pure rotation about +z.
    pub fn yaw(psi: f64) -> Self {
        EulerAngles::new(psi, 0.0, 0.0)
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0 && self.gamma == 0.0
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        rot_z(self.alpha) * rot_y(self.beta) * rot_z(self.gamma)
    }

    pub fn from_matrix(r: &Matrix3<f64>) -> Self {
        let cb = r[(2, 2)].clamp(-1.0, 1.0);
        let sb = (r[(0, 2)].powi(2) + r[(1, 2)].powi(2)).sqrt();
        if sb > 1e-12 {
            EulerAngles {
                alpha: r[(1, 2)].atan2(r[(0, 2)]),
                beta: sb.atan2(cb),
                gamma: r[(2, 1)].atan2(-r[(2, 0)]),
            }
        } else if cb > 0.0 {
            EulerAngles { alpha: r[(1, 0)].atan2(r[(0, 0)]), beta: 0.0, gamma: 0.0 }
        } else {
            EulerAngles { alpha: (-r[(0, 1)]).atan2(r[(1, 1)]), beta: std::f64::consts::PI, gamma: 0.0 }
        }
    }

    /// The rotation `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &EulerAngles) -> Self {
        EulerAngles::from_matrix(&(self.to_matrix() * other.to_matrix()))
    }

    pub fn inverse(&self) -> Self {
        EulerAngles { alpha: -self.gamma, beta: -self.beta, gamma: -self.alpha }
    }
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn ln_binom(n: i64, k: i64) -> f64 {
    ln_factorial(n as usize) - ln_factorial(k as usize) - ln_factorial((n - k) as usize)
}

/// Jacobi polynomial `P_k^{(a,b)}(x)` by its three-term recurrence.
fn jacobi(k: i64, a: f64, b: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for n in 2..=k {
        let n = n as f64;
        let c = 2.0 * n + a + b;
        let a1 = 2.0 * n * (n + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (c * (c - 2.0) * x + a * a - b * b);
        let a3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c;
        let p2 = (a2 * p1 - a3 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Small Wigner d-matrix element `d^j_{m'm}(β)`.
pub fn wigner_small_d(j: usize, mp: isize, m: isize, beta: f64) -> f64 {
    let (j, mp, m) = (j as i64, mp as i64, m as i64);
    let cands = [j + m, j - m, j + mp, j - mp];
    let k = *cands.iter().min().unwrap();
    let (a, lambda) = if k == j + m {
        (mp - m, mp - m)
    } else if k == j - m {
        (m - mp, 0)
    } else if k == j + mp {
        (m - mp, 0)
    } else {
        (mp - m, mp - m)
    };
    let b = 2 * j - 2 * k - a;
    let sign = if lambda.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let ln_pre = 0.5 * (ln_binom(2 * j - k, k + a) - ln_binom(k + b, b));
    let (s, c) = (beta / 2.0).sin_cos();
    sign * ln_pre.exp() * s.powi(a as i32) * c.powi(b as i32) * jacobi(k, a as f64, b as f64, beta.cos())
}

/// Full `(2n+1) × (2n+1)` block, rows `m'` and columns `m` both running `-n..=n`.
pub fn wigner_d_block(n: usize, angles: &EulerAngles) -> DMatrix<Complex64> {
    let size = 2 * n + 1;
    let ni = n as isize;
    DMatrix::from_fn(size, size, |r, c| {
        let mp = r as isize - ni;
        let m = c as isize - ni;
        let d = wigner_small_d(n, mp, m, angles.beta);
        Complex64::from_polar(d, -(mp as f64) * angles.alpha - (m as f64) * angles.gamma)
    })
}
