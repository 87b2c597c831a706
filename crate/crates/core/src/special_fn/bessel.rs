//! Spherical Bessel and Hankel functions.
//!
//! Time convention is `e^{+iωt}`: outgoing waves use the spherical Hankel
//! function of the second kind, `h_n(x) = j_n(x) - i y_n(x)`, so that
//! `h_0(x) = i e^{-ix} / x`. Every `h_n` in this crate is of the second kind.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `j_0..=j_{n_max}` at `x`.
///
/// Miller's downward recurrence started well above both `n_max` and `x`,
/// normalized against the closed forms of `j_0` and `j_1`.
pub fn sph_bessel_j_array(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 0.0 {
        let mut v = sph_bessel_j_array(n_max, -x);
        for (n, val) in v.iter_mut().enumerate() {
            if n % 2 == 1 {
                *val = -*val;
            }
        }
        return v;
    }

    let start = n_max.max(x.ceil() as usize) + 32 + (2.0 * (n_max as f64 + x).sqrt()) as usize;
    let mut f = vec![0.0; start + 2];
    f[start] = 1.0;
    for n in (1..=start).rev() {
        f[n - 1] = (2 * n + 1) as f64 / x * f[n] - f[n + 1];
        if f[n - 1].abs() > 1e200 {
            for v in f[n - 1..].iter_mut() {
                *v *= 1e-200;
            }
        }
    }

    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let big = f[0].abs().max(f[1].abs());
    let (g0, g1) = (f[0] / big, f[1] / big);
    let scale = (j0 * g0 + j1 * g1) / (g0 * g0 + g1 * g1) / big;
    for (o, v) in out.iter_mut().zip(f.iter()) {
        *o = v * scale;
    }
    out
}

/// `y_0..=y_{n_max}` at `x > 0` by upward recurrence.
pub fn sph_bessel_y_array(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("y_n requires x > 0, got {x}")));
    }
    let (s, c) = x.sin_cos();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(-c / x);
    if n_max >= 1 {
        out.push(-c / (x * x) - s / x);
    }
    for n in 1..n_max {
        let next = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        out.push(next);
    }
    Ok(out)
}

/// `h_0..=h_{n_max}` (second kind) at `x > 0`.
pub fn sph_hankel2_array(n_max: usize, x: f64) -> Result<Vec<Complex64>> {
    let y = sph_bessel_y_array(n_max, x)?;
    let j = sph_bessel_j_array(n_max, x);
    Ok(j.iter().zip(y.iter()).map(|(&j, &y)| Complex64::new(j, -y)).collect())
}

/// Derivatives `j_n'` for `n = 0..=n_max`, from a `j` array of length at least `n_max + 2`.
fn j_deriv_from(j: &[f64], n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    if x == 0.0 {
        for n in 0..=n_max {
            out.push(if n == 1 { 1.0 / 3.0 } else { 0.0 });
        }
        return out;
    }
    out.push(-j[1]);
    for n in 1..=n_max {
        out.push(j[n - 1] - (n + 1) as f64 / x * j[n]);
    }
    out
}

/// `j_n'(x)` for `n = 0..=n_max`.
pub fn sph_bessel_j_deriv_array(n_max: usize, x: f64) -> Vec<f64> {
    let j = sph_bessel_j_array(n_max + 1, x);
    j_deriv_from(&j, n_max, x)
}

/// `h_n'(x)` for `n = 0..=n_max`, `x > 0`.
pub fn sph_hankel2_deriv_array(n_max: usize, x: f64) -> Result<Vec<Complex64>> {
    let h = sph_hankel2_array(n_max + 1, x)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(-h[1]);
    for n in 1..=n_max {
        out.push(h[n - 1] - h[n] * ((n + 1) as f64 / x));
    }
    Ok(out)
}

/// Spherical Bessel function of the first kind `j_n(x)`.
pub fn sph_bessel_j(n: usize, x: f64) -> f64 {
    sph_bessel_j_array(n, x)[n]
}

/// Spherical Bessel function of the second kind `y_n(x)`, `x > 0`.
pub fn sph_bessel_y(n: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_y_array(n, x)?[n])
}

/// Spherical Hankel function of the second kind `h_n(x) = j_n(x) - i y_n(x)`.
pub fn sph_hankel2(n: usize, x: f64) -> Result<Complex64> {
    Ok(sph_hankel2_array(n, x)?[n])
}

/// `j_n'(x)`.
pub fn sph_bessel_j_deriv(n: usize, x: f64) -> f64 {
    sph_bessel_j_deriv_array(n, x)[n]
}

/// `h_n'(x)`, second kind.
pub fn sph_hankel2_deriv(n: usize, x: f64) -> Result<Complex64> {
    Ok(sph_hankel2_deriv_array(n, x)?[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power series of `j_n`, used as an independent oracle.
    fn j_series(n: usize, x: f64, terms: usize) -> f64 {
        let mut dfact = 1.0;
        for k in 1..=n {
            dfact *= (2 * k + 1) as f64;
        }
        let lead = x.powi(n as i32) / dfact;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..terms {
            term *= -(x * x / 2.0) / (k as f64 * (2 * n + 2 * k + 1) as f64);
            sum += term;
        }
        lead * sum
    }

    #[test]
    fn j0_closed_form() {
        assert!((sph_bessel_j(0, 1.0) - 0.8414709848078965).abs() < 1e-15);
        assert_eq!(sph_bessel_j(1, 0.0), 0.0);
        assert_eq!(sph_bessel_j(0, 0.0), 1.0);
    }

    #[test]
    fn j_matches_series() {
        let reference = j_series(5, 10.0, 30);
        assert!((sph_bessel_j(5, 10.0) - reference).abs() < 1e-12, "{reference}");
        for &(n, x) in &[(0usize, 0.3), (3, 0.01), (10, 2.0), (20, 5.0), (2, 7.5)] {
            let r = j_series(n, x, 60);
            let v = sph_bessel_j(n, x);
            assert!((v - r).abs() <= 1e-13 * r.abs().max(1e-300) + 1e-300, "n={n} x={x}: {v} vs {r}");
        }
    }

    #[test]
    fn large_argument_accuracy() {
        // j_n(x) at large x against the asymptotic closed form for small n
        let x = 200.0;
        let j = sph_bessel_j_array(2, x);
        let (s, c) = x.sin_cos();
        let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
        assert!((j[0] - s / x).abs() < 1e-15);
        assert!((j[2] - j2).abs() < 1e-15);
    }

    #[test]
    fn hankel_h0_closed_form() {
        let h = sph_hankel2(0, 1.0).unwrap();
        assert!((h.re - 0.8414709848).abs() < 1e-10);
        assert!((h.im - 0.5403023059).abs() < 1e-10);
        let x: f64 = 3.7;
        let expected = Complex64::i() * Complex64::new(0.0, -x).exp() / x;
        assert!((sph_hankel2(0, x).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn hankel_against_closed_form_order_two() {
        let x: f64 = 5.0;
        let (s, c) = x.sin_cos();
        let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
        let y2 = -(3.0 / (x * x) - 1.0) * c / x - 3.0 * s / (x * x);
        let h = sph_hankel2(2, x).unwrap();
        assert!((h.re - j2).abs() < 1e-14);
        assert!((h.im + y2).abs() < 1e-14);
    }

    #[test]
    fn hankel_envelope() {
        for n in 0..6 {
            let x = 1e4;
            let h = sph_hankel2(n, x).unwrap();
            assert!((h.norm() * x - 1.0).abs() < 1e-3, "n={n}");
        }
    }

    #[test]
    fn hankel_domain_error_at_zero() {
        assert!(sph_hankel2(0, 0.0).is_err());
        assert!(sph_hankel2_deriv(1, 0.0).is_err());
    }

    #[test]
    fn wronskian() {
        for &x in &[0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
            let j = sph_bessel_j_array(20, x);
            let jd = sph_bessel_j_deriv_array(20, x);
            let h = sph_hankel2_array(20, x).unwrap();
            let hd = sph_hankel2_deriv_array(20, x).unwrap();
            let target = Complex64::new(0.0, -1.0 / (x * x));
            for n in 0..=20 {
                let w = hd[n] * j[n] - h[n] * jd[n];
                assert!((w - target).norm() / target.norm() < 1e-10, "n={n} x={x}: {w}");
            }
        }
    }

    #[test]
    fn j0_derivative_identity() {
        assert!((sph_bessel_j_deriv(0, 2.0) + sph_bessel_j(1, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn derivative_finite_difference() {
        let (n, x, h) = (3usize, 7.0, 1e-6);
        let fd = (sph_bessel_j(n, x + h) - sph_bessel_j(n, x - h)) / (2.0 * h);
        let d = sph_bessel_j_deriv(n, x);
        assert!(((fd - d) / d).abs() < 1e-6);
        let fdh = (sph_hankel2(n, x + h).unwrap() - sph_hankel2(n, x - h).unwrap()) / (2.0 * h);
        let dh = sph_hankel2_deriv(n, x).unwrap();
        assert!((fdh - dh).norm() / dh.norm() < 1e-6);
    }

    #[test]
    fn tiny_argument_no_garbage() {
        let j = sph_bessel_j_array(40, 1e-8);
        assert!(j.iter().all(|v| v.is_finite()));
        assert!((j[0] - 1.0).abs() < 1e-15);
        assert!((j[1] - 1e-8 / 3.0).abs() < 1e-22);
    }
}
