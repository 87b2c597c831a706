//! Pressure on the surface of a rigid sphere, by Legendre series.
//!
//! With the Wronskian `j_n h_n' - j_n' h_n = -i/x²` the total (incident plus
//! scattered) surface pressure collapses to a single Hankel-derivative term
//! per order.

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use super::i_pow;
use crate::error::{Error, Result};
use crate::special_fn::{sph_hankel2_array, sph_hankel2_deriv_array};

/// Hard cap on the series length.
pub const SERIES_CAP: usize = 512;

/// Initial truncation `⌈e k R / 2⌉ + 8`.
pub fn scattering_start_order(k: f64, radius: f64) -> usize {
    (E * k * radius / 2.0).ceil() as usize + 8
}

pub(crate) fn legendre_p(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0; n + 1];
    if n >= 1 {
        p[1] = x;
    }
    for l in 2..=n {
        p[l] = ((2 * l - 1) as f64 * x * p[l - 1] - (l - 1) as f64 * p[l - 2]) / l as f64;
    }
    p
}

/// Per-order radial factors for a unit point source at distance `dist`:
/// `-k h_n(k d) / ((kR)² h_n'(kR) 4π)`.
fn point_weights(order: usize, k: f64, radius: f64, dist: f64) -> Result<Vec<Complex64>> {
    let kr = k * radius;
    let h = sph_hankel2_array(order, k * dist)?;
    let hd = sph_hankel2_deriv_array(order, kr)?;
    Ok((0..=order).map(|n| -h[n] * k / (hd[n] * kr * kr * 4.0 * PI)).collect())
}

/// Per-order factors for the unit plane wave: `i^{n-1} / ((kR)² h_n'(kR))`.
fn plane_weights(order: usize, k: f64, radius: f64) -> Result<Vec<Complex64>> {
    let kr = k * radius;
    let hd = sph_hankel2_deriv_array(order, kr)?;
    Ok((0..=order).map(|n| i_pow(n as i64 - 1) / (hd[n] * kr * kr)).collect())
}

fn partial_sums(w: &[Complex64], cos_t: f64, upto: &[usize]) -> Result<Vec<Complex64>> {
    let n_max = w.len() - 1;
    let p = legendre_p(n_max, cos_t.clamp(-1.0, 1.0));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(upto.len());
    let mut next = 0;
    for n in 0..=n_max {
        let t = w[n] * ((2 * n + 1) as f64 * p[n]);
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(Error::NonConvergent(format!("rigid-sphere series overflowed at order {n}")));
        }
        acc += t;
        while next < upto.len() && upto[next] == n {
            out.push(acc);
            next += 1;
        }
    }
    Ok(out)
}

fn adaptive(start: usize, weights: impl Fn(usize) -> Result<Vec<Complex64>>, cos_t: f64) -> Result<Complex64> {
    let mut n = start.max(1);
    loop {
        let w = weights(2 * n)?;
        let s = partial_sums(&w, cos_t, &[n, 2 * n])?;
        if (s[1] - s[0]).norm() <= 1e-12 * s[1].norm() || s[1].norm() == 0.0 {
            return Ok(s[1]);
        }
        if 2 * n >= SERIES_CAP {
            return Err(Error::NonConvergent(format!("rigid-sphere series not converged by order {SERIES_CAP}")));
        }
        n = (2 * n).min(SERIES_CAP / 2);
    }
}

/// Surface pressure at angle `acos(cos_t)` from the source direction due to a
/// unit point source `e^{-ikR}/(4πR)` at distance `dist` from the center.
pub fn rigid_sphere_point(cos_t: f64, k: f64, radius: f64, dist: f64) -> Result<Complex64> {
    if dist <= radius {
        return Err(Error::Domain(format!("source at {dist} m is inside the sphere of radius {radius} m")));
    }
    adaptive(scattering_start_order(k, radius), |n| point_weights(n, k, radius, dist), cos_t)
}

/// Surface pressure due to the unit plane wave `e^{ik⟨η, r⟩}`; `cos_t = ⟨η, x̂⟩`.
pub fn rigid_sphere_plane(cos_t: f64, k: f64, radius: f64) -> Result<Complex64> {
    adaptive(scattering_start_order(k, radius), |n| plane_weights(n, k, radius), cos_t)
}

/// Fixed-order partial sum of [`rigid_sphere_point`].
pub fn rigid_sphere_point_order(cos_t: f64, k: f64, radius: f64, dist: f64, order: usize) -> Result<Complex64> {
    Ok(partial_sums(&point_weights(order, k, radius, dist)?, cos_t, &[order])?[0])
}

/// Fixed-order partial sum of [`rigid_sphere_plane`].
pub fn rigid_sphere_plane_order(cos_t: f64, k: f64, radius: f64, order: usize) -> Result<Complex64> {
    Ok(partial_sums(&plane_weights(order, k, radius)?, cos_t, &[order])?[0])
}
