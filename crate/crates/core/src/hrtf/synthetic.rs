use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{HrtfProvider, HrtfSet, HrtfShSlice, LEFT, RIGHT};
use crate::error::{Error, Result};
use crate::wavefield::scattering::{rigid_sphere_plane, rigid_sphere_point};
use crate::special_fn::{sh_count, sph_hankel2_array, sph_hankel2_deriv_array, sph_harmonics_all, sph_to_unit, ShIndex};

/// Rigid sphere with two point "ears" on its surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticHead {
    pub radius: f64,
    /// Azimuths of the left and right ear in the horizontal plane.
    pub ear_azimuths: (f64, f64),
}

impl Default for SyntheticHead {
    fn default() -> Self {
        SyntheticHead { radius: 0.0875, ear_azimuths: (PI / 2.0, -PI / 2.0) }
    }
}

impl SyntheticHead {
    pub fn ear_direction(&self, ear: usize) -> Vector3<f64> {
        let az = if ear == LEFT { self.ear_azimuths.0 } else { self.ear_azimuths.1 };
        sph_to_unit(PI / 2.0, az)
    }

    /// Ear pressures due to a unit point source at `src` (head-centered coordinates).
    pub fn point_source_pressure(&self, src: &Vector3<f64>, k: f64) -> Result<[Complex64; 2]> {
        let d = src.norm();
        if d <= self.radius {
            return Err(Error::Domain(format!("source at {d} m lies inside the head (radius {} m)", self.radius)));
        }
        let dir = src / d;
        let at = |ear| rigid_sphere_point(dir.dot(&self.ear_direction(ear)), k, self.radius, d);
        Ok([at(LEFT)?, at(RIGHT)?])
    }

    /// Ear pressures for the unit plane wave arriving from `direction`.
    pub fn plane_wave_pressure(&self, direction: &Vector3<f64>, k: f64) -> Result<[Complex64; 2]> {
        let dir = direction.normalize();
        let at = |ear| rigid_sphere_plane(dir.dot(&self.ear_direction(ear)), k, self.radius);
        Ok([at(LEFT)?, at(RIGHT)?])
    }

    /// `b_n = -k h_n(kR_s) / ((ka)² h_n'(ka))` for `n <= order`.
    fn radial_weights(&self, k: f64, r_s: f64, order: usize) -> Result<Vec<Complex64>> {
        let ka = k * self.radius;
        let h = sph_hankel2_array(order, k * r_s)?;
        let hd = sph_hankel2_deriv_array(order, ka)?;
        Ok((0..=order).map(|n| -h[n] * k / (hd[n] * ka * ka)).collect())
    }

    /// Exact spectra `H_n^m = b_n Y_n^m(ê)` for sources on the sphere of radius `r_s`.
    pub fn sh_slice(&self, k: f64, r_s: f64, order: usize) -> Result<HrtfShSlice> {
        let b = self.radial_weights(k, r_s, order)?;
        let ear = |e: usize| {
            let (t, p) = (PI / 2.0, if e == LEFT { self.ear_azimuths.0 } else { self.ear_azimuths.1 });
            let y = sph_harmonics_all(order, t, p);
            DVector::from_iterator(sh_count(order), y.iter().enumerate().map(|(q, y)| b[ShIndex::from_linear(q).n] * y))
        };
        Ok(HrtfShSlice { order, radius: r_s, left: ear(LEFT), right: ear(RIGHT) })
    }

    /// Provider of exact spectra at a fixed measurement radius and order.
    pub fn provider(&self, r_s: f64, order: usize) -> SyntheticHrtf {
        SyntheticHrtf { head: *self, r_s, order }
    }
}

/// Analytic HRTF spectra of a [`SyntheticHead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticHrtf {
    pub head: SyntheticHead,
    pub r_s: f64,
    pub order: usize,
}

impl HrtfProvider for SyntheticHrtf {
    fn radius(&self) -> f64 {
        self.r_s
    }
    fn order(&self) -> usize {
        self.order
    }
    fn slice_at(&self, freq_hz: f64, sound_speed: f64) -> Result<HrtfShSlice> {
        self.head.sh_slice(2.0 * PI * freq_hz / sound_speed, self.r_s, self.order)
    }
}

/// Grid-sampled rigid-sphere HRTFs for sources at distance `r_s`.
pub fn synth_rigid_sphere_hrtf(
    head: &SyntheticHead,
    grid: &[(f64, f64)],
    freqs: &[f64],
    r_s: f64,
    sound_speed: f64,
    sample_rate: f64,
) -> Result<HrtfSet> {
    if head.radius >= r_s {
        return Err(Error::InvalidInput(format!("head radius {} m must be below the source radius {r_s} m", head.radius)));
    }
    let nd = grid.len();
    let per_freq: Vec<Vec<[Complex64; 2]>> = freqs
        .par_iter()
        .map(|&f| {
            let k = 2.0 * PI * f / sound_speed;
            grid.iter().map(|&(t, p)| head.point_source_pressure(&(sph_to_unit(t, p) * r_s), k)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut responses = Vec::with_capacity(2 * freqs.len() * nd);
    for ear in [LEFT, RIGHT] {
        for pf in &per_freq {
            responses.extend(pf.iter().map(|p| p[ear]));
        }
    }
    let set = HrtfSet { radius: r_s, directions: grid.to_vec(), freqs: freqs.to_vec(), responses, sample_rate };
    set.validate()?;
    Ok(set)
}
