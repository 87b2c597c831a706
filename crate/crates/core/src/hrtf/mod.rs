//! Head-related transfer functions: grid-sampled sets, their spherical-harmonic
//! spectra, and an analytic rigid-sphere head.
//!
//! An HRTF here is the raw pressure at an ear due to a unit point source
//! `e^{-ikR}/(4πR)` on a sphere of radius `R_s` about the head center; no
//! free-field normalization is applied. Spectra follow
//! `h(ŝ) = Σ H_n^m Y_n^m(ŝ)^*`.
//!
//! Head frame: the listener faces +x, the left ear is toward +y and +z is up.

mod fit;
pub mod grid;
mod io;
mod synthetic;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special_fn::sh_count;

pub use fit::{default_gamma, fit_sh, fit_sh_with, order_weights, FitOptions};
pub use io::{hrtf_set_from_csv, read_hrtf_bundle, write_hrtf_bundle};
pub use synthetic::{synth_rigid_sphere_hrtf, SyntheticHead, SyntheticHrtf};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Grid-sampled HRTFs, `responses[ear][freq][dir]` flattened in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct HrtfSet {
    pub radius: f64,
    /// `(zenith, azimuth)` in radians.
    pub directions: Vec<(f64, f64)>,
    pub freqs: Vec<f64>,
    pub responses: Vec<Complex64>,
    pub sample_rate: f64,
}

impl HrtfSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidInput("HRTF radius must be positive".into()));
        }
        if self.freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("HRTF frequencies must be strictly increasing".into()));
        }
        let expected = 2 * self.freqs.len() * self.directions.len();
        if self.responses.len() != expected {
            return Err(Error::InvalidInput(format!("expected {expected} responses, found {}", self.responses.len())));
        }
        Ok(())
    }

    pub fn index(&self, ear: usize, freq: usize, dir: usize) -> usize {
        (ear * self.freqs.len() + freq) * self.directions.len() + dir
    }

    pub fn response(&self, ear: usize, freq: usize, dir: usize) -> Complex64 {
        self.responses[self.index(ear, freq, dir)]
    }

    /// Responses of one ear at one frequency, one per direction.
    pub fn column(&self, ear: usize, freq: usize) -> &[Complex64] {
        let start = self.index(ear, freq, 0);
        &self.responses[start..start + self.directions.len()]
    }
}

/// Spherical-harmonic spectra `coeffs[ear][freq][(N+1)²]` flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct HrtfShSpectrum {
    pub order: usize,
    pub radius: f64,
    pub freqs: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

/// Both ears' spectra at a single frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct HrtfShSlice {
    pub order: usize,
    pub radius: f64,
    pub left: DVector<Complex64>,
    pub right: DVector<Complex64>,
}

impl HrtfShSlice {
    pub fn ear(&self, ear: usize) -> &DVector<Complex64> {
        if ear == LEFT {
            &self.left
        } else {
            &self.right
        }
    }

    /// Resynthesized response `Σ H_n^m Y_n^m(ŝ)^*` for direction `(θ, φ)`.
    pub fn evaluate(&self, ear: usize, theta: f64, phi: f64) -> Complex64 {
        let y = crate::special_fn::sph_harmonics_all(self.order, theta, phi);
        self.ear(ear).iter().zip(y.iter()).map(|(h, y)| h * y.conj()).sum()
    }

    pub fn truncated(&self, order: usize) -> HrtfShSlice {
        let n = sh_count(order.min(self.order));
        HrtfShSlice {
            order: order.min(self.order),
            radius: self.radius,
            left: self.left.rows(0, n).into_owned(),
            right: self.right.rows(0, n).into_owned(),
        }
    }
}

impl HrtfShSpectrum {
    pub fn slice(&self, freq_index: usize) -> HrtfShSlice {
        let q = sh_count(self.order);
        let nf = self.freqs.len();
        let take = |ear: usize| {
            let start = (ear * nf + freq_index) * q;
            DVector::from_column_slice(&self.coeffs[start..start + q])
        };
        HrtfShSlice { order: self.order, radius: self.radius, left: take(LEFT), right: take(RIGHT) }
    }

    /// Spectrum at `freq_hz`. Between grid frequencies the delay term
    /// `e^{-ikR_s}` is removed, the remainder interpolated linearly, and the
    /// delay restored; below the first grid frequency the remainder is held.
    /// `sound_speed` converts frequencies to wavenumbers.
    pub fn slice_at(&self, freq_hz: f64, sound_speed: f64) -> Result<HrtfShSlice> {
        let f = &self.freqs;
        if f.is_empty() {
            return Err(Error::InvalidInput("empty HRTF spectrum".into()));
        }
        if let Some(i) = f.iter().position(|&v| (v - freq_hz).abs() <= 1e-9 * v.abs().max(1.0)) {
            return Ok(self.slice(i));
        }
        if freq_hz > f[f.len() - 1] || !(freq_hz >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "frequency {freq_hz} Hz outside the HRTF range 0..{} Hz",
                f[f.len() - 1]
            )));
        }
        let k_of = |fr: f64| 2.0 * std::f64::consts::PI * fr / sound_speed;
        if freq_hz < f[0] {
            // held flat below the table, delay term excluded
            let s = self.slice(0);
            let c = Complex64::from_polar(1.0, (k_of(f[0]) - k_of(freq_hz)) * self.radius);
            return Ok(HrtfShSlice { left: s.left * c, right: s.right * c, ..s });
        }
        let hi = f.iter().position(|&v| v > freq_hz).unwrap();
        let lo = hi - 1;
        let t = (freq_hz - f[lo]) / (f[hi] - f[lo]);
        let (a, b) = (self.slice(lo), self.slice(hi));
        let ca = Complex64::from_polar(1.0, k_of(f[lo]) * self.radius);
        let cb = Complex64::from_polar(1.0, k_of(f[hi]) * self.radius);
        let back = Complex64::from_polar(1.0, -k_of(freq_hz) * self.radius);
        let mix = |x: &DVector<Complex64>, y: &DVector<Complex64>| {
            (x * ca * Complex64::new(1.0 - t, 0.0) + y * cb * Complex64::new(t, 0.0)) * back
        };
        Ok(HrtfShSlice { order: self.order, radius: self.radius, left: mix(&a.left, &b.left), right: mix(&a.right, &b.right) })
    }
}

/// Anything that can supply HRTF spectra at arbitrary frequencies.
pub trait HrtfProvider: Sync {
    fn radius(&self) -> f64;
    fn order(&self) -> usize;
    fn slice_at(&self, freq_hz: f64, sound_speed: f64) -> Result<HrtfShSlice>;
}

impl HrtfProvider for HrtfShSpectrum {
    fn radius(&self) -> f64 {
        self.radius
    }
    fn order(&self) -> usize {
        self.order
    }
    fn slice_at(&self, freq_hz: f64, sound_speed: f64) -> Result<HrtfShSlice> {
        HrtfShSpectrum::slice_at(self, freq_hz, sound_speed)
    }
}
