//! Band-limited impulse responses built by frequency sampling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Gain applied to each bin: flat up to `f_max`, a cos² taper over the next
/// quarter of `f_max`, zero beyond.
pub fn taper_gain(f: f64, f_max: f64) -> f64 {
    let edge = 1.25 * f_max;
    if f <= f_max {
        1.0
    } else if f >= edge {
        0.0
    } else {
        (0.5 * PI * (f - f_max) / (edge - f_max)).cos().powi(2)
    }
}

/// Real impulse responses of length `nfft` whose spectra at bin frequencies
/// `b fs / nfft` equal `response(f)` times [`taper_gain`]. `response` returns
/// one value per channel; DC and Nyquist are left empty.
pub fn impulse_responses<F>(nfft: usize, sample_rate: f64, f_max: f64, response: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<Complex64>> + Sync,
{
    if nfft < 4 || nfft % 2 != 0 {
        return Err(Error::InvalidInput(format!("nfft must be even and at least 4, got {nfft}")));
    }
    if !(f_max > 0.0) || 1.25 * f_max >= sample_rate / 2.0 {
        return Err(Error::InvalidInput(format!("band {f_max} Hz (plus taper) must stay below Nyquist")));
    }
    let half = nfft / 2;
    let bin_f = |b: usize| b as f64 * sample_rate / nfft as f64;
    let last = (1..half).take_while(|&b| taper_gain(bin_f(b), f_max) > 0.0).last().unwrap_or(0);
    let bins: Vec<Vec<Complex64>> = (1..=last)
        .into_par_iter()
        .map(|b| {
            let g = taper_gain(bin_f(b), f_max);
            Ok(response(bin_f(b))?.into_iter().map(|z| z * g).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let channels = bins.first().map_or(0, |v| v.len());
    if bins.iter().any(|v| v.len() != channels) {
        return Err(Error::InvalidInput("response returned a varying number of channels".into()));
    }
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(nfft);
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(channels);
    for ch in 0..channels {
        let mut spec = vec![zero; nfft];
        for (i, v) in bins.iter().enumerate() {
            spec[i + 1] = v[ch];
            spec[nfft - i - 1] = v[ch].conj();
        }
        ifft.process(&mut spec);
        out.push(spec.iter().map(|z| z.re / nfft as f64).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delayed_tone_response() {
        // pure delay of 37 samples within the band
        let fs = 8000.0;
        let d = 37.0;
        let h = impulse_responses(256, fs, 2000.0, |f| Ok(vec![Complex64::from_polar(1.0, -2.0 * PI * f * d / fs)])).unwrap();
        let peak = h[0].iter().enumerate().fold((0, 0.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert_eq!(peak.0, 37);
    }

    #[test]
    fn taper_edges() {
        assert_eq!(taper_gain(100.0, 1000.0), 1.0);
        assert_eq!(taper_gain(1250.0, 1000.0), 0.0);
        assert!((taper_gain(1125.0, 1000.0) - 0.5).abs() < 1e-12);
        assert!(impulse_responses(256, 8000.0, 3500.0, |_| Ok(vec![])).is_err());
    }
}
