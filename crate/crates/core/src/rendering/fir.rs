use std::path::Path;

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{mic_weights, RenderMode};
use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::estimation::EstimatorState;
use crate::hrtf::HrtfProvider;
use crate::metrics::{truncation_order, DEFAULT_RW, MAX_ORDER};
use crate::special_fn::EulerAngles;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Window {
    /// Cosine-tapered window; `ratio` is the tapered fraction of the length.
    Tukey { ratio: f64 },
    Rect,
}

impl Window {
    fn value(&self, i: usize, len: usize) -> f64 {
        match *self {
            Window::Rect => 1.0,
            Window::Tukey { ratio } => {
                if ratio <= 0.0 || len < 2 {
                    return 1.0;
                }
                let x = i as f64 / (len - 1) as f64;
                let edge = ratio.min(1.0) / 2.0;
                if x < edge {
                    0.5 * (1.0 - (std::f64::consts::PI * x / edge).cos())
                } else if x > 1.0 - edge {
                    0.5 * (1.0 - (std::f64::consts::PI * (1.0 - x) / edge).cos())
                } else {
                    1.0
                }
            }
        }
    }
}

/// Parameters of the frequency-sampling filter design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterDesign {
    pub sample_rate: f64,
    pub nfft: usize,
    /// Upper band edge, Hz. Above it the response ramps linearly to zero over one octave.
    pub band_hz: f64,
    pub window: Window,
    pub mode: RenderMode,
    /// `None` selects the trace-scaled default.
    pub lambda: Option<f64>,
    /// Fixed rendering order; `None` applies the truncation rule per bin.
    pub order: Option<usize>,
    pub r_w: f64,
    pub sound_speed: f64,
}

impl Default for FilterDesign {
    fn default() -> Self {
        FilterDesign {
            sample_rate: 48000.0,
            nfft: 4096,
            band_hz: 1600.0,
            window: Window::Tukey { ratio: 0.25 },
            mode: RenderMode::Sph,
            lambda: None,
            order: None,
            r_w: DEFAULT_RW,
            sound_speed: crate::simulate::SOUND_SPEED,
        }
    }
}

impl FilterDesign {
    pub fn validate(&self) -> Result<()> {
        if self.nfft < 16 || !self.nfft.is_power_of_two() {
            return Err(Error::InvalidInput(format!("nfft must be a power of two >= 16, got {}", self.nfft)));
        }
        if !(self.sample_rate > 0.0) || !(self.sound_speed > 0.0) {
            return Err(Error::InvalidInput("sample rate and sound speed must be positive".into()));
        }
        if !(self.band_hz > 0.0) || self.band_hz > self.sample_rate / 2.0 {
            return Err(Error::InvalidInput(format!("band edge {} Hz must lie in (0, Nyquist = {} Hz]", self.band_hz, self.sample_rate / 2.0)));
        }
        if let Window::Tukey { ratio } = self.window {
            if !(0.0..=1.0).contains(&ratio) {
                return Err(Error::InvalidInput(format!("Tukey ratio must lie in [0, 1], got {ratio}")));
            }
        }
        Ok(())
    }

    pub fn bin_freq(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate / self.nfft as f64
    }

    fn rolloff(&self, f: f64) -> f64 {
        if f <= self.band_hz {
            1.0
        } else {
            (1.0 - (f - self.band_hz) / self.band_hz).max(0.0)
        }
    }

    /// Rendering order at wavenumber `k`.
    pub fn order_at(&self, k: f64) -> Result<usize> {
        match self.order {
            Some(n) => Ok(n),
            None => truncation_order(k, self.r_w, MAX_ORDER),
        }
    }
}

/// MIMO FIR filters from every microphone to both ears.
#[derive(Debug, Clone, PartialEq)]
pub struct BinauralFilterBank {
    /// `[ear][mic][tap]` flattened.
    pub taps: Vec<f64>,
    pub n_mics: usize,
    pub nfft: usize,
    pub sample_rate: f64,
    /// Modeled delay in samples (`nfft / 2`).
    pub delay: usize,
    pub band_hz: f64,
    pub mode: RenderMode,
}

/// Per-microphone gains for both ears at one frequency.
fn design_bin(
    geom: &ArrayGeometry,
    target: &Vector3<f64>,
    angles: &EulerAngles,
    hrtf: &dyn HrtfProvider,
    design: &FilterDesign,
    f: f64,
) -> Result<[DVector<Complex64>; 2]> {
    let k = 2.0 * std::f64::consts::PI * f / design.sound_speed;
    let order = design.order_at(k)?.min(hrtf.order());
    let est = EstimatorState::new(geom, k, order, design.lambda)?;
    let h = hrtf.slice_at(f, design.sound_speed)?;
    mic_weights(&est, target, angles, &h, design.mode)
}

/// Frequency-sampling design: per-bin gains from the rendering chain, rolled
/// off above the band edge, made Hermitian, inverse-transformed, shifted by
/// `nfft / 2` and windowed.
pub fn synth_fir_filters(
    geom: &ArrayGeometry,
    target: &Vector3<f64>,
    angles: &EulerAngles,
    hrtf: &dyn HrtfProvider,
    design: &FilterDesign,
) -> Result<BinauralFilterBank> {
    design.validate()?;
    geom.validate()?;
    let nfft = design.nfft;
    let half = nfft / 2;
    let i_mics = geom.len();
    let last = (1..half).take_while(|&b| design.rolloff(design.bin_freq(b)) > 0.0).last().unwrap_or(0);
    let bins: Vec<[DVector<Complex64>; 2]> = (1..=last)
        .into_par_iter()
        .map(|b| {
            let f = design.bin_freq(b);
            let [l, r] = design_bin(geom, target, angles, hrtf, design, f)?;
            let g = design.rolloff(f);
            Ok([l * Complex64::new(g, 0.0), r * Complex64::new(g, 0.0)])
        })
        .collect::<Result<Vec<_>>>()?;

    let planner_fft = FftPlanner::<f64>::new().plan_fft_inverse(nfft);
    let mut taps = vec![0.0; 2 * i_mics * nfft];
    let window: Vec<f64> = (0..nfft).map(|i| design.window.value(i, nfft)).collect();
    let zero = Complex64::new(0.0, 0.0);
    for ear in 0..2 {
        for mic in 0..i_mics {
            let mut spec = vec![zero; nfft];
            for (idx, b) in bins.iter().enumerate() {
                spec[idx + 1] = b[ear][mic];
            }
            spec[0] = Complex64::new(spec[1].re, 0.0);
            spec[half] = Complex64::new(spec[half - 1].re, 0.0);
            for b in 1..half {
                spec[nfft - b] = spec[b].conj();
            }
            planner_fft.process(&mut spec);
            let out = &mut taps[(ear * i_mics + mic) * nfft..(ear * i_mics + mic + 1) * nfft];
            for (t, o) in out.iter_mut().enumerate() {
                let src = (t + nfft - half) % nfft;
                *o = spec[src].re / nfft as f64 * window[t];
            }
        }
    }
    Ok(BinauralFilterBank { taps, n_mics: i_mics, nfft, sample_rate: design.sample_rate, delay: half, band_hz: design.band_hz, mode: design.mode })
}

impl BinauralFilterBank {
    pub fn taps(&self, ear: usize, mic: usize) -> &[f64] {
        let start = (ear * self.n_mics + mic) * self.nfft;
        &self.taps[start..start + self.nfft]
    }

    /// Response of one filter at `freq_hz`, with the modeled delay removed.
    pub fn frequency_response(&self, ear: usize, mic: usize, freq_hz: f64) -> Complex64 {
        let w = 2.0 * std::f64::consts::PI * freq_hz / self.sample_rate;
        let h: Complex64 = self.taps(ear, mic).iter().enumerate().map(|(t, &v)| Complex64::from_polar(v, -w * t as f64)).sum();
        h * Complex64::from_polar(1.0, w * self.delay as f64)
    }

    /// Sums every microphone signal filtered to each ear; output length
    /// `len + nfft - 1`.
    pub fn apply(&self, signals: &[Vec<f64>]) -> Result<[Vec<f64>; 2]> {
        if signals.len() != self.n_mics {
            return Err(Error::InvalidInput(format!("{} input channels for a {}-mic filter bank", signals.len(), self.n_mics)));
        }
        let len = signals.iter().map(|s| s.len()).max().unwrap_or(0);
        if signals.iter().any(|s| s.len() != len) {
            return Err(Error::InvalidInput("input channels differ in length".into()));
        }
        let out_len = len + self.nfft - 1;
        let size = out_len.next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let spectrum = |x: &[f64]| {
            let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            buf.resize(size, Complex64::new(0.0, 0.0));
            fwd.process(&mut buf);
            buf
        };
        let inputs: Vec<Vec<Complex64>> = signals.iter().map(|s| spectrum(s)).collect();
        let mut result = [Vec::new(), Vec::new()];
        for (ear, slot) in result.iter_mut().enumerate() {
            let mut acc = vec![Complex64::new(0.0, 0.0); size];
            for (mic, x) in inputs.iter().enumerate() {
                let h = spectrum(self.taps(ear, mic));
                for (a, (xv, hv)) in acc.iter_mut().zip(x.iter().zip(&h)) {
                    *a += xv * hv;
                }
            }
            inv.process(&mut acc);
            *slot = acc[..out_len].iter().map(|z| z.re / size as f64).collect();
        }
        Ok(result)
    }

    /// Multichannel float32 WAV; channel `ear * n_mics + mic`, all left-ear
    /// filters first.
    pub fn write_wav(&self, path: &Path) -> Result<()> {
        let channels = u16::try_from(2 * self.n_mics).map_err(|_| Error::InvalidInput("too many channels for WAV".into()))?;
        let spec = hound::WavSpec { channels, sample_rate: self.sample_rate as u32, bits_per_sample: 32, sample_format: hound::SampleFormat::Float };
        let mut w = hound::WavWriter::create(path, spec).map_err(wav_err)?;
        for t in 0..self.nfft {
            for ch in 0..2 * self.n_mics {
                w.write_sample(self.taps[ch * self.nfft + t] as f32).map_err(wav_err)?;
            }
        }
        w.finalize().map_err(wav_err)
    }

    /// JSON sidecar describing the WAV layout.
    pub fn sidecar(&self, geometry_hash: &str) -> serde_json::Value {
        json!({
            "format_version": 1,
            "sample_rate": self.sample_rate,
            "nfft": self.nfft,
            "delay_samples": self.delay,
            "band_hz": self.band_hz,
            "mode": self.mode,
            "n_mics": self.n_mics,
            "channel_order": "channel = ear * n_mics + mic; ear 0 = left, 1 = right",
            "geometry_sha256": geometry_hash,
        })
    }
}

/// Stereo float32 WAV.
pub fn write_stereo_wav(path: &Path, left: &[f64], right: &[f64], sample_rate: f64) -> Result<()> {
    if left.len() != right.len() {
        return Err(Error::InvalidInput("stereo channels differ in length".into()));
    }
    let spec = hound::WavSpec { channels: 2, sample_rate: sample_rate as u32, bits_per_sample: 32, sample_format: hound::SampleFormat::Float };
    let mut w = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for (l, r) in left.iter().zip(right) {
        w.write_sample(*l as f32).map_err(wav_err)?;
        w.write_sample(*r as f32).map_err(wav_err)?;
    }
    w.finalize().map_err(wav_err)
}

fn wav_err(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::InvalidInput(format!("wav: {other}")),
    }
}
