use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const UPSAMPLE: usize = 4;

fn fft_len(n: usize) -> usize {
    (2 * n).next_power_of_two().max(2)
}

fn forward(x: &[f64], len: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf
}

fn inverse(mut buf: Vec<Complex64>) -> Vec<f64> {
    let len = buf.len();
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    buf.iter().map(|z| z.re / len as f64).collect()
}

/// Zero-phase FFT brickwall: every component above `cutoff_hz` is removed.
/// The signal is zero-padded to at least twice its length first.
pub fn lowpass_brickwall(x: &[f64], sample_rate: f64, cutoff_hz: f64) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let len = fft_len(x.len());
    let mut spec = forward(x, len);
    for (i, z) in spec.iter_mut().enumerate() {
        let bin = i.min(len - i);
        if bin as f64 * sample_rate / len as f64 > cutoff_hz {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    let mut y = inverse(spec);
    y.truncate(x.len());
    y
}

/// Band-limited interpolation by `factor` through spectral zero-padding.
pub fn upsample(x: &[f64], factor: usize) -> Vec<f64> {
    if factor <= 1 || x.is_empty() {
        return x.to_vec();
    }
    let len = fft_len(x.len());
    let spec = forward(x, len);
    let big = len * factor;
    let mut out = vec![Complex64::new(0.0, 0.0); big];
    let half = len / 2;
    out[..half].copy_from_slice(&spec[..half]);
    out[big - half + 1..].copy_from_slice(&spec[half + 1..]);
    // split the Nyquist bin between both halves
    out[half] = spec[half] * 0.5;
    out[big - half] = spec[half] * 0.5;
    let mut y: Vec<f64> = inverse(out).into_iter().map(|v| v * factor as f64).collect();
    y.truncate(x.len() * factor);
    y
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Cross-correlation `c(τ) = Σ_t a(t) b(t + τ)` for `|τ| < n`, indexed by `τ + n - 1`.
fn xcorr(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let len = fft_len(n);
    let fa = forward(a, len);
    let fb = forward(b, len);
    let c = inverse(fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect());
    (0..2 * n - 1)
        .map(|i| {
            let tau = i as isize - (n as isize - 1);
            c[tau.rem_euclid(len as isize) as usize]
        })
        .collect()
}

fn argmax_lag(c: &[f64], n: usize) -> isize {
    // ties resolve toward the smallest |τ|, then toward negative τ
    let mut best = 0usize;
    for i in 0..c.len() {
        let (ti, tb) = (i as isize - (n as isize - 1), best as isize - (n as isize - 1));
        if c[i] > c[best] || (c[i] == c[best] && ti.abs() < tb.abs()) {
            best = i;
        }
    }
    best as isize - (n as isize - 1)
}

fn check_pair(left: &[f64], right: &[f64]) -> Result<()> {
    if left.len() != right.len() {
        return Err(Error::InvalidInput(format!("channel lengths differ ({} vs {})", left.len(), right.len())));
    }
    Ok(())
}

fn check_energy(e: f64, which: &str) -> Result<()> {
    if !(e > 1e-300) {
        return Err(Error::InvalidInput(format!("{which} channel is silent after low-pass filtering")));
    }
    Ok(())
}

/// Interaural time difference in seconds: the lag maximizing
/// `Σ y_L(t) y_R(t + τ) / √(E_L E_R)` after low-pass filtering, on a 4×
/// upsampled grid. Positive when the right ear lags.
pub fn itd(left: &[f64], right: &[f64], sample_rate: f64, lowpass_hz: f64) -> Result<f64> {
    check_pair(left, right)?;
    let l = upsample(&lowpass_brickwall(left, sample_rate, lowpass_hz), UPSAMPLE);
    let r = upsample(&lowpass_brickwall(right, sample_rate, lowpass_hz), UPSAMPLE);
    check_energy(energy(&l), "left")?;
    check_energy(energy(&r), "right")?;
    let c = xcorr(&l, &r);
    Ok(argmax_lag(&c, l.len()) as f64 / (UPSAMPLE as f64 * sample_rate))
}

/// Interaural level difference `10 log10(E_L / E_R)` in dB after low-pass filtering.
pub fn ild(left: &[f64], right: &[f64], sample_rate: f64, lowpass_hz: f64) -> Result<f64> {
    check_pair(left, right)?;
    let el = energy(&lowpass_brickwall(left, sample_rate, lowpass_hz));
    let er = energy(&lowpass_brickwall(right, sample_rate, lowpass_hz));
    check_energy(el, "left")?;
    check_energy(er, "right")?;
    Ok(10.0 * (el / er).log10())
}

/// Integer lag `τ` maximizing `Σ truth(t) est(t + τ)`: how many samples `est` lags.
pub fn best_integer_lag(est: &[f64], truth: &[f64]) -> isize {
    let n = est.len().max(truth.len());
    argmax_lag(&xcorr(truth, est), n)
}

/// `est` shifted by its [`best_integer_lag`] so it lines up with `truth`; vacated samples are zero.
pub fn align_integer_lag(est: &[f64], truth: &[f64]) -> (isize, Vec<f64>) {
    let lag = best_integer_lag(est, truth);
    let out = (0..est.len())
        .map(|t| {
            let src = t as isize + lag;
            if src >= 0 && (src as usize) < est.len() {
                est[src as usize]
            } else {
                0.0
            }
        })
        .collect();
    (lag, out)
}
