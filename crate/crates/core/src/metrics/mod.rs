//! Evaluation measures: NMSE, spectral distortion, ITD, ILD and the
//! rendering truncation-order rule.

mod interaural;
mod report;

use std::f64::consts::E;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use interaural::{align_integer_lag, best_integer_lag, itd, ild, lowpass_brickwall, upsample};
pub use report::{write_metric_csv, MetricRow};

/// Bins whose reference magnitude is below this are excluded.
pub const EPS: f64 = 1e-30;
/// Reported in place of `-∞` when the estimate is exact.
pub const NMSE_FLOOR_DB: f64 = -300.0;
/// Default listening-area width for the truncation rule, m.
pub const DEFAULT_RW: f64 = 0.45;
pub const MAX_ORDER: usize = 35;

/// `min(⌈e k R_w / 2⌉, cap)`.
pub fn truncation_order(k: f64, r_w: f64, cap: usize) -> Result<usize> {
    if !(k > 0.0) || !(r_w > 0.0) {
        return Err(Error::Domain(format!("truncation order needs k > 0 and R_w > 0 (k = {k}, R_w = {r_w})")));
    }
    Ok(((E * k * r_w / 2.0).ceil() as usize).min(cap))
}

/// Single-bin NMSE in dB; `None` when the reference is (numerically) zero.
pub fn nmse(est: Complex64, truth: Complex64) -> Option<f64> {
    let den = truth.norm_sqr();
    if truth.norm() < EPS {
        return None;
    }
    let num = (est - truth).norm_sqr();
    Some(if num == 0.0 { NMSE_FLOOR_DB } else { (10.0 * (num / den).log10()).max(NMSE_FLOOR_DB) })
}

/// An average over bins plus the number of bins that could not be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averaged {
    pub value: f64,
    pub excluded: usize,
}

/// Mean of per-bin NMSE values in dB.
pub fn mean_nmse(est: &[Complex64], truth: &[Complex64]) -> Result<Averaged> {
    check_lengths(est.len(), truth.len())?;
    let vals: Vec<f64> = est.iter().zip(truth).filter_map(|(e, t)| nmse(*e, *t)).collect();
    if vals.is_empty() {
        return Err(Error::InvalidInput("no bins with a nonzero reference".into()));
    }
    Ok(Averaged { value: vals.iter().sum::<f64>() / vals.len() as f64, excluded: est.len() - vals.len() })
}

/// Divides by the RMS magnitude over bins.
pub fn rms_normalize(y: &[Complex64]) -> Vec<Complex64> {
    let rms = (y.iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len().max(1) as f64).sqrt();
    if rms == 0.0 {
        return y.to_vec();
    }
    y.iter().map(|z| z / rms).collect()
}

/// RMS over bins of `20 log10 |est| / |true|`, optionally after RMS
/// normalization of both spectra. Bins where either magnitude is below
/// [`EPS`] are excluded and counted.
pub fn spectral_distortion(est: &[Complex64], truth: &[Complex64], normalize: bool) -> Result<Averaged> {
    check_lengths(est.len(), truth.len())?;
    if est.is_empty() {
        return Err(Error::InvalidInput("spectral distortion needs at least one bin".into()));
    }
    let (e, t) = if normalize { (rms_normalize(est), rms_normalize(truth)) } else { (est.to_vec(), truth.to_vec()) };
    let mut acc = 0.0;
    let mut used = 0usize;
    for (a, b) in e.iter().zip(&t) {
        if a.norm() < EPS || b.norm() < EPS {
            continue;
        }
        let d = 20.0 * (a.norm() / b.norm()).log10();
        acc += d * d;
        used += 1;
    }
    if used == 0 {
        return Err(Error::InvalidInput("no bins with nonzero magnitude".into()));
    }
    Ok(Averaged { value: (acc / used as f64).sqrt(), excluded: est.len() - used })
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidInput(format!("length mismatch: {a} estimated vs {b} reference bins")));
    }
    Ok(())
}
