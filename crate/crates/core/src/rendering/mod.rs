//! Binaural rendering from expansion coefficients.
//!
//! Both renderers reduce to `y = Σ w_n α_n^m H_n^m` with per-order weights:
//! plane-wave decomposition (PLN) uses `w_n = √(4π) i^{-n}`, the single-layer
//! (SPH) form uses `w_n = √(4π) i / (k h_n(kR_s))` and accounts for the
//! distance at which the HRTFs were measured.
//!
//! Rotations are applied to the field, actively: passing a yaw of `ψ` renders
//! the scene as if every source had moved by `+ψ` in azimuth, which is what a
//! listener sees after turning the head by `-ψ`.

mod fir;

use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::EstimatorState;
use crate::hrtf::{HrtfShSlice, LEFT, RIGHT};
use crate::special_fn::{sh_count, sph_hankel2_array, EulerAngles, ShIndex};
use crate::wavefield::{i_pow, rotate_coeffs, rotation_matrix, ShCoeffVec};

pub use fir::{synth_fir_filters, write_stereo_wav, BinauralFilterBank, FilterDesign, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    Pln,
    Sph,
}

/// Diagonal weights `Λ`, expanded to one entry per `(n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderWeights {
    pub mode: RenderMode,
    pub order: usize,
    /// HRTF measurement radius; used by SPH only.
    pub radius: Option<f64>,
    pub weights: DVector<Complex64>,
}

impl RenderWeights {
    pub fn pln(order: usize) -> Self {
        let s = (4.0 * PI).sqrt();
        let per_n: Vec<Complex64> = (0..=order).map(|n| i_pow(-(n as i64)) * s).collect();
        Self::expand(RenderMode::Pln, order, None, &per_n)
    }

    pub fn sph(order: usize, k: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !(k > 0.0) {
            return Err(Error::Domain(format!("SPH weights need k > 0 and R_s > 0 (k = {k}, R_s = {radius})")));
        }
        let h = sph_hankel2_array(order, k * radius)?;
        let num = Complex64::new(0.0, (4.0 * PI).sqrt());
        let per_n: Vec<Complex64> = h.iter().map(|hn| num / (hn * k)).collect();
        Ok(Self::expand(RenderMode::Sph, order, Some(radius), &per_n))
    }

    pub fn new(mode: RenderMode, order: usize, k: f64, radius: f64) -> Result<Self> {
        match mode {
            RenderMode::Pln => Ok(Self::pln(order)),
            RenderMode::Sph => Self::sph(order, k, radius),
        }
    }

    fn expand(mode: RenderMode, order: usize, radius: Option<f64>, per_n: &[Complex64]) -> Self {
        let weights = DVector::from_iterator(sh_count(order), (0..sh_count(order)).map(|q| per_n[ShIndex::from_linear(q).n]));
        RenderWeights { mode, order, radius, weights }
    }

    /// Weight of order `n`.
    pub fn per_order(&self, n: usize) -> Complex64 {
        self.weights[n * n]
    }
}

/// `Σ w_n α_n^m H_n^m` for both ears over the orders all three inputs share.
pub fn render_with(alpha: &ShCoeffVec, h: &HrtfShSlice, w: &RenderWeights) -> [Complex64; 2] {
    let q = sh_count(alpha.order().min(h.order).min(w.order));
    let ear = |e: usize| -> Complex64 {
        let hv = h.ear(e);
        (0..q).map(|i| w.weights[i] * alpha.coeffs[i] * hv[i]).sum()
    };
    [ear(LEFT), ear(RIGHT)]
}

pub fn render_pln(alpha: &ShCoeffVec, h: &HrtfShSlice) -> [Complex64; 2] {
    render_with(alpha, h, &RenderWeights::pln(alpha.order().min(h.order)))
}

pub fn render_sph(alpha: &ShCoeffVec, h: &HrtfShSlice, radius: f64, k: f64) -> Result<[Complex64; 2]> {
    Ok(render_with(alpha, h, &RenderWeights::sph(alpha.order().min(h.order), k, radius)?))
}

fn weights_for(est: &EstimatorState, h: &HrtfShSlice, mode: RenderMode) -> Result<RenderWeights> {
    RenderWeights::new(mode, est.order.min(h.order), est.k, h.radius)
}

/// Row functionals `g_L, g_R` with `y = gᵀ (Ψ + λI)⁻¹ s`: the product
/// `ψᵀ Λ R̄ Ξ̄(r)` evaluated right to left on vectors.
pub fn render_rows(est: &EstimatorState, target: &Vector3<f64>, angles: &EulerAngles, h: &HrtfShSlice, mode: RenderMode) -> Result<[DVector<Complex64>; 2]> {
    let w = weights_for(est, h, mode)?;
    let order = w.order;
    let q = sh_count(order);
    let xi = crate::estimation::build_xi(&est.geometry, target, est.k, order);
    let rot = rotation_matrix(order, angles);
    let row = |e: usize| {
        let lam_psi = DVector::from_iterator(q, (0..q).map(|i| w.weights[i] * h.ear(e)[i]));
        let u = rot.transpose() * lam_psi;
        xi.transpose() * u
    };
    Ok([row(LEFT), row(RIGHT)])
}

/// Factored path: `ψᵀ Λ R̄ Ξ̄(r) (Ψ + λI)⁻¹ s`.
pub fn render_full(
    s: &DVector<Complex64>,
    est: &EstimatorState,
    target: &Vector3<f64>,
    angles: &EulerAngles,
    h: &HrtfShSlice,
    mode: RenderMode,
) -> Result<[Complex64; 2]> {
    let w = est.solve(s)?;
    let [gl, gr] = render_rows(est, target, angles, h, mode)?;
    Ok([gl.dot(&w), gr.dot(&w)])
}

/// Composed path: estimate, rotate, then render.
pub fn render_composed(
    s: &DVector<Complex64>,
    est: &EstimatorState,
    target: &Vector3<f64>,
    angles: &EulerAngles,
    h: &HrtfShSlice,
    mode: RenderMode,
) -> Result<[Complex64; 2]> {
    let w = weights_for(est, h, mode)?;
    let alpha = est.coeffs_at_order(&est.solve(s)?, target, w.order);
    Ok(render_with(&rotate_coeffs(&alpha, angles), h, &w))
}

/// Per-microphone complex gains `m_ear` with `y_ear = m_earᵀ s`.
pub fn mic_weights(est: &EstimatorState, target: &Vector3<f64>, angles: &EulerAngles, h: &HrtfShSlice, mode: RenderMode) -> Result<[DVector<Complex64>; 2]> {
    let [gl, gr] = render_rows(est, target, angles, h, mode)?;
    Ok([est.solve_transpose(&gl)?, est.solve_transpose(&gr)?])
}
