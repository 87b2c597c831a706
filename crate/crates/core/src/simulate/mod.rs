//! Free-field forward models: microphone observations and reference binaural
//! signals for point sources and plane waves.

use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{ArrayGeometry, Baffle};
use crate::error::{Error, Result};
use crate::hrtf::{HrtfSet, HrtfShSpectrum, SyntheticHead};
use crate::special_fn::{cart_to_sph, EulerAngles};
use crate::wavefield::scattering::{rigid_sphere_plane, rigid_sphere_point};
use crate::wavefield::{plane_wave_coeffs, point_source_coeffs};

mod time;
pub use time::{impulse_responses, taper_gain};

/// Default speed of sound, m/s.
pub const SOUND_SPEED: f64 = 346.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    /// Unit point source `e^{-ikR}/(4πR)` at a position.
    Point(Vector3<f64>),
    /// Unit plane wave `e^{ik⟨η, r⟩}` arriving from direction `η`.
    PlaneWave(Vector3<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub kind: SourceKind,
    /// Complex gain per scene frequency.
    pub spectrum: Vec<Complex64>,
}

impl Source {
    /// Unit-gain source at every frequency.
    pub fn flat(kind: SourceKind, n_freqs: usize) -> Self {
        Source { kind, spectrum: vec![Complex64::new(1.0, 0.0); n_freqs] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub sources: Vec<Source>,
    pub freqs: Vec<f64>,
    pub sound_speed: f64,
}

impl Scene {
    pub fn new(sources: Vec<Source>, freqs: Vec<f64>) -> Self {
        Scene { sources, freqs, sound_speed: SOUND_SPEED }
    }

    /// 100 Hz steps from `lo` to `hi` inclusive.
    pub fn freq_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + step * i as f64).collect()
    }

    pub fn k(&self, freq_index: usize) -> f64 {
        2.0 * PI * self.freqs[freq_index] / self.sound_speed
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sound_speed > 0.0) {
            return Err(Error::InvalidInput(format!("sound speed must be positive, got {}", self.sound_speed)));
        }
        if self.freqs.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::InvalidInput("frequencies must be positive".into()));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if s.spectrum.len() != self.freqs.len() {
                return Err(Error::InvalidInput(format!("source {i}: {} spectrum values for {} frequencies", s.spectrum.len(), self.freqs.len())));
            }
            if let SourceKind::PlaneWave(d) = s.kind {
                if !(d.norm() > 0.0) {
                    return Err(Error::InvalidInput(format!("source {i}: plane-wave direction must be nonzero")));
                }
            }
        }
        Ok(())
    }
}

/// Microphone signals, `data[freq][mic]` flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub freqs: Vec<f64>,
    pub n_mics: usize,
    pub data: Vec<Complex64>,
}

impl Observation {
    pub fn at(&self, freq_index: usize) -> DVector<Complex64> {
        DVector::from_column_slice(&self.data[freq_index * self.n_mics..(freq_index + 1) * self.n_mics])
    }
}

/// Observation of one unit source at wavenumber `k`.
pub fn observe_source(geom: &ArrayGeometry, kind: &SourceKind, k: f64) -> Result<DVector<Complex64>> {
    let mut out = DVector::zeros(geom.len());
    match geom.baffle {
        None => {
            for (i, m) in geom.mics.iter().enumerate() {
                let alpha = match kind {
                    SourceKind::Point(p) => {
                        if (p - m.position).norm() == 0.0 {
                            return Err(Error::Domain(format!("source coincides with mic {i}")));
                        }
                        point_source_coeffs(p, &m.position, k, m.dir_order())?
                    }
                    SourceKind::PlaneWave(d) => {
                        let eta = d.normalize();
                        plane_wave_coeffs(&eta, &m.position, k, m.dir_order())
                            .scale(Complex64::from_polar(1.0, k * eta.dot(&m.position)))
                    }
                };
                out[i] = m.dir_coeffs.dotc(&alpha.coeffs);
            }
        }
        Some(Baffle::RigidSphere { center, radius }) => {
            for (i, m) in geom.mics.iter().enumerate() {
                if m.dir_order() > 0 {
                    return Err(Error::InvalidInput(format!("mic {i}: directional mics on a rigid baffle are not modeled")));
                }
                let gain = m.dir_coeffs[0].conj();
                let mic_dir = (m.position - center).normalize();
                out[i] = gain
                    * match kind {
                        SourceKind::Point(p) => {
                            let rel = p - center;
                            let d = rel.norm();
                            if d <= radius {
                                return Err(Error::Domain(format!("source at {d:.4} m from the baffle center lies inside the baffle")));
                            }
                            rigid_sphere_point((rel / d).dot(&mic_dir), k, radius, d)?
                        }
                        SourceKind::PlaneWave(dvec) => {
                            let eta = dvec.normalize();
                            rigid_sphere_plane(eta.dot(&mic_dir), k, radius)? * Complex64::from_polar(1.0, k * eta.dot(&center))
                        }
                    };
            }
        }
    }
    Ok(out)
}

/// Observations at every scene frequency, summed over sources.
pub fn simulate_observation(scene: &Scene, geom: &ArrayGeometry) -> Result<Observation> {
    scene.validate()?;
    geom.validate()?;
    let per_freq: Vec<DVector<Complex64>> = (0..scene.freqs.len())
        .into_par_iter()
        .map(|fi| {
            let k = scene.k(fi);
            let mut s = DVector::zeros(geom.len());
            for src in &scene.sources {
                s += observe_source(geom, &src.kind, k)? * src.spectrum[fi];
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut data = Vec::with_capacity(scene.freqs.len() * geom.len());
    for s in &per_freq {
        data.extend(s.iter().copied());
    }
    Ok(Observation { freqs: scene.freqs.clone(), n_mics: geom.len(), data })
}

/// Where the listener is and how the scene is turned around them. The
/// rotation follows the renderer: `angles` act on the scene about `position`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Listener {
    pub position: Vector3<f64>,
    pub angles: EulerAngles,
}

impl Default for Listener {
    fn default() -> Self {
        Listener { position: Vector3::zeros(), angles: EulerAngles::IDENTITY }
    }
}

impl Listener {
    /// A world-frame source position expressed in the head frame.
    pub fn to_head(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.angles.to_matrix() * (p - self.position)
    }

    fn direction_to_head(&self, d: &Vector3<f64>) -> Vector3<f64> {
        self.angles.to_matrix() * d
    }
}

/// Reference ear signals.
#[derive(Debug, Clone, Copy)]
pub enum HeadModel<'a> {
    Synthetic(SyntheticHead),
    /// Grid data: exact node lookup when the source sits on a node at the
    /// table's radius and frequency, otherwise the fitted spectrum at the
    /// source direction (no distance correction).
    Measured { set: &'a HrtfSet, spectrum: &'a HrtfShSpectrum },
}

fn head_response(model: &HeadModel, kind: &SourceKind, listener: &Listener, freq: f64, k: f64, sound_speed: f64) -> Result<[Complex64; 2]> {
    match model {
        HeadModel::Synthetic(head) => match kind {
            SourceKind::Point(p) => head.point_source_pressure(&listener.to_head(p), k),
            SourceKind::PlaneWave(d) => {
                let phase = Complex64::from_polar(1.0, k * d.normalize().dot(&listener.position));
                let [l, r] = head.plane_wave_pressure(&listener.direction_to_head(d), k)?;
                Ok([l * phase, r * phase])
            }
        },
        HeadModel::Measured { set, spectrum } => {
            let SourceKind::Point(p) = kind else {
                return Err(Error::InvalidInput("measured HRTFs only model point sources".into()));
            };
            let (d, t, ph) = cart_to_sph(&listener.to_head(p));
            let fi = set.freqs.iter().position(|&f| (f - freq).abs() <= 1e-9 * f);
            if let Some(fi) = fi {
                if (d - set.radius).abs() <= 1e-9 * set.radius {
                    let u = crate::special_fn::sph_to_unit(t, ph);
                    if let Some(j) = set.directions.iter().position(|&(a, b)| (crate::special_fn::sph_to_unit(a, b) - u).norm() < 1e-9) {
                        return Ok([set.response(0, fi, j), set.response(1, fi, j)]);
                    }
                }
            }
            let s = spectrum.slice_at(freq, sound_speed)?;
            Ok([s.evaluate(0, t, ph), s.evaluate(1, t, ph)])
        }
    }
}

/// Ear signals of the listener for every scene frequency, summed over sources.
pub fn true_binaural(scene: &Scene, model: &HeadModel, listener: &Listener) -> Result<Vec<[Complex64; 2]>> {
    scene.validate()?;
    (0..scene.freqs.len())
        .into_par_iter()
        .map(|fi| {
            let k = scene.k(fi);
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for src in &scene.sources {
                let [l, r] = head_response(model, &src.kind, listener, scene.freqs[fi], k, scene.sound_speed)?;
                acc[0] += l * src.spectrum[fi];
                acc[1] += r * src.spectrum[fi];
            }
            Ok(acc)
        })
        .collect()
}

/// Band-limited microphone impulse responses of one unit source, `[mic][t]`.
pub fn mic_impulse_responses(
    geom: &ArrayGeometry,
    kind: &SourceKind,
    sound_speed: f64,
    sample_rate: f64,
    nfft: usize,
    f_max: f64,
) -> Result<Vec<Vec<f64>>> {
    geom.validate()?;
    impulse_responses(nfft, sample_rate, f_max, |f| Ok(observe_source(geom, kind, 2.0 * PI * f / sound_speed)?.iter().copied().collect()))
}

/// Band-limited reference ear impulse responses of one unit source, `[ear][t]`.
pub fn binaural_impulse_responses(
    model: &HeadModel,
    kind: &SourceKind,
    listener: &Listener,
    sound_speed: f64,
    sample_rate: f64,
    nfft: usize,
    f_max: f64,
) -> Result<Vec<Vec<f64>>> {
    impulse_responses(nfft, sample_rate, f_max, |f| {
        Ok(head_response(model, kind, listener, f, 2.0 * PI * f / sound_speed, sound_speed)?.to_vec())
    })
}
