//! Loading inputs and the per-frequency estimate/render steps shared by the
//! commands.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use serde_json::json;

use arraybin::array::{geometry_from_json, ArrayGeometry, Baffle};
use arraybin::bundle::{read_bundle, write_bundle, BundleHeader};
use arraybin::estimation::{rigid_sphere_estimate, EstimatorState};
use arraybin::hrtf::{fit_sh_with, read_hrtf_bundle, FitOptions, HrtfProvider, HrtfSet, HrtfShSlice, HrtfShSpectrum, SyntheticHead, SyntheticHrtf};
use arraybin::metrics::{truncation_order, MAX_ORDER};
use arraybin::rendering::{render_rows, render_with, RenderMode, RenderWeights};
use arraybin::simulate::{HeadModel, Listener, Observation, Scene};
use arraybin::special_fn::EulerAngles;
use arraybin::wavefield::{rotate_coeffs, translate_coeffs_to, ShCoeffVec};

use crate::config::RunConfig;
use crate::error::{io_ctx, user, CliError, CliResult};
use crate::manifest::Manifest;

pub fn load_geometry(path: &Path) -> CliResult<ArrayGeometry> {
    let text = std::fs::read_to_string(path).map_err(io_ctx(path))?;
    geometry_from_json(&text).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

pub fn load_scene(path: &Path) -> CliResult<Scene> {
    let text = std::fs::read_to_string(path).map_err(io_ctx(path))?;
    crate::scene::parse_scene(&text, path.parent().unwrap_or(Path::new("")))
        .map_err(|e| CliError::User(format!("{}: {}", path.display(), e.to_string().trim_start_matches("error: "))))
}

/// HRTFs for rendering and the matching reference head.
pub enum Hrtf {
    Synthetic(SyntheticHrtf),
    Measured { set: HrtfSet, spectrum: HrtfShSpectrum },
}

impl Hrtf {
    pub fn provider(&self) -> &dyn HrtfProvider {
        match self {
            Hrtf::Synthetic(s) => s,
            Hrtf::Measured { spectrum, .. } => spectrum,
        }
    }

    pub fn model(&self) -> HeadModel<'_> {
        match self {
            Hrtf::Synthetic(s) => HeadModel::Synthetic(s.head),
            Hrtf::Measured { set, spectrum } => HeadModel::Measured { set, spectrum },
        }
    }

    pub fn slice_at(&self, freq: f64, sound_speed: f64) -> CliResult<HrtfShSlice> {
        self.provider().slice_at(freq, sound_speed).map_err(CliError::from)
    }
}

/// The configured HRTF bundle fitted at `render.hrtf_order` (capped by the
/// number of directions), or the synthetic head at `render.radius`.
pub fn load_hrtf(cfg: &RunConfig) -> CliResult<Hrtf> {
    match &cfg.hrtf {
        None => Ok(Hrtf::Synthetic(SyntheticHead::default().provider(cfg.render.radius, cfg.render.hrtf_order))),
        Some(_) => {
            let path = cfg.require(&cfg.hrtf, "hrtf")?;
            let set = read_hrtf_bundle(path).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
            let max_order = ((set.directions.len() as f64).sqrt().floor() as usize).saturating_sub(1);
            let order = cfg.render.hrtf_order.min(max_order);
            if order == 0 {
                return user(format!("{}: too few directions for a spherical-harmonic fit", path.display()));
            }
            let spectrum = fit_sh_with(&set, &FitOptions { order, gamma: None })?;
            Ok(Hrtf::Measured { set, spectrum })
        }
    }
}

pub fn listener(cfg: &RunConfig) -> Listener {
    let [a, b, g] = cfg.listener.angles_deg.map(f64::to_radians);
    Listener { position: Vector3::from(cfg.listener.position), angles: EulerAngles::new(a, b, g) }
}

const OBSERVATION_KIND: &str = "observation";

pub fn write_observation(stem: &Path, obs: &Observation, sound_speed: f64) -> CliResult<(PathBuf, PathBuf)> {
    let header = BundleHeader::new(
        OBSERVATION_KIND,
        &["freq", "mic"],
        &[obs.freqs.len(), obs.n_mics],
        json!({"freqs": obs.freqs, "sound_speed": sound_speed}),
    );
    Ok(write_bundle(stem, header, &obs.data)?)
}

/// Observation plus the sound speed it was recorded at.
pub fn read_observation(path: &Path) -> CliResult<(Observation, f64)> {
    let ctx = |m: String| CliError::User(format!("{}: {m}", path.display()));
    let (header, data) = read_bundle(path).map_err(|e| ctx(e.to_string()))?;
    if header.kind != OBSERVATION_KIND {
        return Err(ctx(format!("expected an observation bundle, found kind '{}'", header.kind)));
    }
    let freqs: Vec<f64> = serde_json::from_value(header.meta["freqs"].clone()).map_err(|e| ctx(e.to_string()))?;
    let c = header.meta["sound_speed"].as_f64().ok_or_else(|| ctx("missing sound_speed".into()))?;
    if header.shape.len() != 2 || header.shape[0] != freqs.len() {
        return Err(ctx(format!("shape {:?} disagrees with {} frequencies", header.shape, freqs.len())));
    }
    Ok((Observation { n_mics: header.shape[1], freqs, data }, c))
}

/// Observation from the configured bundle, or simulated from the scene.
pub fn observation(cfg: &RunConfig, scene: Option<&Scene>, geom: &ArrayGeometry, manifest: &mut Manifest) -> CliResult<(Observation, f64)> {
    let (obs, c) = if cfg.observation.is_some() {
        let path = cfg.require(&cfg.observation, "observation")?;
        manifest.input("observation", path)?;
        read_observation(path)?
    } else {
        match scene {
            Some(s) => (arraybin::simulate::simulate_observation(s, geom)?, s.sound_speed),
            None => return user("need either an observation bundle or a scene to simulate one"),
        }
    };
    if obs.n_mics != geom.len() {
        return user(format!("observation has {} channels but the array has {} microphones", obs.n_mics, geom.len()));
    }
    Ok((obs, c))
}

pub fn wavenumber(freq: f64, sound_speed: f64) -> f64 {
    2.0 * PI * freq / sound_speed
}

pub fn estimation_order(cfg: &RunConfig, k: f64) -> CliResult<usize> {
    match cfg.estimator.order {
        Some(n) => Ok(n),
        None => Ok(truncation_order(k, cfg.estimator.r_w, MAX_ORDER)?),
    }
}

/// Coefficients about `target`. Open arrays use the infinite-order estimator;
/// a rigid baffle uses the truncated estimator about its center (order
/// limited by the microphone count), translated to `target` when they differ.
pub fn estimate(cfg: &RunConfig, geom: &ArrayGeometry, s: &DVector<Complex64>, k: f64, target: &Vector3<f64>) -> CliResult<ShCoeffVec> {
    let order = estimation_order(cfg, k)?;
    match geom.baffle {
        None => Ok(EstimatorState::new(geom, k, order, cfg.estimator.lambda)?.estimate(s, target)?),
        Some(Baffle::RigidSphere { center, .. }) => {
            let max = ((geom.len() as f64).sqrt().floor() as usize).saturating_sub(1);
            let alpha = rigid_sphere_estimate(s, geom, k, order.min(max), cfg.estimator.eta)?;
            Ok(if (target - center).norm() > 0.0 { translate_coeffs_to(&alpha, target, alpha.order()) } else { alpha })
        }
    }
}

/// One frequency's solved estimate, reusable for many listener poses.
pub enum Prepared {
    Open { st: EstimatorState, w: DVector<Complex64> },
    Rigid { alpha: ShCoeffVec, k: f64 },
}

impl Prepared {
    pub fn new(cfg: &RunConfig, geom: &ArrayGeometry, s: &DVector<Complex64>, k: f64) -> CliResult<Self> {
        match geom.baffle {
            None => {
                let st = EstimatorState::new(geom, k, estimation_order(cfg, k)?, cfg.estimator.lambda)?;
                let w = st.solve(s)?;
                Ok(Prepared::Open { st, w })
            }
            Some(Baffle::RigidSphere { center, .. }) => Ok(Prepared::Rigid { alpha: estimate(cfg, geom, s, k, &center)?, k }),
        }
    }

    pub fn render(&self, listener: &Listener, h: &HrtfShSlice, mode: RenderMode) -> CliResult<[Complex64; 2]> {
        match self {
            Prepared::Open { st, w } => {
                let [gl, gr] = render_rows(st, &listener.position, &listener.angles, h, mode)?;
                Ok([gl.dot(w), gr.dot(w)])
            }
            Prepared::Rigid { alpha, k } => {
                let order = alpha.order().min(h.order);
                let moved = if (listener.position - alpha.center).norm() > 0.0 { translate_coeffs_to(alpha, &listener.position, order) } else { alpha.clone() };
                let w = RenderWeights::new(mode, order, *k, h.radius)?;
                Ok(render_with(&rotate_coeffs(&moved, &listener.angles), h, &w))
            }
        }
    }
}

/// Both ear signals at one frequency for the configured listener.
pub fn render(cfg: &RunConfig, geom: &ArrayGeometry, s: &DVector<Complex64>, k: f64, h: &HrtfShSlice, listener: &Listener) -> CliResult<[Complex64; 2]> {
    Prepared::new(cfg, geom, s, k)?.render(listener, h, cfg.render.mode)
}
