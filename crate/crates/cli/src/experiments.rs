//! Metric tables for `evaluate`.

use clap::ValueEnum;
use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use arraybin::array::ArrayGeometry;
use arraybin::hrtf::{LEFT, RIGHT};
use arraybin::metrics::{ild, itd, mean_nmse, spectral_distortion, MetricRow};
use arraybin::rendering::{render_with, RenderMode, RenderWeights};
use arraybin::simulate::{impulse_responses, observe_source, simulate_observation, true_binaural, Listener, Scene, SourceKind};
use arraybin::special_fn::EulerAngles;
use arraybin::wavefield::{point_source_coeffs, rotate_coeffs, ShCoeffVec};

use crate::config::RunConfig;
use crate::error::{user, CliResult};
use crate::pipeline::{listener, wavenumber, Hrtf, Prepared};
use crate::scene::gain_at;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// SD and NMSE of SPH and PLN rendering over 60 yaws.
    PlnSph,
    /// Binaural NMSE on a 9 x 9 grid of listener offsets (±0.4 m).
    PositionMap,
    /// ITD and ILD of estimate and truth for azimuths -90°..90°.
    ItdIld,
}

const EAR_NAMES: [&str; 2] = ["left", "right"];

pub fn run_experiment(exp: Experiment, cfg: &RunConfig, scene: &Scene, geom: &ArrayGeometry, hrtf: &Hrtf) -> CliResult<Vec<MetricRow>> {
    match exp {
        Experiment::PlnSph => pln_sph(cfg, scene, geom, hrtf),
        Experiment::PositionMap => position_map(cfg, scene, geom, hrtf),
        Experiment::ItdIld => itd_ild(cfg, scene, geom, hrtf),
    }
}

fn band_label(freqs: &[f64]) -> String {
    format!("{}-{}", freqs[0], freqs[freqs.len() - 1])
}

fn row(condition: &str, at: &Vector3<f64>, azimuth_deg: f64, band: &str, metric: String, value: f64, excluded: usize) -> MetricRow {
    MetricRow { condition: condition.into(), x: at.x, y: at.y, z: at.z, azimuth_deg, band: band.into(), metric, value, excluded }
}

/// Per-frequency estimates and HRTF slices on the scene grid.
fn prepare(cfg: &RunConfig, scene: &Scene, geom: &ArrayGeometry, hrtf: &Hrtf) -> CliResult<Vec<(Prepared, arraybin::hrtf::HrtfShSlice)>> {
    let obs = simulate_observation(scene, geom)?;
    (0..scene.freqs.len())
        .into_par_iter()
        .map(|fi| {
            let k = scene.k(fi);
            Ok((Prepared::new(cfg, geom, &obs.at(fi), k)?, hrtf.slice_at(scene.freqs[fi], scene.sound_speed)?))
        })
        .collect()
}

fn yaws(base: &Listener, count: usize) -> Vec<(f64, Listener)> {
    (0..count)
        .map(|i| {
            let deg = 360.0 * i as f64 / count as f64;
            let angles = EulerAngles::new(base.angles.alpha + deg.to_radians(), base.angles.beta, base.angles.gamma);
            (deg, Listener { position: base.position, angles })
        })
        .collect()
}

/// Exact coefficients of the scene's point sources about `center`.
fn exact_coeffs(scene: &Scene, fi: usize, center: &Vector3<f64>, order: usize) -> CliResult<ShCoeffVec> {
    let k = scene.k(fi);
    let mut acc: Option<ShCoeffVec> = None;
    for src in &scene.sources {
        let SourceKind::Point(p) = src.kind else {
            return user("the pln-sph experiment models point sources only");
        };
        let mut a = point_source_coeffs(&p, center, k, order)?;
        a.coeffs *= src.spectrum[fi];
        acc = Some(match acc {
            None => a,
            Some(mut b) => {
                b.coeffs += a.coeffs;
                b
            }
        });
    }
    Ok(acc.expect("scene has sources"))
}

fn pln_sph(cfg: &RunConfig, scene: &Scene, geom: &ArrayGeometry, hrtf: &Hrtf) -> CliResult<Vec<MetricRow>> {
    let prepared = prepare(cfg, scene, geom, hrtf)?;
    let base = listener(cfg);
    let band = band_label(&scene.freqs);
    let model = hrtf.model();
    let mut rows = Vec::new();
    for (deg, lis) in yaws(&base, 60) {
        let truth = true_binaural(scene, &model, &lis)?;
        for mode in [RenderMode::Sph, RenderMode::Pln] {
            let name = if mode == RenderMode::Sph { "sph" } else { "pln" };
            let est = prepared.iter().map(|(p, h)| p.render(&lis, h, mode)).collect::<CliResult<Vec<_>>>()?;
            let exact = (0..scene.freqs.len())
                .map(|fi| {
                    let h = &prepared[fi].1;
                    let k = scene.k(fi);
                    let alpha = exact_coeffs(scene, fi, &lis.position, h.order)?;
                    let w = RenderWeights::new(mode, h.order, k, h.radius)?;
                    Ok(render_with(&rotate_coeffs(&alpha, &lis.angles), h, &w))
                })
                .collect::<CliResult<Vec<_>>>()?;
            for (cond, y) in [(name.to_string(), &est), (format!("{name}-exact"), &exact)] {
                for ear in [LEFT, RIGHT] {
                    let e: Vec<Complex64> = y.iter().map(|v| v[ear]).collect();
                    let t: Vec<Complex64> = truth.iter().map(|v| v[ear]).collect();
                    let sd = spectral_distortion(&e, &t, true)?;
                    let nm = mean_nmse(&e, &t)?;
                    rows.push(row(&cond, &lis.position, deg, &band, format!("sd_db_{}", EAR_NAMES[ear]), sd.value, sd.excluded));
                    rows.push(row(&cond, &lis.position, deg, &band, format!("nmse_db_{}", EAR_NAMES[ear]), nm.value, nm.excluded));
                }
            }
        }
    }
    Ok(rows)
}

fn position_map(cfg: &RunConfig, scene: &Scene, geom: &ArrayGeometry, hrtf: &Hrtf) -> CliResult<Vec<MetricRow>> {
    let prepared = prepare(cfg, scene, geom, hrtf)?;
    let base = listener(cfg);
    let band = band_label(&scene.freqs);
    let model = hrtf.model();
    let grid: Vec<Vector3<f64>> = (-4..=4).flat_map(|iy| (-4..=4).map(move |ix| Vector3::new(0.1 * ix as f64, 0.1 * iy as f64, 0.0))).collect();
    let per_point = grid
        .par_iter()
        .map(|off| {
            let lis = Listener { position: base.position + off, angles: base.angles };
            let truth = true_binaural(scene, &model, &lis)?;
            let est = prepared.iter().map(|(p, h)| p.render(&lis, h, cfg.render.mode)).collect::<CliResult<Vec<_>>>()?;
            let mut out = Vec::new();
            for ear in [LEFT, RIGHT] {
                let e: Vec<Complex64> = est.iter().map(|v| v[ear]).collect();
                let t: Vec<Complex64> = truth.iter().map(|v| v[ear]).collect();
                let nm = mean_nmse(&e, &t)?;
                out.push(row("estimate", &lis.position, 0.0, &band, format!("nmse_db_{}", EAR_NAMES[ear]), nm.value, nm.excluded));
            }
            Ok(out)
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn itd_ild(cfg: &RunConfig, scene: &Scene, geom: &ArrayGeometry, hrtf: &Hrtf) -> CliResult<Vec<MetricRow>> {
    let d = cfg.filter_design();
    let (fs, nfft) = (d.sample_rate, d.nfft);
    let base = listener(cfg);
    let model = hrtf.model();
    let bin = |f: f64| (f * nfft as f64 / fs).round() as usize;
    let top = (1..nfft / 2).take_while(|&b| (b as f64) * fs / nfft as f64 <= 1.25 * d.band_hz).last().unwrap_or(0);
    let prepared = (1..=top)
        .into_par_iter()
        .map(|b| {
            let f = b as f64 * fs / nfft as f64;
            let k = wavenumber(f, scene.sound_speed);
            let mut s = nalgebra::DVector::zeros(geom.len());
            for src in &scene.sources {
                s += observe_source(geom, &src.kind, k)? * gain_at(scene, src, f);
            }
            Ok((Prepared::new(cfg, geom, &s, k)?, hrtf.slice_at(f, scene.sound_speed)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let lp = d.band_hz;

    let mut rows = Vec::new();
    for step in -6..=6 {
        let az = 15.0 * step as f64;
        // the listener rotation acts on the scene: yaw az moves a frontal source to azimuth az
        let lis = Listener { position: base.position, angles: EulerAngles::new(base.angles.alpha + az.to_radians(), base.angles.beta, base.angles.gamma) };
        let est = impulse_responses(nfft, fs, d.band_hz, |f| {
            let (p, h) = &prepared[bin(f) - 1];
            p.render(&lis, h, cfg.render.mode).map(|y| y.to_vec()).map_err(|e| arraybin::Error::InvalidInput(e.to_string()))
        })?;
        let truth = impulse_responses(nfft, fs, d.band_hz, |f| {
            let mut one = scene.clone();
            for src in &mut one.sources {
                src.spectrum = vec![gain_at(scene, src, f)];
            }
            one.freqs = vec![f];
            Ok(true_binaural(&one, &model, &lis)?[0].to_vec())
        })?;
        for (cond, ir) in [("estimate", &est), ("truth", &truth)] {
            let band = format!("0-{lp}");
            rows.push(row(cond, &lis.position, az, &band, "itd_us".into(), itd(&ir[LEFT], &ir[RIGHT], fs, lp)? * 1e6, 0));
            rows.push(row(cond, &lis.position, az, &band, "ild_db".into(), ild(&ir[LEFT], &ir[RIGHT], fs, lp)?, 0));
        }
    }
    Ok(rows)
}
