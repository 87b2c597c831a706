//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arraybin::array::{build_composite_array, build_rigid_sphere_array, tdesign_7_64, ArrayGeometry, RIGID_SPHERE_RADIUS};
use arraybin::bundle::encode_blob;
use arraybin::estimation::{build_psi, gram_deviation, gram_order, rigid_sphere_estimate, rigid_sphere_matrix, EstimatorState, DEFAULT_BUFFER};
use arraybin::hrtf::grid::gauss_grid;
use arraybin::hrtf::{fit_sh, synth_rigid_sphere_hrtf, HrtfProvider, SyntheticHead, LEFT, RIGHT};
use arraybin::metrics::{ild, itd, spectral_distortion, truncation_order, DEFAULT_RW, MAX_ORDER};
use arraybin::rendering::{render_composed, render_full, render_pln, render_rows, render_sph, synth_fir_filters, FilterDesign, RenderMode, RenderWeights};
use arraybin::simulate::{mic_impulse_responses, observe_source, Listener, simulate_observation, Scene, Source, SourceKind, SOUND_SPEED};
use arraybin::special_fn::{
    cart_to_sph, sh_count, sph_bessel_j_array, sph_bessel_j_deriv_array, sph_hankel2_array, sph_hankel2_deriv_array, sph_harmonics_all, sph_to_unit,
    EulerAngles, ShIndex,
};
use arraybin::wavefield::{evaluate_field, green, plane_wave_coeffs, point_source_coeffs, translate_coeffs_to, translation_matrix};

type Outcome = Result<String, String>;

fn k_of(f: f64) -> f64 {
    2.0 * PI * f / SOUND_SPEED
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(-PI..PI);
    sph_to_unit(z.acos(), phi)
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for x in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        let j = sph_bessel_j_array(20, x);
        let jd = sph_bessel_j_deriv_array(20, x);
        let h = sph_hankel2_array(20, x).map_err(err)?;
        let hd = sph_hankel2_deriv_array(20, x).map_err(err)?;
        for n in 0..=20 {
            // j h' - j' h = -i / x²
            let w = hd[n] * j[n] - h[n] * jd[n];
            let res = ((w + Complex64::new(0.0, 1.0 / (x * x))) * (x * x)).norm();
            worst = worst.max(res);
        }
    }
    let dt = t0.elapsed();
    check(worst < 1e-10 && within(dt, 1.0), format!("max residual {worst:.2e}, {:.3} s", dt.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let k = k_of(1000.0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let eta = random_unit(&mut rng);
        let r = random_unit(&mut rng) * rng.random_range(0.0..5.0 / k);
        let alpha = plane_wave_coeffs(&eta, &Vector3::zeros(), k, 20);
        let exact = Complex64::from_polar(1.0, k * eta.dot(&r));
        worst = worst.max((evaluate_field(&alpha, &r) - exact).norm());
    }
    let dt = t0.elapsed();
    check(worst < 1e-6 && within(dt, 5.0), format!("max abs error {worst:.2e}, {:.3} s", dt.as_secs_f64()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for f in [250.0, 500.0, 1000.0, 1500.0, 2000.0] {
        let k = k_of(f);
        for _ in 0..3 {
            let src = random_unit(&mut rng) * 1.5;
            let d = random_unit(&mut rng) * rng.random_range(0.1..0.2);
            let n_out = 12;
            let a = point_source_coeffs(&src, &Vector3::zeros(), k, n_out + 10).map_err(err)?;
            let b = translate_coeffs_to(&a, &d, n_out);
            for probe in [d, d + Vector3::new(0.02, -0.03, 0.01)] {
                let g = green(&probe, &src, k);
                worst = worst.max((evaluate_field(&b, &probe) - g).norm() / g.norm());
            }
        }
    }

    let d = Vector3::new(0.07, -0.11, 0.05);
    let k = k_of(1000.0);
    let tp = translation_matrix(&d, k, 10, 10).entries;
    let tm = translation_matrix(&(-d), k, 10, 10).entries;
    let mut adj = 0.0f64;
    for r in 0..tp.nrows() {
        for c in 0..tp.ncols() {
            adj = adj.max((tm[(r, c)] - tp[(c, r)].conj()).norm());
        }
    }

    let k = k_of(1500.0);
    let (d1, d2) = (Vector3::new(0.1, 0.0, 0.05), Vector3::new(-0.03, 0.12, 0.0));
    let n = 8;
    let group: Vec<f64> = [2usize, 5, 10]
        .iter()
        .map(|&buf| {
            let t1 = translation_matrix(&d1, k, n + buf, n + 2 * buf).entries;
            let t2 = translation_matrix(&d2, k, n, n + buf).entries;
            let t12 = translation_matrix(&(d1 + d2), k, n, n + 2 * buf).entries;
            (&t2 * &t1 - &t12).norm() / t12.norm()
        })
        .collect();
    let monotone = group[0] > group[1] && group[1] > group[2];
    check(
        worst < 1e-4 && adj < 1e-12 && monotone,
        format!("translation rel err {worst:.2e}, adjoint {adj:.2e}, group errors {:.2e} > {:.2e} > {:.2e}", group[0], group[1], group[2]),
    )
}

fn criterion_4() -> Outcome {
    let geom = build_composite_array(&Vector3::zeros(), 0.5);
    let k = k_of(500.0);
    let psi = build_psi(&geom, k);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..2 {
        let target = random_unit(&mut rng) * rng.random_range(0.0..0.1);
        let order = gram_order(&geom, &target, k, DEFAULT_BUFFER);
        worst = worst.max(gram_deviation(&geom, &psi, &target, k, order));
    }
    check(worst < 1e-6, format!("max relative Frobenius deviation {worst:.2e}"))
}

/// Pressure NMSE (dB) of the estimate over a head-sized ball about `target`.
fn ball_nmse(st: &EstimatorState, w: &DVector<Complex64>, target: &Vector3<f64>, src: &Vector3<f64>) -> f64 {
    let alpha = st.coeffs_at(w, target);
    let mut offsets = vec![Vector3::zeros()];
    for rad in [0.05, 0.0875] {
        for u in [Vector3::x(), -Vector3::x(), Vector3::y(), -Vector3::y(), Vector3::z(), -Vector3::z()] {
            offsets.push(u * rad);
        }
    }
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                offsets.push(Vector3::new(sx, sy, sz).normalize() * 0.0875);
            }
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for o in &offsets {
        let r = target + o;
        let truth = green(&r, src, st.k);
        num += (evaluate_field(&alpha, &r) - truth).norm_sqr();
        den += truth.norm_sqr();
    }
    10.0 * (num / den).log10()
}

fn estimator_at(geom: &ArrayGeometry, f: f64) -> Result<EstimatorState, String> {
    let k = k_of(f);
    let n = truncation_order(k, DEFAULT_RW, MAX_ORDER).map_err(err)?;
    EstimatorState::new(geom, k, n, None).map_err(err)
}

fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let geom = build_composite_array(&Vector3::zeros(), 0.5);
    let src = Vector3::new(1.5, 0.0, 0.0);
    let head = SyntheticHead::default();
    let hrtf = head.provider(1.5, 35);
    let offsets = [0.0, 0.1, 0.2, 0.3, 0.4];
    let yaws: Vec<EulerAngles> = (0..60).map(|d| EulerAngles::yaw(2.0 * PI * d as f64 / 60.0)).collect();
    let freqs = Scene::freq_grid(100.0, 1600.0, 100.0);
    let mut pressure = 0.0;
    let mut binaural = [0.0; 5];
    for &f in &freqs {
        let st = estimator_at(&geom, f)?;
        let s = observe_source(&geom, &SourceKind::Point(src), st.k).map_err(err)?;
        let w = st.solve(&s).map_err(err)?;
        pressure += ball_nmse(&st, &w, &Vector3::zeros(), &src);
        let h = hrtf.slice_at(f, SOUND_SPEED).map_err(err)?;
        for (i, x) in offsets.iter().enumerate() {
            let t = Vector3::new(*x, 0.0, 0.0);
            for angles in &yaws {
                let [gl, _] = render_rows(&st, &t, angles, &h, RenderMode::Sph).map_err(err)?;
                let y = gl.dot(&w);
                let rel = Listener { position: t, angles: *angles }.to_head(&src);
                let truth = head.point_source_pressure(&rel, st.k).map_err(err)?[LEFT];
                binaural[i] += 10.0 * ((y - truth).norm_sqr() / truth.norm_sqr()).log10();
            }
        }
    }
    let pressure = pressure / freqs.len() as f64;
    let means: Vec<f64> = binaural.iter().map(|s| s / (freqs.len() * yaws.len()) as f64).collect();
    let monotone = means.windows(2).all(|p| p[1] > p[0]);
    let dt = t0.elapsed();
    let shown: Vec<String> = means.iter().map(|v| format!("{v:.1}")).collect();
    check(
        pressure <= -20.0 && monotone && within(dt, 120.0),
        format!("center pressure {pressure:.1} dB; binaural at offsets 0..0.4 m: [{}] dB; {:.1} s", shown.join(", "), dt.as_secs_f64()),
    )
}

fn criterion_6() -> Outcome {
    let head = SyntheticHead::default();
    let r_s = 1.5;
    let freqs = Scene::freq_grid(100.0, 2000.0, 100.0);
    let order = 20;
    let set = synth_rigid_sphere_hrtf(&head, &gauss_grid(24, 48), &freqs, r_s, SOUND_SPEED, 48000.0).map_err(err)?;
    let spec = fit_sh(&set, order, 1e-9).map_err(err)?;
    let (mut sd_sph, mut sd_pln) = (0.0, 0.0);
    let azimuths: Vec<f64> = (0..72).map(|i| (5.0 * i as f64).to_radians()).collect();
    for &az in &azimuths {
        let src = sph_to_unit(PI / 2.0, az) * 2.0;
        let mut est = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
        let mut truth = [Vec::new(), Vec::new()];
        for (fi, &f) in freqs.iter().enumerate() {
            let k = k_of(f);
            let alpha = point_source_coeffs(&src, &Vector3::zeros(), k, order).map_err(err)?;
            let h = spec.slice(fi);
            let y_sph = render_sph(&alpha, &h, r_s, k).map_err(err)?;
            let y_pln = render_pln(&alpha, &h);
            let t = head.point_source_pressure(&src, k).map_err(err)?;
            for e in [LEFT, RIGHT] {
                est[0][e].push(y_sph[e]);
                est[1][e].push(y_pln[e]);
                truth[e].push(t[e]);
            }
        }
        for e in [LEFT, RIGHT] {
            sd_sph += spectral_distortion(&est[0][e], &truth[e], true).map_err(err)?.value;
            sd_pln += spectral_distortion(&est[1][e], &truth[e], true).map_err(err)?.value;
        }
    }
    let norm = 2.0 * azimuths.len() as f64;
    let (sd_sph, sd_pln) = (sd_sph / norm, sd_pln / norm);

    let k = 1000.0 / r_s;
    let pln = RenderWeights::pln(10);
    let sph = RenderWeights::sph(10, k, r_s).map_err(err)?;
    let ratios: Vec<f64> = (0..=10).map(|n| (sph.per_order(n) / pln.per_order(n)).norm()).collect();
    let spread = ratios.iter().map(|r| (r / ratios[0] - 1.0).abs()).fold(0.0, f64::max);
    check(sd_sph < sd_pln && spread < 0.01, format!("SD SPH {sd_sph:.3} dB < PLN {sd_pln:.3} dB; weight-ratio spread {spread:.2e}"))
}

fn criterion_7() -> Outcome {
    let geom = build_composite_array(&Vector3::zeros(), 0.5);
    let provider = SyntheticHead::default().provider(1.5, 35);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut paths = 0.0f64;
    for f in [200.0, 700.0, 1400.0] {
        let st = estimator_at(&geom, f)?;
        let h = provider.slice_at(f, SOUND_SPEED).map_err(err)?;
        let s = observe_source(&geom, &SourceKind::Point(Vector3::new(1.2, 0.8, 0.1)), st.k).map_err(err)?;
        for _ in 0..2 {
            let target = random_unit(&mut rng) * 0.05;
            let angles = EulerAngles::new(rng.random_range(-PI..PI), rng.random_range(0.0..PI), rng.random_range(-PI..PI));
            for mode in [RenderMode::Sph, RenderMode::Pln] {
                let a = render_full(&s, &st, &target, &angles, &h, mode).map_err(err)?;
                let b = render_composed(&s, &st, &target, &angles, &h, mode).map_err(err)?;
                for e in [LEFT, RIGHT] {
                    paths = paths.max((a[e] - b[e]).norm() / b[e].norm());
                }
            }
        }
    }

    // turning the head by ψ is the same as moving the source by ψ
    let phi0 = 30f64.to_radians();
    let mut worst_db = 0.0f64;
    for psi in [45f64, 90.0, -120.0].map(f64::to_radians) {
        for f in Scene::freq_grid(100.0, 1600.0, 100.0) {
            let st = estimator_at(&geom, f)?;
            let h = provider.slice_at(f, SOUND_SPEED).map_err(err)?;
            let at = |az: f64| observe_source(&geom, &SourceKind::Point(sph_to_unit(PI / 2.0, az) * 1.5), st.k).map_err(err);
            let turned = render_full(&at(phi0)?, &st, &Vector3::zeros(), &EulerAngles::yaw(psi), &h, RenderMode::Sph).map_err(err)?;
            let moved = render_full(&at(phi0 + psi)?, &st, &Vector3::zeros(), &EulerAngles::IDENTITY, &h, RenderMode::Sph).map_err(err)?;
            for e in [LEFT, RIGHT] {
                worst_db = worst_db.max((20.0 * (turned[e].norm() / moved[e].norm()).log10()).abs());
            }
        }
    }
    check(paths < 1e-12 && worst_db < 1.0, format!("factored vs composed {paths:.2e}; yaw vs source shift {worst_db:.3} dB"))
}

fn criterion_8() -> Outcome {
    let geom = build_composite_array(&Vector3::zeros(), 0.5);
    let provider = SyntheticHead::default().provider(1.5, 35);
    let design = FilterDesign::default();
    let fs = design.sample_rate;
    let bank = synth_fir_filters(&geom, &Vector3::zeros(), &EulerAngles::IDENTITY, &provider, &design).map_err(err)?;
    let binaural = |az: f64| -> Result<(f64, f64), String> {
        let kind = SourceKind::Point(sph_to_unit(PI / 2.0, az) * 1.5);
        let mics = mic_impulse_responses(&geom, &kind, SOUND_SPEED, fs, design.nfft, 2.0 * design.band_hz).map_err(err)?;
        let [l, r] = bank.apply(&mics).map_err(err)?;
        Ok((itd(&l, &r, fs, 1600.0).map_err(err)?, ild(&l, &r, fs, 1600.0).map_err(err)?))
    };
    let (itd0, ild0) = binaural(0.0)?;
    let mut anti = 0.0f64;
    for deg in [15f64, 30.0, 45.0, 60.0, 75.0, 90.0] {
        let (p, _) = binaural(deg.to_radians())?;
        let (m, _) = binaural(-deg.to_radians())?;
        anti = anti.max((p + m).abs() * fs);
    }

    // constructed delay: R is L shifted by 10 samples
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base: Vec<f64> = (0..2048).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut l = base.clone();
    l.extend(std::iter::repeat(0.0).take(10));
    let mut r = vec![0.0; 10];
    r.extend(&base);
    let constructed = itd(&l, &r, fs, 1600.0).map_err(err)? * fs;

    check(
        (itd0 * fs).abs() <= 1.0 && ild0.abs() <= 0.3 && anti <= 2.0 && (constructed - 10.0).abs() <= 0.25,
        format!(
            "frontal ITD {:.3} samples, ILD {:.3} dB; antisymmetry {:.3} samples; constructed delay {:.3} samples",
            itd0 * fs,
            ild0,
            anti,
            constructed
        ),
    )
}

fn criterion_9() -> Outcome {
    let geom = build_rigid_sphere_array(&Vector3::zeros(), RIGID_SPHERE_RADIUS);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for f in [2000.0, 3000.0, 5000.0] {
        let k = k_of(f);
        for _ in 0..3 {
            let pw = plane_wave_coeffs(&random_unit(&mut rng), &Vector3::zeros(), k, 7);
            let s = rigid_sphere_matrix(&geom, k, 7).map_err(err)? * &pw.coeffs;
            let est = rigid_sphere_estimate(&s, &geom, k, 7, 1e-10).map_err(err)?;
            worst = worst.max((&est.coeffs - &pw.coeffs).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); sh_count(7)];
    for u in tdesign_7_64() {
        let (_, t, p) = cart_to_sph(u);
        for (a, y) in acc.iter_mut().zip(sph_harmonics_all(7, t, p)) {
            *a += y;
        }
    }
    let design = ShIndex::iter_to(7).filter(|i| i.n >= 1).map(|i| acc[i.linear()].norm()).fold(0.0, f64::max);
    check(worst < 1e-6 && design < 1e-10, format!("coefficient error {worst:.2e}; max design sum {design:.2e}"))
}

/// Observation, coefficients and filter taps of a small scene, as bytes.
fn pipeline_bytes() -> Result<Vec<u8>, String> {
    let geom = build_composite_array(&Vector3::zeros(), 0.5);
    let freqs = Scene::freq_grid(100.0, 1000.0, 100.0);
    let scene = Scene::new(
        vec![
            Source::flat(SourceKind::Point(Vector3::new(1.5, 0.3, 0.0)), freqs.len()),
            Source {
                kind: SourceKind::PlaneWave(Vector3::new(-0.2, 1.0, 0.3)),
                spectrum: freqs.iter().map(|f| Complex64::from_polar(0.5, f * 1e-3)).collect(),
            },
        ],
        freqs.clone(),
    );
    let obs = simulate_observation(&scene, &geom).map_err(err)?;
    let mut out = encode_blob(&obs.data);
    for (fi, &f) in freqs.iter().enumerate() {
        let st = estimator_at(&geom, f)?;
        let a = st.estimate(&obs.at(fi), &Vector3::new(0.02, 0.0, 0.0)).map_err(err)?;
        out.extend(encode_blob(a.coeffs.as_slice()));
    }
    let provider = SyntheticHead::default().provider(1.5, 30);
    let design = FilterDesign { sample_rate: 16000.0, nfft: 512, band_hz: 1000.0, ..FilterDesign::default() };
    let bank = synth_fir_filters(&geom, &Vector3::zeros(), &EulerAngles::yaw(0.3), &provider, &design).map_err(err)?;
    let dir = tempfile::tempdir().map_err(err)?;
    let path = dir.path().join("filters.wav");
    bank.write_wav(&path).map_err(err)?;
    out.extend(std::fs::read(&path).map_err(err)?);
    Ok(out)
}

fn criterion_10() -> Outcome {
    let mut runs = Vec::new();
    for threads in [1usize, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(err)?;
        for _ in 0..3 {
            runs.push(pool.install(pipeline_bytes)?);
        }
    }
    let identical = runs.iter().all(|r| r == &runs[0]);
    check(identical, format!("{} runs over 1 and 4 threads, {} bytes each, identical: {identical}", runs.len(), runs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Wronskian identity", criterion_1),
        ("plane-wave expansion", criterion_2),
        ("translation operator", criterion_3),
        ("Gram matrix position independence", criterion_4),
        ("desk-scale estimation", criterion_5),
        ("SPH vs PLN rendering", criterion_6),
        ("rotation and translation adaptation", criterion_7),
        ("ITD and ILD", criterion_8),
        ("rigid-sphere estimator and t-design", criterion_9),
        ("determinism", criterion_10),
    ];
    let only: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|n| n != i + 1) {
            continue;
        }
        let t0 = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
