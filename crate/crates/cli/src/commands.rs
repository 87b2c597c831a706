//! Subcommand implementations. Every command loads and validates all of its
//! inputs before computing anything and writes its outputs only at the end.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use arraybin::array::{build_composite_array, build_rigid_sphere_array, build_small_array, geometry_to_json, Baffle, RIGID_SPHERE_RADIUS, SMALL_ARRAY_RADIUS};
use arraybin::bundle::{write_bundle, BundleHeader};
use arraybin::hrtf::grid::{gauss_grid_for_order, measurement_grid_5deg};
use arraybin::hrtf::{hrtf_set_from_csv, synth_rigid_sphere_hrtf, write_hrtf_bundle, SyntheticHead, LEFT, RIGHT};
use arraybin::rendering::{synth_fir_filters, write_stereo_wav};
use arraybin::simulate::{impulse_responses, observe_source, Scene, SOUND_SPEED};

use crate::config::{parse_triple, RunArgs, RunConfig};
use crate::error::{io_ctx, user, CliError, CliResult};
use crate::experiments::{run_experiment, Experiment};
use crate::manifest::{sha256_hex, Manifest};
use crate::pipeline::{estimate, estimation_order, listener, load_geometry, load_hrtf, load_scene, observation, render, wavenumber, write_observation};

fn config_value(cfg: &RunConfig) -> CliResult<serde_json::Value> {
    serde_json::to_value(cfg).map_err(|e| CliError::Internal(e.to_string()))
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(io_ctx(dir))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(io_ctx(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    /// One eight-capsule array.
    Single,
    /// Eight small arrays on two rings, 64 microphones.
    Composite,
    /// 64 omnidirectional microphones on a rigid sphere.
    Rigid,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    #[arg(long, value_enum, required_unless_present = "check")]
    pub layout: Option<Layout>,
    /// Array center `x,y,z` in m.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "0,0,0")]
    pub center: [f64; 3],
    /// Cardioid parameter of the directional capsules (1 = omni).
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Small-array radius (single) or baffle radius (rigid), m.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Rotation of a single array about z, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub yaw: f64,
    /// Output geometry file.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Validate an existing geometry file instead of generating one.
    #[arg(long, conflicts_with = "layout")]
    pub check: Option<PathBuf>,
}

pub fn cmd_geometry(args: &GeometryArgs) -> CliResult<()> {
    if let Some(path) = &args.check {
        let g = load_geometry(path)?;
        let baffle = match g.baffle {
            Some(Baffle::RigidSphere { radius, .. }) => format!("rigid sphere, radius {radius} m"),
            None => "none".into(),
        };
        println!("{}: {} microphones, max directivity order {}, baffle: {baffle}", path.display(), g.len(), g.max_dir_order());
        return Ok(());
    }
    if !(0.0..=1.0).contains(&args.beta) {
        return user(format!("beta must lie in [0, 1], got {}", args.beta));
    }
    if let Some(r) = args.radius {
        if !(r > 0.0) {
            return user(format!("radius must be positive, got {r}"));
        }
    }
    let c = Vector3::from(args.center);
    let g = match args.layout.expect("clap requires a layout") {
        Layout::Single => build_small_array(&c, args.yaw.to_radians(), args.radius.unwrap_or(SMALL_ARRAY_RADIUS), args.beta),
        Layout::Composite => build_composite_array(&c, args.beta),
        Layout::Rigid => build_rigid_sphere_array(&c, args.radius.unwrap_or(RIGID_SPHERE_RADIUS)),
    };
    let text = geometry_to_json(&g)? + "\n";
    match &args.out {
        None => print!("{text}"),
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                prepare_dir(parent)?;
            }
            write_text(path, &text)?;
            let cfg = json!({"layout": format!("{:?}", args.layout).to_lowercase(), "center": args.center, "beta": args.beta, "radius": args.radius, "yaw": args.yaw});
            let mut m = Manifest::new("geometry", cfg)?;
            let dir = path.parent().unwrap_or(Path::new(""));
            let name = path.file_name().and_then(|n| n.to_str()).ok_or_else(|| CliError::User("output needs a file name".into()))?;
            m.output(dir, name)?;
            m.write(&path.with_extension("manifest.json"))?;
            eprintln!("wrote {} ({} microphones)", path.display(), g.len());
        }
    }
    Ok(())
}

pub fn cmd_simulate(args: &RunArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args)?;
    let scene_path = cfg.require(&cfg.scene, "scene")?;
    let geom_path = cfg.require(&cfg.geometry, "geometry")?;
    let out = cfg.output_dir()?;
    let scene = load_scene(scene_path)?;
    let geom = load_geometry(geom_path)?;
    let mut m = Manifest::new("simulate", config_value(&cfg)?)?;
    m.input("scene", scene_path)?;
    m.input("geometry", geom_path)?;

    let obs = arraybin::simulate::simulate_observation(&scene, &geom)?;
    prepare_dir(out)?;
    write_observation(&out.join("observation"), &obs, scene.sound_speed)?;
    m.output(out, "observation.json")?;
    m.output(out, "observation.bin")?;
    m.write(&out.join("manifest.json"))?;
    eprintln!("simulated {} frequencies at {} microphones into {}", obs.freqs.len(), obs.n_mics, out.display());
    Ok(())
}

/// Scene and geometry as used by estimate/render/evaluate.
struct Loaded {
    cfg: RunConfig,
    scene: Option<Scene>,
    geom: arraybin::array::ArrayGeometry,
    manifest: Manifest,
}

fn load_common(args: &RunArgs, command: &str, need_scene: bool) -> CliResult<Loaded> {
    let cfg = RunConfig::load(args)?;
    let geom_path = cfg.require(&cfg.geometry, "geometry")?.to_path_buf();
    cfg.output_dir()?;
    let mut manifest = Manifest::new(command, config_value(&cfg)?)?;
    let scene = if need_scene || cfg.scene.is_some() {
        let p = cfg.require(&cfg.scene, "scene")?;
        manifest.input("scene", p)?;
        Some(load_scene(p)?)
    } else {
        None
    };
    let geom = load_geometry(&geom_path)?;
    manifest.input("geometry", &geom_path)?;
    if let Some(p) = &cfg.hrtf {
        manifest.input("hrtf", p)?;
    }
    Ok(Loaded { cfg, scene, geom, manifest })
}

pub fn cmd_estimate(args: &RunArgs) -> CliResult<()> {
    let Loaded { cfg, scene, geom, mut manifest } = load_common(args, "estimate", false)?;
    let (obs, c) = observation(&cfg, scene.as_ref(), &geom, &mut manifest)?;
    let target = Vector3::from(cfg.listener.position);
    for &f in &obs.freqs {
        estimation_order(&cfg, wavenumber(f, c))?;
    }

    let coeffs = (0..obs.freqs.len())
        .into_par_iter()
        .map(|fi| estimate(&cfg, &geom, &obs.at(fi), wavenumber(obs.freqs[fi], c), &target))
        .collect::<CliResult<Vec<_>>>()?;
    let orders: Vec<usize> = coeffs.iter().map(|a| a.order()).collect();
    let data: Vec<Complex64> = coeffs.iter().flat_map(|a| a.coeffs.iter().copied()).collect();
    let out = cfg.output_dir()?;
    prepare_dir(out)?;
    let header = BundleHeader::new(
        "coeffs",
        &["coefficient"],
        &[data.len()],
        json!({"freqs": obs.freqs, "orders": orders, "center": cfg.listener.position, "sound_speed": c,
               "layout": "per frequency, (N_f + 1)^2 values in order q = n^2 + n + m"}),
    );
    write_bundle(&out.join("coeffs"), header, &data)?;
    manifest.output(out, "coeffs.json")?;
    manifest.output(out, "coeffs.bin")?;
    manifest.write(&out.join("manifest.json"))?;
    eprintln!("estimated coefficients at {} frequencies into {}", obs.freqs.len(), out.display());
    Ok(())
}

fn db(z: Complex64) -> f64 {
    20.0 * z.norm().max(1e-300).log10()
}

pub fn cmd_render(args: &RunArgs) -> CliResult<()> {
    let Loaded { cfg, scene, geom, mut manifest } = load_common(args, "render", false)?;
    let hrtf = load_hrtf(&cfg)?;
    let (obs, c) = observation(&cfg, scene.as_ref(), &geom, &mut manifest)?;
    let lis = listener(&cfg);
    let design = cfg.filter_design();
    let slices = obs.freqs.iter().map(|&f| hrtf.slice_at(f, c)).collect::<CliResult<Vec<_>>>()?;
    if scene.is_some() {
        let f_top = 1.25 * design.band_hz;
        hrtf.slice_at(f_top.min(design.sample_rate / 2.0), c)?;
    }

    let ys = (0..obs.freqs.len())
        .into_par_iter()
        .map(|fi| render(&cfg, &geom, &obs.at(fi), wavenumber(obs.freqs[fi], c), &slices[fi], &lis))
        .collect::<CliResult<Vec<_>>>()?;
    let mut csv = String::from("freq_hz,left_re,left_im,right_re,right_im,left_db,right_db\n");
    for (f, y) in obs.freqs.iter().zip(&ys) {
        csv.push_str(&format!("{f},{},{},{},{},{:.6},{:.6}\n", y[LEFT].re, y[LEFT].im, y[RIGHT].re, y[RIGHT].im, db(y[LEFT]), db(y[RIGHT])));
    }

    // time signals need the scene to re-observe at every FFT bin
    let wav = match &scene {
        Some(sc) => Some(impulse_responses(design.nfft, design.sample_rate, design.band_hz, |f| {
            let k = wavenumber(f, sc.sound_speed);
            let mut s = nalgebra::DVector::zeros(geom.len());
            for src in &sc.sources {
                s += observe_source(&geom, &src.kind, k)? * crate::scene::gain_at(sc, src, f);
            }
            let h = hrtf.provider().slice_at(f, sc.sound_speed)?;
            render(&cfg, &geom, &s, k, &h, &lis).map(|y| y.to_vec()).map_err(|e| arraybin::Error::InvalidInput(e.to_string()))
        })?),
        None => None,
    };

    let out = cfg.output_dir()?;
    prepare_dir(out)?;
    write_text(&out.join("binaural.csv"), &csv)?;
    manifest.output(out, "binaural.csv")?;
    if let Some(ir) = wav {
        write_stereo_wav(&out.join("binaural.wav"), &ir[LEFT], &ir[RIGHT], design.sample_rate)?;
        manifest.output(out, "binaural.wav")?;
    } else {
        eprintln!("no scene given: skipping binaural.wav");
    }
    manifest.write(&out.join("manifest.json"))?;
    eprintln!("rendered {} frequencies into {}", obs.freqs.len(), out.display());
    Ok(())
}

pub fn cmd_filters(args: &RunArgs) -> CliResult<()> {
    let Loaded { cfg, geom, mut manifest, .. } = load_common(args, "filters", false)?;
    if geom.baffle.is_some() {
        return user("filter design needs an open array; rigid-sphere arrays are supported by estimate and render");
    }
    let hrtf = load_hrtf(&cfg)?;
    let design = cfg.filter_design();
    let top = (1..design.nfft / 2).map(|b| design.bin_freq(b)).take_while(|&f| f < 2.0 * design.band_hz).last().unwrap_or(0.0);
    hrtf.slice_at(top, design.sound_speed)?;
    let lis = listener(&cfg);
    let geom_path = cfg.require(&cfg.geometry, "geometry")?;
    let geometry_hash = sha256_hex(&std::fs::read(geom_path).map_err(io_ctx(geom_path))?);

    let bank = synth_fir_filters(&geom, &lis.position, &lis.angles, hrtf.provider(), &design)?;
    let out = cfg.output_dir()?;
    prepare_dir(out)?;
    bank.write_wav(&out.join("filters.wav"))?;
    let mut sidecar = serde_json::to_string_pretty(&bank.sidecar(&geometry_hash)).map_err(|e| CliError::Internal(e.to_string()))?;
    sidecar.push('\n');
    write_text(&out.join("filters.json"), &sidecar)?;
    manifest.output(out, "filters.wav")?;
    manifest.output(out, "filters.json")?;
    manifest.write(&out.join("manifest.json"))?;
    eprintln!("wrote {} x 2 filters of {} taps into {}", bank.n_mics, bank.nfft, out.display());
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum)]
    pub experiment: Experiment,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let Loaded { cfg, scene, geom, mut manifest } = load_common(&args.run, "evaluate", true)?;
    let scene = scene.expect("scene required");
    if scene.sources.is_empty() {
        return user("evaluation needs at least one source in the scene");
    }
    let hrtf = load_hrtf(&cfg)?;
    manifest.config["experiment"] = json!(format!("{:?}", args.experiment).to_lowercase());
    let rows = run_experiment(args.experiment, &cfg, &scene, &geom, &hrtf)?;
    let out = cfg.output_dir()?;
    prepare_dir(out)?;
    let path = out.join("metrics.csv");
    let file = std::fs::File::create(&path).map_err(io_ctx(&path))?;
    arraybin::metrics::write_metric_csv(std::io::BufWriter::new(file), &rows)?;
    manifest.output(out, "metrics.csv")?;
    manifest.write(&out.join("manifest.json"))?;
    eprintln!("wrote {} metric rows into {}", rows.len(), path.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    /// Gauss-Legendre grid that determines `--grid-order`.
    Gauss,
    /// 5° grid, zeniths 10°..160°.
    Deg5,
}

#[derive(Debug, Clone, Args)]
pub struct HrtfArgs {
    /// Generate rigid-sphere HRTFs of the synthetic head.
    #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
    pub synthetic: bool,
    /// Import a CSV table (`ear,zenith_deg,azimuth_deg,mag_<f>,phase_<f>,...`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Source distance R_s, m.
    #[arg(long, default_value_t = 1.5)]
    pub radius: f64,
    #[arg(long, value_enum, default_value = "gauss")]
    pub grid: GridKind,
    #[arg(long, default_value_t = 35)]
    pub grid_order: usize,
    /// Frequencies `lo:hi:step` in Hz.
    #[arg(long, default_value = "100:4000:100")]
    pub freqs: String,
    #[arg(long, default_value_t = 48000.0)]
    pub sample_rate: f64,
    /// Output stem; writes `<stem>.json` and `<stem>.bin`.
    #[arg(long, short)]
    pub out: PathBuf,
}

fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| CliError::User(format!("--freqs '{s}': {e}")))?;
    match v[..] {
        [lo, hi, step] if lo > 0.0 && hi >= lo && step > 0.0 => Ok(Scene::freq_grid(lo, hi, step)),
        _ => user(format!("--freqs '{s}': expected lo:hi:step with 0 < lo <= hi and step > 0")),
    }
}

pub fn cmd_hrtf(args: &HrtfArgs) -> CliResult<()> {
    if !(args.radius > 0.0) || !(args.sample_rate > 0.0) {
        return user("radius and sample rate must be positive");
    }
    let mut m = Manifest::new("hrtf", json!({
        "synthetic": args.synthetic, "radius": args.radius, "grid": format!("{:?}", args.grid).to_lowercase(),
        "grid_order": args.grid_order, "freqs": args.freqs, "sample_rate": args.sample_rate,
    }))?;
    let set = if let Some(path) = &args.csv {
        m.input("csv", path)?;
        let text = std::fs::read_to_string(path).map_err(io_ctx(path))?;
        hrtf_set_from_csv(&text, args.radius, args.sample_rate).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?
    } else {
        let freqs = parse_range(&args.freqs)?;
        let grid = match args.grid {
            GridKind::Gauss => {
                if args.grid_order == 0 || args.grid_order > 60 {
                    return user(format!("--grid-order must lie in 1..=60, got {}", args.grid_order));
                }
                gauss_grid_for_order(args.grid_order)
            }
            GridKind::Deg5 => measurement_grid_5deg(),
        };
        synth_rigid_sphere_hrtf(&SyntheticHead::default(), &grid, &freqs, args.radius, SOUND_SPEED, args.sample_rate)?
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_dir(parent)?;
    }
    let (json_path, bin_path) = write_hrtf_bundle(&args.out, &set)?;
    let dir = args.out.parent().unwrap_or(Path::new(""));
    for p in [&json_path, &bin_path] {
        m.output(dir, &p.file_name().expect("bundle file name").to_string_lossy())?;
    }
    m.write(&args.out.with_extension("manifest.json"))?;
    eprintln!("wrote {} directions x {} frequencies to {}", set.directions.len(), set.freqs.len(), json_path.display());
    Ok(())
}
