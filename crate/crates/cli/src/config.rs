//! Run configuration: a versioned JSON document, overridden by flags.
//!
//! Paths inside a config file are relative to the file's directory; paths
//! given as flags are relative to the working directory.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use arraybin::metrics::{DEFAULT_RW, MAX_ORDER};
use arraybin::rendering::{FilterDesign, RenderMode, Window};
use arraybin::simulate::SOUND_SPEED;

use crate::error::{io_ctx, user, CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorParams {
    /// Tikhonov weight; `None` selects the trace-relative default.
    pub lambda: Option<f64>,
    /// Regularization of the rigid-sphere estimator.
    pub eta: f64,
    /// Fixed estimation order; `None` uses the truncation rule.
    pub order: Option<usize>,
    /// Extra orders kept when re-expanding about a moved center.
    pub buffer: usize,
    /// Radius of the region the truncation rule must cover, m.
    pub r_w: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams { lambda: None, eta: 1e-10, order: None, buffer: 10, r_w: DEFAULT_RW }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderParams {
    pub mode: RenderMode,
    /// HRTF measurement radius `R_s` for the synthetic head, m.
    pub radius: f64,
    pub nfft: usize,
    pub sample_rate: f64,
    pub window: Window,
    pub band_hz: f64,
    /// Spherical-harmonic order of the HRTF spectra.
    pub hrtf_order: usize,
}

impl Default for RenderParams {
    fn default() -> Self {
        let d = FilterDesign::default();
        RenderParams { mode: d.mode, radius: 1.5, nfft: d.nfft, sample_rate: d.sample_rate, window: d.window, band_hz: d.band_hz, hrtf_order: MAX_ORDER }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ListenerParams {
    pub position: [f64; 3],
    /// z-y-z Euler angles in degrees, applied to the scene about the listener.
    pub angles_deg: [f64; 3],
}

impl Default for ListenerParams {
    fn default() -> Self {
        ListenerParams { position: [0.0; 3], angles_deg: [0.0; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub scene: Option<PathBuf>,
    #[serde(default)]
    pub geometry: Option<PathBuf>,
    /// HRTF bundle; without one the synthetic rigid-sphere head is used.
    #[serde(default)]
    pub hrtf: Option<PathBuf>,
    /// Observation bundle; without one observations are simulated from the scene.
    #[serde(default)]
    pub observation: Option<PathBuf>,
    #[serde(default)]
    pub estimator: EstimatorParams,
    #[serde(default)]
    pub render: RenderParams,
    #[serde(default)]
    pub listener: ListenerParams,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            scene: None,
            geometry: None,
            hrtf: None,
            observation: None,
            estimator: EstimatorParams::default(),
            render: RenderParams::default(),
            listener: ListenerParams::default(),
            output: None,
            seed: 0,
        }
    }
}

/// Flags shared by the config-driven commands. Each one overrides the
/// corresponding config value.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    #[arg(long)]
    pub hrtf: Option<PathBuf>,
    #[arg(long)]
    pub observation: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<RenderMode>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub buffer: Option<usize>,
    /// HRTF measurement radius R_s, m.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub nfft: Option<usize>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Upper band edge of the filters, Hz.
    #[arg(long)]
    pub band: Option<f64>,
    #[arg(long)]
    pub hrtf_order: Option<usize>,
    /// Listener position `x,y,z` in m.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub position: Option<[f64; 3]>,
    /// Listener Euler angles `alpha,beta,gamma` in degrees.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub angles: Option<[f64; 3]>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_mode(s: &str) -> Result<RenderMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "sph" => Ok(RenderMode::Sph),
        "pln" => Ok(RenderMode::Pln),
        other => Err(format!("unknown mode '{other}' (expected sph or pln)")),
    }
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| format!("'{s}': {e}"))?;
    match v[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(format!("'{s}': expected three comma-separated numbers")),
    }
}

impl RunConfig {
    /// Reads `args.config` (if any), resolves its relative paths and applies
    /// every flag on top.
    pub fn load(args: &RunArgs) -> CliResult<RunConfig> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(io_ctx(path))?;
                let mut c: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
                let base = path.parent().unwrap_or(Path::new(""));
                for p in [&mut c.scene, &mut c.geometry, &mut c.hrtf, &mut c.observation, &mut c.output].into_iter().flatten() {
                    if p.is_relative() {
                        *p = base.join(&*p);
                    }
                }
                c
            }
            None => RunConfig::default(),
        };
        if cfg.version != CONFIG_VERSION {
            return user(format!("config version {} is not supported (expected {CONFIG_VERSION})", cfg.version));
        }
        macro_rules! over {
            ($flag:expr => $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v;
                }
            };
        }
        over!(args.scene.clone().map(Some) => cfg.scene);
        over!(args.geometry.clone().map(Some) => cfg.geometry);
        over!(args.hrtf.clone().map(Some) => cfg.hrtf);
        over!(args.observation.clone().map(Some) => cfg.observation);
        over!(args.out.clone().map(Some) => cfg.output);
        over!(args.mode => cfg.render.mode);
        over!(args.lambda.map(Some) => cfg.estimator.lambda);
        over!(args.eta => cfg.estimator.eta);
        over!(args.order.map(Some) => cfg.estimator.order);
        over!(args.buffer => cfg.estimator.buffer);
        over!(args.radius => cfg.render.radius);
        over!(args.nfft => cfg.render.nfft);
        over!(args.sample_rate => cfg.render.sample_rate);
        over!(args.band => cfg.render.band_hz);
        over!(args.hrtf_order => cfg.render.hrtf_order);
        over!(args.position => cfg.listener.position);
        over!(args.angles => cfg.listener.angles_deg);
        over!(args.seed => cfg.seed);
        cfg.check_ranges()?;
        Ok(cfg)
    }

    /// Parameter checks that need no files.
    pub fn check_ranges(&self) -> CliResult<()> {
        let e = &self.estimator;
        if let Some(l) = e.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return user(format!("lambda must be a finite non-negative number, got {l}"));
            }
        }
        if !(e.eta >= 0.0 && e.eta.is_finite()) {
            return user(format!("eta must be a finite non-negative number, got {}", e.eta));
        }
        if !(e.r_w > 0.0) {
            return user(format!("r_w must be positive, got {}", e.r_w));
        }
        if let Some(n) = e.order {
            if n > 60 {
                return user(format!("estimation order {n} is above the supported maximum of 60"));
            }
        }
        let r = &self.render;
        if !(r.radius > 0.0 && r.radius.is_finite()) {
            return user(format!("render radius must be positive, got {}", r.radius));
        }
        if r.hrtf_order == 0 || r.hrtf_order > 60 {
            return user(format!("hrtf_order must lie in 1..=60, got {}", r.hrtf_order));
        }
        self.filter_design().validate()?;
        if self.listener.position.iter().chain(&self.listener.angles_deg).any(|v| !v.is_finite()) {
            return user("listener position and angles must be finite");
        }
        Ok(())
    }

    pub fn filter_design(&self) -> FilterDesign {
        let r = &self.render;
        FilterDesign {
            sample_rate: r.sample_rate,
            nfft: r.nfft,
            band_hz: r.band_hz,
            window: r.window,
            mode: r.mode,
            lambda: self.estimator.lambda,
            order: self.estimator.order,
            r_w: self.estimator.r_w,
            sound_speed: SOUND_SPEED,
        }
    }

    pub fn require<'a>(&self, field: &'a Option<PathBuf>, name: &str) -> CliResult<&'a Path> {
        match field {
            Some(p) if p.exists() => Ok(p.as_path()),
            Some(p) => user(format!("{name} file {} does not exist", p.display())),
            None => user(format!("no {name} given (set '{name}' in the config or pass --{name})")),
        }
    }

    pub fn output_dir(&self) -> CliResult<&Path> {
        match &self.output {
            Some(p) => Ok(p.as_path()),
            None => user("no output directory given (set 'output' in the config or pass --out)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let minimal: RunConfig = serde_json::from_str(r#"{"version": 1}"#).unwrap();
        assert_eq!(minimal, c);
    }

    #[test]
    fn flags_override_file_and_paths_resolve() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"version": 1, "scene": "s.json", "render": {"mode": "pln", "nfft": 1024}, "estimator": {"lambda": 0.5}}"#).unwrap();
        let args = RunArgs { config: Some(path), nfft: Some(2048), position: Some([0.1, 0.0, 0.0]), ..Default::default() };
        let c = RunConfig::load(&args).unwrap();
        assert_eq!(c.scene, Some(dir.path().join("s.json")));
        assert_eq!(c.render.mode, RenderMode::Pln);
        assert_eq!(c.render.nfft, 2048);
        assert_eq!(c.estimator.lambda, Some(0.5));
        assert_eq!(c.listener.position, [0.1, 0.0, 0.0]);
    }

    #[test]
    fn range_errors() {
        for bad in [
            RunArgs { lambda: Some(-1.0), ..Default::default() },
            RunArgs { nfft: Some(1001), ..Default::default() },
            RunArgs { band: Some(30000.0), ..Default::default() },
            RunArgs { radius: Some(0.0), ..Default::default() },
        ] {
            assert!(matches!(RunConfig::load(&bad), Err(CliError::User(_))));
        }
    }

    #[test]
    fn triples() {
        assert_eq!(parse_triple("1,-2, 3.5").unwrap(), [1.0, -2.0, 3.5]);
        assert!(parse_triple("1,2").is_err());
    }
}
