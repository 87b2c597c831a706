//! Scene files.
//!
//! ```json
//! {"version": 1, "sound_speed": 346.2,
//!  "band": {"lo": 100, "hi": 1600, "step": 100},
//!  "sources": [{"pos": [1.5, 0, 0]},
//!              {"plane_wave": [0, 1, 0], "gain": [0.5, 0]},
//!              {"pos": [0, 2, 0], "spectrum_ref": "voice.csv"}]}
//! ```
//!
//! Frequencies come from either `freqs` (list, Hz) or `band`. A source has
//! unit gain unless it carries `gain` (`[re, im]`), an inline `spectrum`
//! (one `[re, im]` per frequency) or `spectrum_ref`, a CSV file with header
//! `freq,re,im` listing exactly the scene frequencies.

use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Deserialize;

use arraybin::simulate::{Scene, Source, SourceKind, SOUND_SPEED};

use crate::error::{io_ctx, user, CliResult};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BandJson {
    lo: f64,
    hi: f64,
    step: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceJson {
    pos: Option<[f64; 3]>,
    plane_wave: Option<[f64; 3]>,
    gain: Option<[f64; 2]>,
    spectrum: Option<Vec<[f64; 2]>>,
    spectrum_ref: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneJson {
    version: u32,
    #[serde(default)]
    sound_speed: Option<f64>,
    #[serde(default)]
    freqs: Option<Vec<f64>>,
    #[serde(default)]
    band: Option<BandJson>,
    sources: Vec<SourceJson>,
}

fn read_spectrum_csv(path: &Path, freqs: &[f64]) -> CliResult<Vec<Complex64>> {
    let text = std::fs::read_to_string(path).map_err(io_ctx(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = match reader.headers() {
        Ok(h) => h.iter().map(str::to_string).collect(),
        Err(e) => return user(format!("{}: {e}", path.display())),
    };
    if header != ["freq", "re", "im"] {
        return user(format!("{}: expected header 'freq,re,im'", path.display()));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| crate::error::CliError::User(format!("{}: {e}", path.display())))?;
        let num = |j: usize| -> CliResult<f64> {
            rec[j].parse().map_err(|_| crate::error::CliError::User(format!("{} row {}: '{}' is not a number", path.display(), i + 2, &rec[j])))
        };
        let f = num(0)?;
        match freqs.get(i) {
            Some(&g) if (g - f).abs() <= 1e-9 * g.abs().max(1.0) => out.push(Complex64::new(num(1)?, num(2)?)),
            _ => return user(format!("{} row {}: frequency {f} Hz does not match the scene grid", path.display(), i + 2)),
        }
    }
    if out.len() != freqs.len() {
        return user(format!("{}: {} rows for {} scene frequencies", path.display(), out.len(), freqs.len()));
    }
    Ok(out)
}

/// Parses and validates a scene; relative `spectrum_ref` paths resolve
/// against `base_dir`.
pub fn parse_scene(text: &str, base_dir: &Path) -> CliResult<Scene> {
    let s: SceneJson = serde_json::from_str(text).map_err(|e| crate::error::CliError::User(format!("scene: {e}")))?;
    if s.version != 1 {
        return user(format!("scene: unsupported version {}", s.version));
    }
    let freqs = match (s.freqs, s.band) {
        (Some(f), None) => f,
        (None, Some(b)) => {
            if !(b.step > 0.0 && b.lo > 0.0 && b.hi >= b.lo) {
                return user("scene: band needs 0 < lo <= hi and step > 0");
            }
            Scene::freq_grid(b.lo, b.hi, b.step)
        }
        _ => return user("scene: give exactly one of 'freqs' or 'band'"),
    };
    if freqs.is_empty() {
        return user("scene: no frequencies");
    }
    let mut sources = Vec::with_capacity(s.sources.len());
    for (i, src) in s.sources.into_iter().enumerate() {
        let kind = match (src.pos, src.plane_wave) {
            (Some(p), None) => SourceKind::Point(Vector3::from(p)),
            (None, Some(d)) => SourceKind::PlaneWave(Vector3::from(d)),
            _ => return user(format!("scene source {i}: give exactly one of 'pos' or 'plane_wave'")),
        };
        let given = [src.gain.is_some(), src.spectrum.is_some(), src.spectrum_ref.is_some()].iter().filter(|b| **b).count();
        if given > 1 {
            return user(format!("scene source {i}: 'gain', 'spectrum' and 'spectrum_ref' are mutually exclusive"));
        }
        let spectrum = if let Some([re, im]) = src.gain {
            vec![Complex64::new(re, im); freqs.len()]
        } else if let Some(sp) = src.spectrum {
            sp.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
        } else if let Some(r) = src.spectrum_ref {
            read_spectrum_csv(&base_dir.join(r), &freqs)?
        } else {
            vec![Complex64::new(1.0, 0.0); freqs.len()]
        };
        sources.push(Source { kind, spectrum });
    }
    let scene = Scene { sources, freqs, sound_speed: s.sound_speed.unwrap_or(SOUND_SPEED) };
    scene.validate()?;
    if scene.freqs.windows(2).any(|w| w[1] <= w[0]) {
        return user("scene: frequencies must be strictly increasing");
    }
    Ok(scene)
}

/// Complex gain of `src` at `freq`, interpolated linearly between scene
/// frequencies and held constant outside them.
pub fn gain_at(scene: &Scene, src: &Source, freq: f64) -> Complex64 {
    let f = &scene.freqs;
    if freq <= f[0] {
        return src.spectrum[0];
    }
    if freq >= f[f.len() - 1] {
        return src.spectrum[f.len() - 1];
    }
    let hi = f.iter().position(|&v| v > freq).expect("freq below the last grid point");
    let t = (freq - f[hi - 1]) / (f[hi] - f[hi - 1]);
    src.spectrum[hi - 1] * (1.0 - t) + src.spectrum[hi] * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_and_sources() {
        let text = r#"{"version": 1, "band": {"lo": 100, "hi": 400, "step": 100},
            "sources": [{"pos": [1.5, 0, 0]}, {"plane_wave": [0, 1, 0], "gain": [0.5, 0.25]}]}"#;
        let s = parse_scene(text, Path::new(".")).unwrap();
        assert_eq!(s.freqs, vec![100.0, 200.0, 300.0, 400.0]);
        assert_eq!(s.sources[1].spectrum[3], Complex64::new(0.5, 0.25));
        assert_eq!(s.sound_speed, SOUND_SPEED);
        assert!((gain_at(&s, &s.sources[1], 250.0) - Complex64::new(0.5, 0.25)).norm() < 1e-15);
    }

    #[test]
    fn empty_scene_is_valid() {
        let s = parse_scene(r#"{"version": 1, "freqs": [500], "sources": []}"#, Path::new(".")).unwrap();
        assert!(s.sources.is_empty());
    }

    #[test]
    fn rejects_bad_scenes() {
        for text in [
            r#"{"version": 2, "freqs": [500], "sources": []}"#,
            r#"{"version": 1, "sources": []}"#,
            r#"{"version": 1, "freqs": [500], "sources": [{"pos": [1, 0, 0], "plane_wave": [1, 0, 0]}]}"#,
            r#"{"version": 1, "freqs": [500, 400], "sources": []}"#,
            r#"{"version": 1, "freqs": [500], "sources": [{"pos": [1, 0, 0], "spectrum": [[1, 0], [2, 0]]}]}"#,
            r#"{"version": 1, "freqs": [500], "sources": [], "extra": 1}"#,
        ] {
            assert!(parse_scene(text, Path::new(".")).is_err(), "{text}");
        }
    }

    #[test]
    fn spectrum_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.csv"), "freq,re,im\n100,1,0\n200,0,2\n").unwrap();
        let text = r#"{"version": 1, "freqs": [100, 200], "sources": [{"pos": [1, 0, 0], "spectrum_ref": "s.csv"}]}"#;
        let s = parse_scene(text, dir.path()).unwrap();
        assert_eq!(s.sources[0].spectrum, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]);
        std::fs::write(dir.path().join("s.csv"), "freq,re,im\n100,1,0\n250,0,2\n").unwrap();
        assert!(parse_scene(text, dir.path()).is_err());
    }
}
