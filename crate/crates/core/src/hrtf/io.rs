use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;

use super::HrtfSet;
use crate::bundle::{read_bundle, write_bundle, BundleHeader};
use crate::error::{Error, Result};

const KIND: &str = "hrtf";

/// Writes `<stem>.json` and `<stem>.bin`. Responses are stored as 32-bit floats.
pub fn write_hrtf_bundle(stem: &Path, set: &HrtfSet) -> Result<(PathBuf, PathBuf)> {
    set.validate()?;
    let dirs: Vec<[f64; 2]> = set.directions.iter().map(|&(t, p)| [t, p]).collect();
    let meta = json!({
        "radius": set.radius,
        "sample_rate": set.sample_rate,
        "directions": dirs,
        "freqs": set.freqs,
    });
    let header = BundleHeader::new(KIND, &["ear", "freq", "direction"], &[2, set.freqs.len(), set.directions.len()], meta);
    write_bundle(stem, header, &set.responses)
}

pub fn read_hrtf_bundle(path: &Path) -> Result<HrtfSet> {
    let (header, responses) = read_bundle(path)?;
    if header.kind != KIND {
        return Err(Error::InvalidInput(format!("expected an hrtf bundle, found kind '{}'", header.kind)));
    }
    let meta = &header.meta;
    let num = |key: &str| meta[key].as_f64().ok_or_else(|| Error::InvalidInput(format!("hrtf bundle is missing '{key}'")));
    let dirs: Vec<[f64; 2]> = serde_json::from_value(meta["directions"].clone())?;
    let freqs: Vec<f64> = serde_json::from_value(meta["freqs"].clone())?;
    if header.shape != [2, freqs.len(), dirs.len()] {
        return Err(Error::InvalidInput(format!("hrtf bundle shape {:?} disagrees with its tables", header.shape)));
    }
    let set = HrtfSet {
        radius: num("radius")?,
        directions: dirs.into_iter().map(|[t, p]| (t, p)).collect(),
        freqs,
        responses,
        sample_rate: num("sample_rate")?,
    };
    set.validate()?;
    Ok(set)
}

/// Parses a small hand-made HRTF table.
///
/// Header: `ear,zenith_deg,azimuth_deg,mag_<f1>,phase_<f1>,mag_<f2>,phase_<f2>,...`
/// with frequencies in Hz and phases in radians. `ear` is `L` or `R`; both
/// ears must list the same directions in the same order.
pub fn hrtf_set_from_csv(text: &str, radius: f64, sample_rate: f64) -> Result<HrtfSet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.len() < 5 || (headers.len() - 3) % 2 != 0 {
        return Err(Error::InvalidInput("csv needs ear, zenith_deg, azimuth_deg and mag/phase column pairs".into()));
    }
    let mut freqs = Vec::new();
    for pair in 0..(headers.len() - 3) / 2 {
        let (m, p) = (&headers[3 + 2 * pair], &headers[4 + 2 * pair]);
        let f = m.strip_prefix("mag_").and_then(|s| s.parse::<f64>().ok());
        let g = p.strip_prefix("phase_").and_then(|s| s.parse::<f64>().ok());
        match (f, g) {
            (Some(f), Some(g)) if f == g => freqs.push(f),
            _ => return Err(Error::InvalidInput(format!("bad column pair '{m}', '{p}'"))),
        }
    }
    let nf = freqs.len();
    let mut dirs: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    let mut vals: [Vec<Vec<Complex64>>; 2] = [Vec::new(), Vec::new()];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let ear = match &rec[0] {
            "L" | "l" => 0,
            "R" | "r" => 1,
            other => return Err(Error::InvalidInput(format!("row {}: ear must be L or R, got '{other}'", line + 2))),
        };
        let parse = |i: usize| {
            rec[i].parse::<f64>().map_err(|_| Error::InvalidInput(format!("row {}: '{}' is not a number", line + 2, &rec[i])))
        };
        dirs[ear].push((parse(1)?.to_radians(), parse(2)?.to_radians()));
        let row = (0..nf).map(|fi| Ok(Complex64::from_polar(parse(3 + 2 * fi)?, parse(4 + 2 * fi)?))).collect::<Result<Vec<_>>>()?;
        vals[ear].push(row);
    }
    if dirs[0] != dirs[1] {
        return Err(Error::InvalidInput("left and right rows must list the same directions".into()));
    }
    let nd = dirs[0].len();
    let mut responses = Vec::with_capacity(2 * nf * nd);
    for ear_vals in &vals {
        for fi in 0..nf {
            responses.extend(ear_vals.iter().map(|row| row[fi]));
        }
    }
    let set = HrtfSet { radius, directions: dirs[0].clone(), freqs, responses, sample_rate };
    set.validate()?;
    Ok(set)
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_roundtrip() {
        let set = HrtfSet {
            radius: 1.5,
            directions: vec![(0.1, 0.2), (1.0, -2.0), (3.0, 0.0)],
            freqs: vec![100.0, 200.0],
            responses: (0..12).map(|i| Complex64::new(i as f64 * 0.25, 1.0 - i as f64)).collect(),
            sample_rate: 48000.0,
        };
        let dir = tempfile::tempdir().unwrap();
        write_hrtf_bundle(&dir.path().join("h"), &set).unwrap();
        let back = read_hrtf_bundle(&dir.path().join("h.json")).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn csv_import() {
        let text = "ear,zenith_deg,azimuth_deg,mag_500,phase_500,mag_1000,phase_1000\n\
                    L,90,90,2.0,0.5,1.0,0.0\n\
                    L,90,0,1.0,0.0,1.0,0.0\n\
                    R,90,90,0.5,0.1,1.0,0.0\n\
                    R,90,0,1.0,0.0,1.0,0.0\n";
        let set = hrtf_set_from_csv(text, 1.5, 48000.0).unwrap();
        assert_eq!(set.freqs, vec![500.0, 1000.0]);
        assert_eq!(set.directions.len(), 2);
        assert!((set.response(0, 0, 0) - Complex64::from_polar(2.0, 0.5)).norm() < 1e-15);
        assert!((set.response(1, 0, 0) - Complex64::from_polar(0.5, 0.1)).norm() < 1e-15);
        assert!(hrtf_set_from_csv("ear,zenith_deg,azimuth_deg,mag_1,phase_2\n", 1.5, 48000.0).is_err());
    }
}
