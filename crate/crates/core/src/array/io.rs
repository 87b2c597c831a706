//! Geometry JSON:
//!
//! ```json
//! {"mics": [{"pos": [x, y, z], "orient": [x, y, z], "beta": 0.5}, ...],
//!  "baffle": {"type": "rigid_sphere", "center": [x, y, z], "radius": 0.145}}
//! ```
//!
//! A microphone carries either `beta` (cardioid family) or explicit
//! `dir_coeffs` as `[re, im]` pairs. Numbers are rounded to 12 significant
//! digits on output, so writing a parsed file reproduces it byte for byte.

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{cardioid_coeffs, ArrayGeometry, Baffle, Microphone};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct MicJson {
    pos: [f64; 3],
    orient: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    dir_coeffs: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct BaffleJson {
    #[serde(rename = "type")]
    kind: String,
    center: [f64; 3],
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct GeometryJson {
    mics: Vec<MicJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    baffle: Option<BaffleJson>,
}

/// `v` rounded to 12 significant decimal digits.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

fn r3(v: &Vector3<f64>) -> [f64; 3] {
    [round_sig(v.x), round_sig(v.y), round_sig(v.z)]
}

pub fn geometry_to_json(g: &ArrayGeometry) -> Result<String> {
    let mics = g
        .mics
        .iter()
        .map(|m| {
            let regenerated = m.beta.map(|b| {
                if m.dir_coeffs.len() == 1 {
                    b == 1.0
                } else {
                    m.dir_coeffs.len() == 4 && (cardioid_coeffs(b, &m.orientation) - &m.dir_coeffs).norm() < 1e-12
                }
            });
            let use_beta = regenerated == Some(true);
            MicJson {
                pos: r3(&m.position),
                orient: r3(&m.orientation),
                beta: if use_beta { m.beta.map(round_sig) } else { None },
                dir_coeffs: if use_beta {
                    None
                } else {
                    Some(m.dir_coeffs.iter().map(|c| [round_sig(c.re), round_sig(c.im)]).collect())
                },
            }
        })
        .collect();
    let baffle = g.baffle.map(|b| match b {
        Baffle::RigidSphere { center, radius } => {
            BaffleJson { kind: "rigid_sphere".into(), center: r3(&center), radius: round_sig(radius) }
        }
    });
    Ok(serde_json::to_string_pretty(&GeometryJson { mics, baffle })?)
}

pub fn geometry_from_json(text: &str) -> Result<ArrayGeometry> {
    let parsed: GeometryJson = serde_json::from_str(text)?;
    let mut mics = Vec::with_capacity(parsed.mics.len());
    for (i, m) in parsed.mics.into_iter().enumerate() {
        let position = Vector3::from(m.pos);
        let orient = Vector3::from(m.orient);
        let n = orient.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidInput(format!("mic {i}: zero orientation")));
        }
        let orientation = orient / n;
        let mic = match (m.beta, m.dir_coeffs) {
            (Some(b), None) => {
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::InvalidInput(format!("mic {i}: beta {b} outside [0, 1]")));
                }
                if b == 1.0 {
                    Microphone { orientation, ..Microphone::omni(position) }
                } else {
                    Microphone { position, orientation, dir_coeffs: cardioid_coeffs(b, &orientation), beta: Some(b) }
                }
            }
            (None, Some(c)) => Microphone {
                position,
                orientation,
                dir_coeffs: DVector::from_iterator(c.len(), c.iter().map(|p| Complex64::new(p[0], p[1]))),
                beta: None,
            },
            _ => return Err(Error::InvalidInput(format!("mic {i}: give exactly one of beta or dir_coeffs"))),
        };
        mics.push(mic);
    }
    let baffle = match parsed.baffle {
        None => None,
        Some(b) if b.kind == "rigid_sphere" => Some(Baffle::RigidSphere { center: Vector3::from(b.center), radius: b.radius }),
        Some(b) => return Err(Error::InvalidInput(format!("unknown baffle type '{}'", b.kind))),
    };
    let g = ArrayGeometry { mics, baffle };
    g.validate()?;
    Ok(g)
}
