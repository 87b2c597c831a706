//! Microphone and array geometry.

mod io;

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special_fn::{cart_to_sph, order_from_len, sph_harmonics_all};

pub use io::{geometry_from_json, geometry_to_json, round_sig};

/// A single microphone. `dir_coeffs` are the interior-expansion coefficients of
/// its directivity, so that the observation of a field `α` (about the mic
/// position) is `c^H α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Microphone {
    pub position: Vector3<f64>,
    pub orientation: Vector3<f64>,
    pub dir_coeffs: DVector<Complex64>,
    /// First-order mix parameter when the directivity is a cardioid family pattern.
    pub beta: Option<f64>,
}

impl Microphone {
    pub fn omni(position: Vector3<f64>) -> Self {
        Microphone {
            position,
            orientation: Vector3::z(),
            dir_coeffs: DVector::from_element(1, Complex64::new(1.0, 0.0)),
            beta: Some(1.0),
        }
    }

    pub fn cardioid(position: Vector3<f64>, orientation: Vector3<f64>, beta: f64) -> Self {
        let orientation = orientation.normalize();
        Microphone { position, orientation, dir_coeffs: cardioid_coeffs(beta, &orientation), beta: Some(beta) }
    }

    pub fn dir_order(&self) -> usize {
        order_from_len(self.dir_coeffs.len()).expect("directivity length is a perfect square")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baffle {
    RigidSphere { center: Vector3<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub mics: Vec<Microphone>,
    pub baffle: Option<Baffle>,
}

impl ArrayGeometry {
    pub fn len(&self) -> usize {
        self.mics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mics.is_empty()
    }

    /// Mean of the microphone positions.
    pub fn centroid(&self) -> Vector3<f64> {
        let s: Vector3<f64> = self.mics.iter().map(|m| m.position).sum();
        s / self.mics.len().max(1) as f64
    }

    /// Largest directivity order over all microphones.
    pub fn max_dir_order(&self) -> usize {
        self.mics.iter().map(|m| m.dir_order()).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mics.is_empty() {
            return Err(Error::InvalidInput("array has no microphones".into()));
        }
        for (i, m) in self.mics.iter().enumerate() {
            if order_from_len(m.dir_coeffs.len()).is_none() {
                return Err(Error::InvalidInput(format!("mic {i}: directivity length {} is not a perfect square", m.dir_coeffs.len())));
            }
            if (m.orientation.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("mic {i}: orientation is not a unit vector")));
            }
            if !m.position.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput(format!("mic {i}: non-finite position")));
            }
        }
        if let Some(Baffle::RigidSphere { center, radius }) = self.baffle {
            if radius <= 0.0 {
                return Err(Error::InvalidInput("baffle radius must be positive".into()));
            }
            for (i, m) in self.mics.iter().enumerate() {
                let off = ((m.position - center).norm() - radius).abs();
                if off > 1e-9 {
                    return Err(Error::InvalidInput(format!("mic {i} lies {off:.3e} m off the baffle surface")));
                }
            }
        }
        Ok(())
    }
}

/// First-order directivity `β + (1-β) cos ∠(η, orientation)` as expansion
/// coefficients `[β, (√(4π) i/3)(1-β) Y_1^m(orientation)^*]`, `m = -1, 0, 1`.
pub fn cardioid_coeffs(beta: f64, orientation: &Vector3<f64>) -> DVector<Complex64> {
    assert!((0.0..=1.0).contains(&beta), "beta must lie in [0, 1], got {beta}");
    let (_, theta, phi) = cart_to_sph(orientation);
    let y = sph_harmonics_all(1, theta, phi);
    let w = Complex64::new(0.0, (4.0 * PI).sqrt() / 3.0 * (1.0 - beta));
    DVector::from_vec(vec![Complex64::new(beta, 0.0), w * y[1].conj(), w * y[2].conj(), w * y[3].conj()])
}

/// Default radius of the 8-capsule array, m.
pub const SMALL_ARRAY_RADIUS: f64 = 0.015;

/// Eight outward-facing cardioids on two staggered squares at `z = ±radius/√3`,
/// all at distance `radius` from `center`. The upper square has a vertex at
/// azimuth `yaw`; the lower one is turned by 45°.
pub fn build_small_array(center: &Vector3<f64>, yaw: f64, radius: f64, beta: f64) -> ArrayGeometry {
    assert!(radius > 0.0, "radius must be positive");
    let z = radius / 3f64.sqrt();
    let rho = radius * (2.0f64 / 3.0).sqrt();
    let mut mics = Vec::with_capacity(8);
    for (ring, height) in [(0, z), (1, -z)] {
        for q in 0..4 {
            let az = yaw + q as f64 * PI / 2.0 + ring as f64 * PI / 4.0;
            let local = Vector3::new(rho * az.cos(), rho * az.sin(), height);
            mics.push(Microphone::cardioid(center + local, local / radius, beta));
        }
    }
    ArrayGeometry { mics, baffle: None }
}

/// Placement of the small arrays inside the composite layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeLayout {
    pub ring_radius: f64,
    pub ring_heights: [f64; 2],
    pub small_radius: f64,
    /// Azimuth of the first small array on each ring.
    pub azimuth_offset: f64,
    /// Turn each small array to face away from the composite center.
    pub outward: bool,
}

impl Default for CompositeLayout {
    fn default() -> Self {
        CompositeLayout { ring_radius: 0.145, ring_heights: [0.025, -0.025], small_radius: SMALL_ARRAY_RADIUS, azimuth_offset: 0.0, outward: true }
    }
}

/// 64 microphones: four small arrays per ring, two rings.
pub fn build_composite_array(center: &Vector3<f64>, beta: f64) -> ArrayGeometry {
    build_composite_array_with(center, beta, &CompositeLayout::default())
}

pub fn build_composite_array_with(center: &Vector3<f64>, beta: f64, layout: &CompositeLayout) -> ArrayGeometry {
    let mut mics = Vec::with_capacity(64);
    for &h in &layout.ring_heights {
        for q in 0..4 {
            let az = layout.azimuth_offset + q as f64 * PI / 2.0;
            let c = center + Vector3::new(layout.ring_radius * az.cos(), layout.ring_radius * az.sin(), h);
            let yaw = if layout.outward { az } else { 0.0 };
            mics.extend(build_small_array(&c, yaw, layout.small_radius, beta).mics);
        }
    }
    ArrayGeometry { mics, baffle: None }
}

const TDESIGN_DATA: &str = include_str!("../../data/tdesign_7_64.txt");

/// Unit vectors of the embedded 64-node spherical 7-design.
pub fn tdesign_7_64() -> &'static [Vector3<f64>] {
    static NODES: OnceLock<Vec<Vector3<f64>>> = OnceLock::new();
    NODES.get_or_init(|| {
        TDESIGN_DATA
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().expect("malformed t-design table")).collect();
                Vector3::new(v[0], v[1], v[2]).normalize()
            })
            .collect()
    })
}

/// Default baffle radius of the spherical array, m.
pub const RIGID_SPHERE_RADIUS: f64 = 0.145;

/// 64 omnidirectional microphones on a rigid sphere at the 7-design nodes.
pub fn build_rigid_sphere_array(center: &Vector3<f64>, radius: f64) -> ArrayGeometry {
    assert!(radius > 0.0, "radius must be positive");
    let mics = tdesign_7_64().iter().map(|u| Microphone::omni(center + u * radius)).collect();
    ArrayGeometry { mics, baffle: Some(Baffle::RigidSphere { center: *center, radius }) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::{sh_count, ShIndex};
    use crate::wavefield::plane_wave_coeffs;
    use nalgebra::Rotation3;

    #[test]
    fn cardioid_limits() {
        let c = cardioid_coeffs(1.0, &Vector3::new(0.3, 0.4, 0.5).normalize());
        assert_eq!(c[0], Complex64::new(1.0, 0.0));
        assert!(c.iter().skip(1).all(|z| z.norm() == 0.0));
        let c = cardioid_coeffs(0.5, &Vector3::z());
        assert!(c[1].norm() < 1e-16 && c[3].norm() < 1e-16);
    }

    #[test]
    fn cardioid_plane_wave_response() {
        let beta = 0.3;
        let o = Vector3::new(0.2, -0.7, 0.4).normalize();
        let eta = Vector3::new(-0.5, 0.1, 0.9).normalize();
        let c = cardioid_coeffs(beta, &o);
        let a = plane_wave_coeffs(&eta, &Vector3::zeros(), 3.0, 1);
        let s = c.dotc(&a.coeffs);
        let expected = beta + (1.0 - beta) * eta.dot(&o);
        assert!((s - expected).norm() < 1e-12);
    }

    #[test]
    fn small_array_shape() {
        let c = Vector3::new(0.3, -0.2, 0.1);
        let g = build_small_array(&c, 0.4, SMALL_ARRAY_RADIUS, 0.5);
        assert_eq!(g.len(), 8);
        assert!((g.centroid() - c).norm() < 1e-12);
        for m in &g.mics {
            assert!(((m.position - c).norm() - SMALL_ARRAY_RADIUS).abs() < 1e-15);
            assert!((m.orientation - (m.position - c) / SMALL_ARRAY_RADIUS).norm() < 1e-12);
        }
        let mut dmin = f64::INFINITY;
        for i in 0..8 {
            for j in i + 1..8 {
                dmin = dmin.min((g.mics[i].position - g.mics[j].position).norm());
            }
        }
        assert!((dmin - SMALL_ARRAY_RADIUS * (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        g.validate().unwrap();
    }

    #[test]
    fn composite_layout() {
        let g = build_composite_array(&Vector3::zeros(), 0.5);
        assert_eq!(g.len(), 64);
        for block in g.mics.chunks(8) {
            let c: Vector3<f64> = block.iter().map(|m| m.position).sum::<Vector3<f64>>() / 8.0;
            assert!((c.xy().norm() - 0.145).abs() < 1e-12);
            assert!((c.z.abs() - 0.025).abs() < 1e-12);
        }
        // a quarter turn about z maps the layout onto itself
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), PI / 2.0);
        for m in &g.mics {
            let p = rot * m.position;
            let o = rot * m.orientation;
            let hit = g.mics.iter().any(|n| (n.position - p).norm() < 1e-12 && (n.orientation - o).norm() < 1e-12);
            assert!(hit);
        }
    }

    #[test]
    fn tdesign_property() {
        let nodes = tdesign_7_64();
        assert_eq!(nodes.len(), 64);
        let mut acc = vec![Complex64::new(0.0, 0.0); sh_count(7)];
        for u in nodes {
            let (_, t, p) = cart_to_sph(u);
            for (a, y) in acc.iter_mut().zip(sph_harmonics_all(7, t, p)) {
                *a += y;
            }
        }
        for idx in ShIndex::iter_to(7).filter(|i| i.n >= 1) {
            assert!(acc[idx.linear()].norm() < 1e-10, "{idx:?}");
        }
        // not a design of degree 8
        let max8 = ShIndex::iter_to(8).filter(|i| i.n == 8).map(|i| {
            nodes.iter().map(|u| { let (_, t, p) = cart_to_sph(u); sph_harmonics_all(8, t, p)[i.linear()] }).sum::<Complex64>().norm()
        }).fold(0.0, f64::max);
        assert!(max8 > 1e-6);
    }

    #[test]
    fn rigid_sphere_array() {
        let c = Vector3::new(0.0, 0.1, 0.0);
        let g = build_rigid_sphere_array(&c, RIGID_SPHERE_RADIUS);
        assert_eq!(g.len(), 64);
        for m in &g.mics {
            assert!(((m.position - c).norm() - RIGID_SPHERE_RADIUS).abs() < 1e-12);
        }
        g.validate().unwrap();
    }
}
