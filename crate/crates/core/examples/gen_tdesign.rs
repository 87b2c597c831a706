//! Regenerates `data/tdesign_7_64.txt`: 64 points on the unit sphere whose
//! equal-weight average integrates every spherical harmonic of degree 1..=7
//! to zero. Damped minimum-norm Gauss-Newton from a Fibonacci lattice.
//!
//! cargo run --release -p arraybin-core --example gen_tdesign > crates/core/data/tdesign_7_64.txt

use std::f64::consts::PI;

use arraybin::special_fn::{sph_harmonics_all, ShIndex};
use nalgebra::{DMatrix, DVector};

const T: usize = 7;
const NODES: usize = 64;

/// Real residuals: Re/Im parts of Σ_i Y_n^m(x_i), 1 <= n <= T, m >= 0.
fn residual(theta: &[f64], phi: &[f64]) -> DVector<f64> {
    let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); (T + 1) * (T + 1)];
    for (t, p) in theta.iter().zip(phi) {
        for (a, y) in acc.iter_mut().zip(sph_harmonics_all(T, *t, *p)) {
            *a += y;
        }
    }
    let mut r = Vec::new();
    for n in 1..=T {
        for m in 0..=n as isize {
            let v = acc[ShIndex::new(n, m).linear()];
            r.push(v.re);
            if m > 0 {
                r.push(v.im);
            }
        }
    }
    DVector::from_vec(r)
}

fn point_residual(t: f64, p: f64) -> DVector<f64> {
    residual(&[t], &[p])
}

fn main() {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut theta: Vec<f64> = (0..NODES).map(|i| (1.0 - (2 * i + 1) as f64 / NODES as f64).acos()).collect();
    let mut phi: Vec<f64> = (0..NODES).map(|i| (i as f64 * golden).rem_euclid(2.0 * PI)).collect();

    let h = 1e-6;
    for iter in 0..200 {
        let r = residual(&theta, &phi);
        let rn = r.norm();
        eprintln!("iter {iter}: |r| = {rn:.3e}");
        if rn < 1e-14 {
            break;
        }
        let rows = r.len();
        let mut jac = DMatrix::zeros(rows, 2 * NODES);
        for i in 0..NODES {
            let dt = (point_residual(theta[i] + h, phi[i]) - point_residual(theta[i] - h, phi[i])) / (2.0 * h);
            let dp = (point_residual(theta[i], phi[i] + h) - point_residual(theta[i], phi[i] - h)) / (2.0 * h);
            jac.set_column(2 * i, &dt);
            jac.set_column(2 * i + 1, &dp);
        }
        let jjt = &jac * jac.transpose() + DMatrix::identity(rows, rows) * (1e-12 * rn);
        let w = jjt.cholesky().expect("normal matrix not positive definite").solve(&r);
        let step = jac.transpose() * w;
        for i in 0..NODES {
            theta[i] -= step[2 * i];
            phi[i] -= step[2 * i + 1];
        }
    }

    let pts: Vec<[f64; 3]> = theta
        .iter()
        .zip(&phi)
        .map(|(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
        .collect();
    let mut min_d = f64::INFINITY;
    for a in 0..NODES {
        for b in a + 1..NODES {
            let d = ((pts[a][0] - pts[b][0]).powi(2) + (pts[a][1] - pts[b][1]).powi(2) + (pts[a][2] - pts[b][2]).powi(2)).sqrt();
            min_d = min_d.min(d);
        }
    }
    eprintln!("final |r| = {:.3e}, min pairwise distance {min_d:.4}", residual(&theta, &phi).norm());

    println!("# Spherical 7-design, 64 nodes, unit sphere, one x y z triple per line.");
    println!("# Computed by examples/gen_tdesign.rs (minimum-norm Gauss-Newton from a 64-point");
    println!("# Fibonacci lattice on the degree 1..7 harmonic moment conditions).");
    println!("# format-version 1");
    for p in pts {
        println!("{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2]);
    }
}
