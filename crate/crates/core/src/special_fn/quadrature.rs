use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_deriv(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_and_deriv(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Product quadrature on the sphere exact for polynomials up to degree `2 * n_theta - 1`:
/// `n_theta` Gauss-Legendre zeniths times `n_phi` equispaced azimuths.
/// Returns `(theta, phi, weight)` triples whose weights sum to `4π`.
pub fn sphere_gauss_grid(n_theta: usize, n_phi: usize) -> Vec<(f64, f64, f64)> {
    let (nodes, weights) = gauss_legendre(n_theta);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for (x, w) in nodes.iter().zip(weights.iter()) {
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            out.push((x.acos(), phi, w * 2.0 * PI / n_phi as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^12 = 2/13
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn high_order_weights() {
        let (_, w) = gauss_legendre(120);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
        assert!(w.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn sphere_grid_area() {
        let g = sphere_gauss_grid(10, 20);
        let a: f64 = g.iter().map(|t| t.2).sum();
        assert!((a - 4.0 * PI).abs() < 1e-12);
    }
}
