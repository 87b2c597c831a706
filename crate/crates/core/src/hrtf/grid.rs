//! Direction grids, as `(zenith, azimuth)` pairs in radians.

use crate::special_fn::sphere_gauss_grid;

/// Gauss-Legendre zeniths times equispaced azimuths; covers the full sphere.
pub fn gauss_grid(n_theta: usize, n_phi: usize) -> Vec<(f64, f64)> {
    sphere_gauss_grid(n_theta, n_phi).into_iter().map(|(t, p, _)| (t, p)).collect()
}

/// Smallest Gauss grid that determines an order-`order` fit:
/// `order + 1` zeniths and `2 order + 2` azimuths.
pub fn gauss_grid_for_order(order: usize) -> Vec<(f64, f64)> {
    gauss_grid(order + 1, 2 * order + 2)
}

/// 5° measurement grid: azimuths 0°..355°, zeniths 10°..160°, 2232 points.
/// The cap below 160° is not sampled.
pub fn measurement_grid_5deg() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(31 * 72);
    for zi in 0..31 {
        let t = (10.0 + 5.0 * zi as f64).to_radians();
        for ai in 0..72 {
            out.push((t, (5.0 * ai as f64).to_radians()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(measurement_grid_5deg().len(), 2232);
        assert_eq!(gauss_grid_for_order(35).len(), 36 * 72);
    }
}
