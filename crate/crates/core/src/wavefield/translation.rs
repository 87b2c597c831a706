use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use super::ShCoeffVec;
use crate::special_fn::{cart_to_sph, gaunt_range, sh_count, sph_bessel_j_array, sph_harmonics_all, ShIndex};

/// Dense operator re-expanding coefficients about a center displaced by `displacement`.
///
/// Entry `((n',m'), (n,m))` is
/// `4π (-1)^m Σ_l i^{n'-n+l} j_l(k|d|) Y_l^{m'-m}(d̂)^* G(n,m; n',-m'; l)`
/// with `G` the Gaunt coefficient, so that `α(c + d) = T(d) α(c)`.
#[derive(Debug, Clone)]
pub struct TranslationMatrix {
    pub entries: DMatrix<Complex64>,
    pub displacement: Vector3<f64>,
    pub k: f64,
}

impl TranslationMatrix {
    pub fn n_out(&self) -> usize {
        (self.entries.nrows() as f64).sqrt() as usize - 1
    }

    pub fn n_in(&self) -> usize {
        (self.entries.ncols() as f64).sqrt() as usize - 1
    }
}

/// Input-order buffer for translating over `distance`: `max(10, ⌈e k d / 2⌉)`.
pub fn default_buffer(k: f64, distance: f64) -> usize {
    ((E * k * distance / 2.0).ceil() as usize).max(10)
}

/// Single entry; `jl` and `yl` hold `j_l(k|d|)` and `Y_l^μ(d̂)` up to `n + n'`.
fn entry(row: ShIndex, col: ShIndex, jl: &[f64], yl: &[Complex64]) -> Complex64 {
    let (np, mp) = (row.n, row.m);
    let (n, m) = (col.n, col.m);
    let mu = mp - m;
    let (lmin, g) = gaunt_range(n, m, np, -mp);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &gv) in g.iter().enumerate() {
        let l = lmin + i;
        if (n + np + l) % 2 == 1 || gv == 0.0 {
            continue;
        }
        // n' - n + l is even here, so i^{n'-n+l} is real
        let e = (np as i64 - n as i64 + l as i64) / 2;
        let sign = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let y = yl[ShIndex::new(l, mu).linear()].conj();
        acc += y * (sign * jl[l] * gv);
    }
    let sm = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    acc * (4.0 * PI * sm)
}

/// Rectangular translation operator `(n_out+1)² × (n_in+1)²`.
pub fn translation_matrix(d: &Vector3<f64>, k: f64, n_out: usize, n_in: usize) -> TranslationMatrix {
    let rows = sh_count(n_out);
    let cols = sh_count(n_in);
    let (dist, theta, phi) = cart_to_sph(d);
    if dist == 0.0 {
        let entries = DMatrix::from_fn(rows, cols, |r, c| if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        return TranslationMatrix { entries, displacement: *d, k };
    }
    let l_max = n_out + n_in;
    let jl = sph_bessel_j_array(l_max, k * dist);
    let yl = sph_harmonics_all(l_max, theta, phi);
    let data: Vec<Vec<Complex64>> = (0..rows)
        .into_par_iter()
        .map(|r| {
            let row = ShIndex::from_linear(r);
            (0..cols).map(|c| entry(row, ShIndex::from_linear(c), &jl, &yl)).collect()
        })
        .collect();
    let entries = DMatrix::from_fn(rows, cols, |r, c| data[r][c]);
    TranslationMatrix { entries, displacement: *d, k }
}

/// Re-expands `alpha` about `new_center` at the same order.
///
/// Accuracy is limited by the truncation of `alpha` itself; callers needing
/// order `N` after a move should supply `alpha` at order `N + default_buffer`.
pub fn translate_coeffs(alpha: &ShCoeffVec, new_center: &Vector3<f64>) -> ShCoeffVec {
    translate_coeffs_to(alpha, new_center, alpha.order())
}

/// Re-expands `alpha` about `new_center`, producing order `out_order`.
pub fn translate_coeffs_to(alpha: &ShCoeffVec, new_center: &Vector3<f64>, out_order: usize) -> ShCoeffVec {
    let d = new_center - alpha.center;
    if d.norm() == 0.0 {
        return alpha.with_order(out_order);
    }
    let t = translation_matrix(&d, alpha.k, out_order, alpha.order());
    ShCoeffVec { coeffs: &t.entries * &alpha.coeffs, center: *new_center, k: alpha.k, order: out_order }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::{evaluate_field, green, point_source_coeffs};

    #[test]
    fn zero_displacement_is_identity() {
        let t = translation_matrix(&Vector3::zeros(), 5.0, 3, 6);
        assert_eq!(t.entries.nrows(), 16);
        assert_eq!(t.entries.ncols(), 49);
        for r in 0..16 {
            for c in 0..49 {
                let e = if r == c { 1.0 } else { 0.0 };
                assert_eq!(t.entries[(r, c)], Complex64::new(e, 0.0));
            }
        }
    }

    #[test]
    fn tiny_displacement_close_to_identity() {
        let t = translation_matrix(&Vector3::new(1e-9, 2e-9, 0.0), 5.0, 4, 4);
        for r in 0..25 {
            for c in 0..25 {
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((t.entries[(r, c)] - e).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn adjoint_relation() {
        let d = Vector3::new(0.07, -0.11, 0.05);
        let k = 25.0;
        let n = 8;
        let tp = translation_matrix(&d, k, n, n);
        let tm = translation_matrix(&(-d), k, n, n);
        for r in 0..tp.entries.nrows() {
            for c in 0..tp.entries.ncols() {
                assert!((tm.entries[(r, c)] - tp.entries[(c, r)].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn translated_point_source_matches_field() {
        let k = 2.0 * PI * 2000.0 / 346.2;
        let src = Vector3::new(1.2, -0.4, 0.3);
        let n_out = 12;
        let d = Vector3::new(0.12, 0.08, -0.1);
        let n_in = n_out + default_buffer(k, d.norm());
        let a = point_source_coeffs(&src, &Vector3::zeros(), k, n_in).unwrap();
        let b = translate_coeffs_to(&a, &d, n_out);
        assert_eq!(b.center, d);
        let g = green(&d, &src, k);
        assert!((b.pressure() - g).norm() / g.norm() < 1e-4);
        let probe = d + Vector3::new(0.02, -0.03, 0.01);
        let gp = green(&probe, &src, k);
        assert!((evaluate_field(&b, &probe) - gp).norm() / gp.norm() < 1e-4);
    }

    #[test]
    fn group_property_improves_with_buffer() {
        let k = 2.0 * PI * 1500.0 / 346.2;
        let n = 8;
        let d1 = Vector3::new(0.1, 0.0, 0.05);
        let d2 = Vector3::new(-0.03, 0.12, 0.0);
        let errs: Vec<f64> = [2usize, 5, 10]
            .iter()
            .map(|&buf| {
                let t1 = translation_matrix(&d1, k, n + buf, n + 2 * buf);
                let t2 = translation_matrix(&d2, k, n, n + buf);
                let t12 = translation_matrix(&(d1 + d2), k, n, n + 2 * buf);
                let prod = &t2.entries * &t1.entries;
                (prod - &t12.entries).norm() / t12.entries.norm()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-3);
    }
}
