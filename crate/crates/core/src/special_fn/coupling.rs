//! Wigner 3j symbols and Gaunt coefficients.
//!
//! 3j symbols are produced for a whole range of the third angular momentum at
//! once with the three-term recursion of Schulten and Gordon, run from both
//! ends of the range and matched in the middle. This stays accurate at orders
//! where the alternating factorial sum loses all significant digits.

use std::f64::consts::PI;
use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            t.push(t[k - 1] + (k as f64).ln());
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    let t = ln_fact_table();
    if n < t.len() {
        t[n]
    } else {
        t[t.len() - 1] + ((t.len())..=n).map(|k| (k as f64).ln()).sum::<f64>()
    }
}

#[inline]
fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(j1 j2 j; 0 0 0)` for all `j` in `|j1-j2|..=j1+j2`.
fn wigner3j_zero_m(j1: i64, j2: i64) -> (i64, Vec<f64>) {
    let jmin = (j1 - j2).abs();
    let jmax = j1 + j2;
    let mut out = Vec::with_capacity((jmax - jmin + 1) as usize);
    for j in jmin..=jmax {
        let big_j = j1 + j2 + j;
        if big_j % 2 != 0 {
            out.push(0.0);
            continue;
        }
        let g = big_j / 2;
        let ln_delta = ln_factorial((big_j - 2 * j1) as usize)
            + ln_factorial((big_j - 2 * j2) as usize)
            + ln_factorial((big_j - 2 * j) as usize)
            - ln_factorial((big_j + 1) as usize);
        let ln_v = 0.5 * ln_delta + ln_factorial(g as usize)
            - ln_factorial((g - j1) as usize)
            - ln_factorial((g - j2) as usize)
            - ln_factorial((g - j) as usize);
        out.push(parity_sign(g) * ln_v.exp());
    }
    (jmin, out)
}

/// Wigner 3j symbols `(j1 j2 j; m1 m2 -(m1+m2))` for every admissible `j`.
///
/// Returns `(jmin, values)` with `values[k]` the symbol at `j = jmin + k`. An
/// empty vector means no `j` is admissible (`|m1| > j1` or `|m2| > j2`).
pub fn wigner3j_range(j1: usize, j2: usize, m1: isize, m2: isize) -> (usize, Vec<f64>) {
    let (j1, j2, m1, m2) = (j1 as i64, j2 as i64, m1 as i64, m2 as i64);
    if m1.abs() > j1 || m2.abs() > j2 {
        return (0, Vec::new());
    }
    if m1 == 0 && m2 == 0 {
        let (jmin, v) = wigner3j_zero_m(j1, j2);
        return (jmin as usize, v);
    }
    let m3 = -m1 - m2;
    let jmin = (j1 - j2).abs().max(m3.abs());
    let jmax = j1 + j2;
    let n = (jmax - jmin + 1) as usize;
    let sign_top = parity_sign(j1 - j2 - m3);

    if n == 1 {
        return (jmin as usize, vec![sign_top / ((2 * jmin + 1) as f64).sqrt()]);
    }

    let c1 = (j1 * (j1 + 1) - j2 * (j2 + 1)) as f64;
    let a = |j: i64| -> f64 {
        let jf = j as f64;
        let t1 = jf * jf - ((j1 - j2) * (j1 - j2)) as f64;
        let t2 = ((j1 + j2 + 1) * (j1 + j2 + 1)) as f64 - jf * jf;
        let t3 = jf * jf - (m3 * m3) as f64;
        (t1 * t2 * t3).max(0.0).sqrt()
    };
    let b = |j: i64| -> f64 {
        let jf = j as f64;
        -(2.0 * jf + 1.0) * (m3 as f64 * c1 - jf * (jf + 1.0) * (m2 - m1) as f64)
    };

    const BIG: f64 = 1e150;

    // Upward from jmin while the magnitude keeps growing.
    let mut fwd = vec![0.0; n];
    fwd[0] = 1.0;
    fwd[1] = if jmin == 0 {
        m1 as f64 / ((j1 * (j1 + 1)) as f64).sqrt()
    } else {
        -b(jmin) / (jmin as f64 * a(jmin + 1))
    };
    let mut mid = n - 1;
    let mut k = 1;
    while k + 1 < n {
        if k >= 2 && fwd[k].abs() < fwd[k - 1].abs() {
            mid = k;
            break;
        }
        let j = jmin + k as i64;
        fwd[k + 1] = -(b(j) * fwd[k] + (j + 1) as f64 * a(j) * fwd[k - 1]) / (j as f64 * a(j + 1));
        if fwd[k + 1].abs() > BIG {
            for v in fwd[..=k + 1].iter_mut() {
                *v /= BIG;
            }
        }
        k += 1;
    }

    let mut vals = fwd;
    if mid < n - 1 {
        // Downward from jmax into the overlap around `mid`.
        let lo = mid - 1;
        let mut bwd = vec![0.0; n];
        bwd[n - 1] = 1.0;
        bwd[n - 2] = -b(jmax) / ((jmax + 1) as f64 * a(jmax));
        let mut k = n - 2;
        while k > lo {
            let j = jmin + k as i64;
            bwd[k - 1] = -(b(j) * bwd[k] + j as f64 * a(j + 1) * bwd[k + 1]) / ((j + 1) as f64 * a(j));
            if bwd[k - 1].abs() > BIG {
                for v in bwd[k - 1..].iter_mut() {
                    *v /= BIG;
                }
            }
            k -= 1;
        }
        // least-squares scale over the overlap points
        let (mut num, mut den) = (0.0, 0.0);
        for i in lo..=mid {
            num += vals[i] * bwd[i];
            den += bwd[i] * bwd[i];
        }
        let scale = num / den;
        for i in (mid + 1)..n {
            vals[i] = bwd[i] * scale;
        }
    }

    let norm: f64 = vals
        .iter()
        .enumerate()
        .map(|(i, v)| (2 * (jmin + i as i64) + 1) as f64 * v * v)
        .sum::<f64>()
        .sqrt();
    let s = (if vals[n - 1].signum() == sign_top { 1.0 } else { -1.0 }) / norm;
    for v in vals.iter_mut() {
        *v *= s;
    }
    (jmin as usize, vals)
}

/// Single 3j symbol `(j1 j2 j3; m1 m2 m3)`; zero when the selection rules fail.
pub fn wigner3j(j1: usize, j2: usize, j3: usize, m1: isize, m2: isize, m3: isize) -> f64 {
    if m1 + m2 + m3 != 0 {
        return 0.0;
    }
    let (jmin, v) = wigner3j_range(j1, j2, m1, m2);
    if j3 < jmin || j3 >= jmin + v.len() {
        return 0.0;
    }
    v[j3 - jmin]
}

/// Orders the arguments so that symmetric inputs produce bit-identical output.
/// The Gaunt integral is unchanged by swapping the two factors and by negating
/// both degrees.
fn canonical(n1: usize, m1: isize, n2: usize, m2: isize) -> (usize, isize, usize, isize) {
    let cands = [(n1, m1, n2, m2), (n2, m2, n1, m1), (n1, -m1, n2, -m2), (n2, -m2, n1, -m1)];
    *cands.iter().min().unwrap()
}

/// Gaunt coefficients `∫ Y_{n1}^{m1} Y_{n2}^{m2} (Y_l^{m1+m2})^* dΩ` for every `l`
/// from `lmin = max(|n1-n2|, |m1+m2|)` to `n1+n2`.
///
/// Entries for which `n1 + n2 + l` is odd are exactly zero.
pub fn gaunt_range(n1: usize, m1: isize, n2: usize, m2: isize) -> (usize, Vec<f64>) {
    let (n1, m1, n2, m2) = canonical(n1, m1, n2, m2);
    let (lmin_m, wm) = wigner3j_range(n1, n2, m1, m2);
    if wm.is_empty() {
        return (0, Vec::new());
    }
    let (lmin_0, w0) = wigner3j_range(n1, n2, 0, 0);
    let big_m = m1 + m2;
    let sign = if big_m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let pre = ((2 * n1 + 1) as f64 * (2 * n2 + 1) as f64 / (4.0 * PI)).sqrt();
    let out = wm
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let l = lmin_m + i;
            if (n1 + n2 + l) % 2 == 1 {
                return 0.0;
            }
            sign * pre * ((2 * l + 1) as f64).sqrt() * w0[l - lmin_0] * v
        })
        .collect();
    (lmin_m, out)
}

/// Single Gaunt coefficient; see [`gaunt_range`].
pub fn gaunt(n1: usize, m1: isize, n2: usize, m2: isize, l: usize) -> f64 {
    let (lmin, v) = gaunt_range(n1, m1, n2, m2);
    if l < lmin || l >= lmin + v.len() {
        return 0.0;
    }
    v[l - lmin]
}
