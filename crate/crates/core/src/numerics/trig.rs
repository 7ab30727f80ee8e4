//! Exact-argument trigonometry: arguments that are rational multiples of pi
//! are reduced on integers before the single multiplication by pi, so the
//! sine is always evaluated on |arg| <= pi/2 where it carries the smallest
//! possible relative error.

use super::ordered_sum;
use num_complex::Complex64;

/// `sin(pi * num / den)` with exact integer argument reduction.
pub fn sin_pi_ratio(num: i64, den: i64) -> f64 {
    debug_assert!(den >= 1);
    // reduce num modulo 2*den into (-den, den]
    let two_den = 2 * den;
    let mut r = num.rem_euclid(two_den);
    if r > den {
        r -= two_den;
    }
    // fold onto |r| <= den/2 using sin(pi - x) = sin(x)
    if 2 * r > den {
        r = den - r;
    } else if 2 * r < -den {
        r = -den - r;
    }
    (std::f64::consts::PI * r as f64 / den as f64).sin()
}

/// `cos(pi * num / den)` via `cos(x) = sin(pi/2 - x)` on integers.
pub fn cos_pi_ratio(num: i64, den: i64) -> f64 {
    sin_pi_ratio(den - 2 * num, 2 * den)
}

/// Sine and cosine tables on the grid `pi * k / F`, `k = 0 .. F-1`.
#[derive(Debug, Clone)]
pub struct TrigTables {
    pub sin: Vec<f64>,
    pub cos: Vec<f64>,
}

pub fn trig_tables(f_len: usize) -> TrigTables {
    assert!(f_len >= 1);
    let den = f_len as i64;
    let sin = (0..den).map(|k| sin_pi_ratio(k, den)).collect();
    let cos = (0..den).map(|k| cos_pi_ratio(k, den)).collect();
    TrigTables { sin, cos }
}

/// One DFT bin `sum_k x(k) exp(-j 2 pi mu k / M)` evaluated directly with
/// integer-reduced twiddle arguments and ordered summation of the real and
/// imaginary parts. This is the reference path for checking spectral zeros
/// down at the eps floor; it is O(len) trig plus two ordered sums.
pub fn direct_dft_bin(x: &[f64], mu: usize, m: usize) -> Complex64 {
    assert!(m >= 1 && mu < m);
    let m_i = m as i64;
    let mu_i = mu as i64;
    let mut re = Vec::with_capacity(x.len());
    let mut im = Vec::with_capacity(x.len());
    for (k, &v) in x.iter().enumerate() {
        let r = (mu_i * k as i64).rem_euclid(m_i);
        // exp(-j 2 pi r / M) = cos(2 pi r / M) - j sin(2 pi r / M)
        re.push(v * cos_pi_ratio(2 * r, m_i));
        im.push(-v * sin_pi_ratio(2 * r, m_i));
    }
    Complex64::new(ordered_sum(&re), ordered_sum(&im))
}
