//! Complementary error function and its inverse. The forward direction is
//! libm's erfc; the inverse starts from a rational normal-quantile
//! approximation and polishes with Newton steps on erfc itself.

use crate::error::{Error, Result};

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Acklam's rational approximation of the standard normal quantile,
/// relative error below 1.2e-9 on (0, 1); polished afterwards.
fn normal_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile_approx(1.0 - p)
    }
}

/// Inverse of erfc on (0, 2): returns x with `erfc(x) = y`.
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::invalid(format!(
            "erfc_inv argument must lie in (0, 2), got {y}"
        )));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    // erfc(x) = 2 Phi(-x sqrt(2))  =>  x = -quantile(y/2) / sqrt(2)
    let mut x = -normal_quantile_approx(0.5 * y) / std::f64::consts::SQRT_2;
    // Newton: f(x) = erfc(x) - y, f'(x) = -2/sqrt(pi) exp(-x^2)
    for _ in 0..3 {
        let e = libm::erfc(x) - y;
        let d = -2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp();
        if d == 0.0 {
            break; // |x| beyond ~27: guess already at limiting precision
        }
        let step = e / d;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1e-300) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_point() {
        assert_eq!(erfc_inv(1.0).unwrap(), 0.0);
    }

    #[test]
    fn roundtrip_at_one_over_sqrt2() {
        let y = erfc(std::f64::consts::FRAC_1_SQRT_2);
        let x = erfc_inv(y).unwrap();
        assert!((x - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn known_value() {
        // bisection oracle on erfc
        let (mut lo, mut hi) = (0.0f64, 6.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if erfc(mid) > 0.1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let want = 0.5 * (lo + hi); // 1.1630871...
        assert!((want - 1.1630871).abs() < 1e-6);
        let got = erfc_inv(0.1).unwrap();
        assert!((got - want).abs() < 1e-8, "got {got}, want {want}");
    }

    #[test]
    fn dense_roundtrip_relative_error() {
        for i in 1..2000 {
            let y = i as f64 * 1e-3; // (0, 2)
            let x = erfc_inv(y).unwrap();
            let back = erfc(x);
            assert!(
                (back - y).abs() <= 1e-10 * y,
                "y={y}: erfc(erfc_inv(y))={back}"
            );
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(erfc_inv(0.0).is_err());
        assert!(erfc_inv(2.0).is_err());
        assert!(erfc_inv(-0.5).is_err());
    }
}
