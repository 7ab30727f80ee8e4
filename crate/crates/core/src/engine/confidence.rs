//! Confidence intervals for the real estimates and confidence ellipses for
//! the complex ones, under the large-L normal approximation. Radicands are
//! clamped to zero: word-length errors can push them marginally negative.

use crate::error::{Error, Result};
use crate::numerics::erfc_inv;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfidenceRegion {
    /// center +/- half_width on the real axis
    Interval { half_width: f64 },
    /// center + a1 cos(t) + a2 sin(t); a2 is orthogonal to a1
    Ellipse { a1: Complex64, a2: Complex64 },
}

pub(super) fn check_alpha(alpha: f64) -> Result<()> {
    if !(1e-4..0.9).contains(&alpha) {
        return Err(Error::invalid(format!(
            "miss probability alpha must lie in (1e-4, 0.9), got {alpha}"
        )));
    }
    Ok(())
}

/// Interval half width for a real estimate of estimated variance `var`.
pub(super) fn interval_half_width(var: f64, alpha: f64) -> Result<f64> {
    let sigma = var.max(0.0).sqrt();
    Ok(std::f64::consts::SQRT_2 * sigma * erfc_inv(alpha)?)
}

/// Ellipse half-axes for a complex estimate from its variance and
/// complementary covariance; `cov = None` (or negligible) degenerates to a
/// circle of radius sqrt(-ln(alpha) var).
pub(super) fn ellipse(var: f64, cov: Option<Complex64>, alpha: f64) -> ConfidenceRegion {
    let neg_ln = -alpha.ln();
    match cov {
        Some(c) if c.norm() > 0.0 => {
            let half_angle = 0.5 * c.arg();
            let a1m = (neg_ln * (var + c.norm()).max(0.0)).sqrt();
            let a2m = (neg_ln * (var - c.norm()).max(0.0)).sqrt();
            let dir = Complex64::from_polar(1.0, half_angle);
            ConfidenceRegion::Ellipse {
                a1: a1m * dir,
                a2: Complex64::i() * a2m * dir,
            }
        }
        _ => {
            let r = (neg_ln * var.max(0.0)).sqrt();
            ConfidenceRegion::Ellipse {
                a1: Complex64::new(r, 0.0),
                a2: Complex64::new(0.0, r),
            }
        }
    }
}

impl ConfidenceRegion {
    /// Does the region, centered at `center`, cover `truth`?
    pub fn covers(&self, center: Complex64, truth: Complex64) -> bool {
        match *self {
            ConfidenceRegion::Interval { half_width } => (truth.re - center.re).abs() <= half_width,
            ConfidenceRegion::Ellipse { a1, a2 } => {
                let d = truth - center;
                let (r1, r2) = (a1.norm(), a2.norm());
                if r1 == 0.0 {
                    return d.norm() == 0.0;
                }
                // coordinates along the (orthogonal) half-axes
                let u = a1 / r1;
                let x = (d * u.conj()).re / r1;
                let y = if r2 == 0.0 {
                    let t = (d * u.conj()).im;
                    return x.abs() <= 1.0 && t.abs() <= 1e-12;
                } else {
                    (d * u.conj()).im / r2
                };
                x * x + y * y <= 1.0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_is_one_at_alpha_exp_minus_half() {
        // alpha = e^{-1/2}: circle radius sqrt(-ln alpha * var) = sqrt(var/2),
        // i.e. R = 1 in units of the mapped unit-variance coordinates
        let alpha = (-0.5f64).exp();
        let reg = ellipse(2.0, None, alpha);
        match reg {
            ConfidenceRegion::Ellipse { a1, a2 } => {
                assert!((a1.norm() - 1.0).abs() < 1e-14);
                assert!((a2.norm() - 1.0).abs() < 1e-14);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn degenerate_segment_when_cov_magnitude_equals_var() {
        let reg = ellipse(1.0, Some(Complex64::new(1.0, 0.0)), 0.1);
        match reg {
            ConfidenceRegion::Ellipse { a1, a2 } => {
                assert!(a2.norm() == 0.0);
                assert!(a1.norm() > 0.0);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn circle_when_cov_zero() {
        let reg = ellipse(4.0, Some(Complex64::new(0.0, 0.0)), 0.1);
        match reg {
            ConfidenceRegion::Ellipse { a1, a2 } => {
                let want = (-(0.1f64).ln() * 4.0).sqrt();
                assert!((a1.norm() - want).abs() < 1e-12);
                assert!((a2.norm() - want).abs() < 1e-12);
                assert!((a1 * a2.conj()).re.abs() < 1e-12); // orthogonal
            }
            _ => panic!(),
        }
    }

    #[test]
    fn covers_basic() {
        let reg = ellipse(1.0, None, 0.1);
        assert!(reg.covers(Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0)));
        assert!(!reg.covers(Complex64::new(0.0, 0.0), Complex64::new(10.0, 0.0)));
        let iv = ConfidenceRegion::Interval { half_width: 0.5 };
        assert!(iv.covers(Complex64::new(1.0, 0.0), Complex64::new(1.4, 0.0)));
        assert!(!iv.covers(Complex64::new(1.0, 0.0), Complex64::new(1.6, 0.0)));
    }
}
