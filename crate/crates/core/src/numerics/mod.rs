//! Precision-critical primitives shared by all modules.
//!
//! Everything here is plain IEEE-754 binary64; `EPS` is the module constant
//! used wherever a word-length-dependent bound appears.

mod dd;
mod erf;
mod fft;
mod sum;
mod trig;

pub use dd::{dd_add_norm_sqr, CDd, Dd};
pub use erf::{erfc, erfc_inv};
pub use fft::{fft, fft_in_place, ifft};
pub use sum::ordered_sum;
pub use trig::{cos_pi_ratio, direct_dft_bin, sin_pi_ratio, trig_tables, TrigTables};

/// Relative machine precision of binary64, `2^-52`.
pub const EPS: f64 = 2.220446049250313e-16;

/// Mantissa length of binary64 including the implicit bit.
pub const MANTISSA_BITS: u32 = 53;

/// Smallest power of two that is >= `x` (x > 0).
pub fn next_pow2(x: f64) -> usize {
    assert!(x > 0.0 && x.is_finite());
    let mut p = 1usize;
    while (p as f64) < x {
        p <<= 1;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_is_two_to_minus_52() {
        assert_eq!(EPS, (2.0f64).powi(-52));
        assert_eq!(EPS, f64::EPSILON);
    }

    #[test]
    fn next_pow2_rounds_up() {
        assert_eq!(next_pow2(1.0), 1);
        assert_eq!(next_pow2(63.9), 64);
        assert_eq!(next_pow2(64.0), 64);
        assert_eq!(next_pow2(64.1), 128);
    }
}
