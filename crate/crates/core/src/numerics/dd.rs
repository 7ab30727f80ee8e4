//! Double-double (compensated) arithmetic for the covariance accumulators.
//!
//! The closing quadratic forms of the PSD estimators subtract two nearly
//! equal O(M) quantities; with plain binary64 sums the difference floor is
//! ~eps*M, which buries the eps^2-level residuals of a noiseless campaign.
//! Carrying the sums as unevaluated (hi, lo) pairs keeps the subtraction
//! faithful down to that floor.

// value-returning add/mul/div methods, not operator overloads: every call
// site here threads both components explicitly
#![allow(clippy::should_implement_trait)]

use num_complex::Complex64;

/// Unevaluated sum of two binary64 values, |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let s2 = s2 + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, x);
        let s2 = s2 + self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, x);
        let p2 = p2 + self.lo * x;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }

    /// Exact product of two binary64 values as a Dd.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }
}

/// Complex number with double-double real and imaginary parts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ZERO: CDd = CDd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    #[inline]
    pub fn from_c64(z: Complex64) -> CDd {
        CDd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    #[inline]
    pub fn add(self, other: CDd) -> CDd {
        CDd {
            re: self.re.add(other.re),
            im: self.im.add(other.im),
        }
    }

    #[inline]
    pub fn sub(self, other: CDd) -> CDd {
        CDd {
            re: self.re.sub(other.re),
            im: self.im.sub(other.im),
        }
    }

    #[inline]
    pub fn conj(self) -> CDd {
        CDd {
            re: self.re,
            im: self.im.neg(),
        }
    }

    #[inline]
    pub fn mul(self, other: CDd) -> CDd {
        CDd {
            re: self.re.mul(other.re).sub(self.im.mul(other.im)),
            im: self.re.mul(other.im).add(self.im.mul(other.re)),
        }
    }

    #[inline]
    pub fn mul_dd(self, x: Dd) -> CDd {
        CDd {
            re: self.re.mul(x),
            im: self.im.mul(x),
        }
    }

    #[inline]
    pub fn norm_sqr(self) -> Dd {
        self.re.mul(self.re).add(self.im.mul(self.im))
    }

    /// self / other for complex Dd.
    #[inline]
    pub fn div(self, other: CDd) -> CDd {
        let den = other.norm_sqr();
        let num = self.mul(other.conj());
        CDd {
            re: num.re.div(den),
            im: num.im.div(den),
        }
    }

    /// Accumulate `a * conj(b)` with exact products.
    #[inline]
    pub fn add_prod_conj(self, a: Complex64, b: Complex64) -> CDd {
        // (ar + j ai)(br - j bi) = (ar br + ai bi) + j (ai br - ar bi)
        let re = Dd::prod(a.re, b.re).add(Dd::prod(a.im, b.im));
        let im = Dd::prod(a.im, b.re).sub(Dd::prod(a.re, b.im));
        self.add(CDd { re, im })
    }

    /// Accumulate the plain product `a * b` with exact products.
    #[inline]
    pub fn add_prod(self, a: Complex64, b: Complex64) -> CDd {
        let re = Dd::prod(a.re, b.re).sub(Dd::prod(a.im, b.im));
        let im = Dd::prod(a.re, b.im).add(Dd::prod(a.im, b.re));
        self.add(CDd { re, im })
    }
}

/// Accumulate `|a|^2` with exact products.
#[inline]
pub fn dd_add_norm_sqr(acc: Dd, a: Complex64) -> Dd {
    acc.add(Dd::prod(a.re, a.re)).add(Dd::prod(a.im, a.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_recovers_cancelled_bits() {
        let a = Dd::from_f64(1e16).add_f64(1.0).add_f64(-1e16);
        assert_eq!(a.value(), 1.0);
    }

    #[test]
    fn dd_mul_div_roundtrip() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = Dd::from_f64(std::f64::consts::E);
        let c = a.mul(b).div(b);
        assert!((c.value() - std::f64::consts::PI).abs() < 1e-30);
    }

    #[test]
    fn cdd_product_matches_complex() {
        let a = Complex64::new(1.25, -0.5);
        let b = Complex64::new(-2.0, 3.5);
        let z = CDd::ZERO.add_prod_conj(a, b).value();
        assert_eq!(z, a * b.conj());
        let z = CDd::ZERO.add_prod(a, b).value();
        assert_eq!(z, a * b);
    }
}
