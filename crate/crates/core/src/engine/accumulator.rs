//! Streaming accumulation of the per-bin empirical (co)variances over the
//! sub-measurement stream. Sums are carried as double-double pairs so that
//! the closing quadratic forms of the estimators keep their accuracy down
//! to the machine-noise floor of a noiseless campaign.
//!
//! Besides the six product sums of the estimators, the accumulator carries
//! cross sums against two deterministic unit-magnitude phase vectors that
//! are derived from the seed and independent of the measurement; they
//! stand in for an excitation row when the empirical 2x2 covariance turns
//! singular.

use super::SystemMode;
use crate::error::{Error, Result};
use crate::numerics::{dd_add_norm_sqr, CDd, Dd};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct MeasurementAccumulator {
    m: usize,
    mode: SystemMode,
    aux_seed: u64,
    start_index: u32,
    l: u32,
    // per-bin sums over lambda (not yet divided by L)
    pub(super) s_vv: Vec<Dd>,     // sum |V(mu)|^2
    pub(super) s_vv_nc: Vec<CDd>, // sum V(mu) V(-mu)
    pub(super) s_yv: Vec<CDd>,    // sum Y(mu) conj(V(mu))
    pub(super) s_yv_nc: Vec<CDd>, // sum Y(mu) V(-mu)
    pub(super) s_yy: Vec<Dd>,     // sum |Y(mu)|^2
    pub(super) s_yy_nc: Vec<CDd>, // sum Y(mu) Y(-mu)
    // fallback streams
    pub(super) s_vw: [Vec<CDd>; 2],    // sum V(mu) conj(w_i)
    pub(super) s_vw_nc: [Vec<CDd>; 2], // sum V(mu) w_i
    pub(super) s_yw: [Vec<CDd>; 2],    // sum Y(mu) conj(w_i)
    pub(super) s_wy_nc: [Vec<CDd>; 2], // sum w_i Y(mu)
    pub(super) s_ww: [Dd; 2],          // sum |w_i|^2
    pub(super) s_w1w2: CDd,            // sum w_1 conj(w_2)
}

pub(super) fn aux_phasor(aux_seed: u64, which: usize, lambda: u32) -> Complex64 {
    let mut rng = ChaCha12Rng::seed_from_u64(aux_seed ^ (0x57AB_1E00 + which as u64));
    rng.set_stream(lambda as u64);
    let theta: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    Complex64::from_polar(1.0, theta)
}

impl MeasurementAccumulator {
    pub fn new(m: usize, mode: SystemMode, aux_seed: u64) -> Self {
        Self::with_start_index(m, mode, aux_seed, 0)
    }

    /// Accumulator for a worker that will see the sub-measurement stream
    /// starting at global index `start_index`; merging partials built this
    /// way reproduces the sequential result.
    pub fn with_start_index(m: usize, mode: SystemMode, aux_seed: u64, start_index: u32) -> Self {
        MeasurementAccumulator {
            m,
            mode,
            aux_seed,
            start_index,
            l: 0,
            s_vv: vec![Dd::ZERO; m],
            s_vv_nc: vec![CDd::ZERO; m],
            s_yv: vec![CDd::ZERO; m],
            s_yv_nc: vec![CDd::ZERO; m],
            s_yy: vec![Dd::ZERO; m],
            s_yy_nc: vec![CDd::ZERO; m],
            s_vw: [vec![CDd::ZERO; m], vec![CDd::ZERO; m]],
            s_vw_nc: [vec![CDd::ZERO; m], vec![CDd::ZERO; m]],
            s_yw: [vec![CDd::ZERO; m], vec![CDd::ZERO; m]],
            s_wy_nc: [vec![CDd::ZERO; m], vec![CDd::ZERO; m]],
            s_ww: [Dd::ZERO; 2],
            s_w1w2: CDd::ZERO,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn mode(&self) -> SystemMode {
        self.mode
    }

    /// Fold one sub-measurement into the running sums.
    pub fn accumulate(&mut self, v: &[Complex64], y: &[Complex64]) -> Result<()> {
        let m = self.m;
        if v.len() != m {
            return Err(Error::LengthMismatch {
                what: "excitation spectrum",
                expected: m,
                got: v.len(),
            });
        }
        if y.len() != m {
            return Err(Error::LengthMismatch {
                what: "output spectrum",
                expected: m,
                got: y.len(),
            });
        }
        if self.mode == SystemMode::Real {
            // real-mode estimators rely on conjugate-symmetric spectra
            let vmax = v.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            for mu in 1..m {
                if (v[mu] - v[m - mu].conj()).norm() > 1e-9 * vmax.max(1e-300) {
                    return Err(Error::invalid(
                        "real mode requires conjugate-symmetric excitation spectra",
                    ));
                }
            }
        }
        let lambda = self.start_index + self.l;
        let w = [
            aux_phasor(self.aux_seed, 0, lambda),
            aux_phasor(self.aux_seed, 1, lambda),
        ];
        for mu in 0..m {
            let neg = (m - mu) % m;
            self.s_vv[mu] = dd_add_norm_sqr(self.s_vv[mu], v[mu]);
            self.s_vv_nc[mu] = self.s_vv_nc[mu].add_prod(v[mu], v[neg]);
            self.s_yv[mu] = self.s_yv[mu].add_prod_conj(y[mu], v[mu]);
            self.s_yv_nc[mu] = self.s_yv_nc[mu].add_prod(y[mu], v[neg]);
            self.s_yy[mu] = dd_add_norm_sqr(self.s_yy[mu], y[mu]);
            self.s_yy_nc[mu] = self.s_yy_nc[mu].add_prod(y[mu], y[neg]);
            for i in 0..2 {
                self.s_vw[i][mu] = self.s_vw[i][mu].add_prod_conj(v[mu], w[i]);
                self.s_vw_nc[i][mu] = self.s_vw_nc[i][mu].add_prod(v[mu], w[i]);
                self.s_yw[i][mu] = self.s_yw[i][mu].add_prod_conj(y[mu], w[i]);
                self.s_wy_nc[i][mu] = self.s_wy_nc[i][mu].add_prod(w[i], y[mu]);
            }
        }
        for i in 0..2 {
            self.s_ww[i] = dd_add_norm_sqr(self.s_ww[i], w[i]);
        }
        self.s_w1w2 = self.s_w1w2.add_prod_conj(w[0], w[1]);
        self.l += 1;
        Ok(())
    }

    /// Merge a partial built for the directly following index range.
    pub fn merge(&mut self, other: &MeasurementAccumulator) -> Result<()> {
        if other.m != self.m || other.mode != self.mode || other.aux_seed != self.aux_seed {
            return Err(Error::invalid(
                "accumulators come from different configurations",
            ));
        }
        if other.start_index != self.start_index + self.l {
            return Err(Error::invalid(
                "merge requires contiguous sub-measurement index ranges",
            ));
        }
        for mu in 0..self.m {
            self.s_vv[mu] = self.s_vv[mu].add(other.s_vv[mu]);
            self.s_vv_nc[mu] = self.s_vv_nc[mu].add(other.s_vv_nc[mu]);
            self.s_yv[mu] = self.s_yv[mu].add(other.s_yv[mu]);
            self.s_yv_nc[mu] = self.s_yv_nc[mu].add(other.s_yv_nc[mu]);
            self.s_yy[mu] = self.s_yy[mu].add(other.s_yy[mu]);
            self.s_yy_nc[mu] = self.s_yy_nc[mu].add(other.s_yy_nc[mu]);
            for i in 0..2 {
                self.s_vw[i][mu] = self.s_vw[i][mu].add(other.s_vw[i][mu]);
                self.s_vw_nc[i][mu] = self.s_vw_nc[i][mu].add(other.s_vw_nc[i][mu]);
                self.s_yw[i][mu] = self.s_yw[i][mu].add(other.s_yw[i][mu]);
                self.s_wy_nc[i][mu] = self.s_wy_nc[i][mu].add(other.s_wy_nc[i][mu]);
            }
        }
        for i in 0..2 {
            self.s_ww[i] = self.s_ww[i].add(other.s_ww[i]);
        }
        self.s_w1w2 = self.s_w1w2.add(other.s_w1w2);
        self.l += other.l;
        Ok(())
    }

    /// Empirical covariance `C_{V(mu),V(mu)}` (the sums divided by L).
    pub fn c_vv(&self, mu: usize) -> f64 {
        self.s_vv[mu].value() / self.l as f64
    }

    /// Empirical cross covariance `C_{Y(mu),V(mu)}`.
    pub fn c_yv(&self, mu: usize) -> Complex64 {
        self.s_yv[mu].value() / self.l as f64
    }

    /// Raw sums for audits of the off-grid approximations.
    pub fn raw_sums(&self, mu: usize) -> (f64, Complex64, Complex64, Complex64, f64, Complex64) {
        (
            self.s_vv[mu].value(),
            self.s_vv_nc[mu].value(),
            self.s_yv[mu].value(),
            self.s_yv_nc[mu].value(),
            self.s_yy[mu].value(),
            self.s_yy_nc[mu].value(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_spectra(m: usize, l: usize, seed: u64) -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..l)
            .map(|_| {
                let v: Vec<Complex64> = (0..m)
                    .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect();
                let y: Vec<Complex64> = (0..m)
                    .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect();
                (v, y)
            })
            .collect()
    }

    #[test]
    fn single_step_definition() {
        let data = random_spectra(4, 1, 1);
        let mut acc = MeasurementAccumulator::new(4, SystemMode::Complex, 0);
        acc.accumulate(&data[0].0, &data[0].1).unwrap();
        for mu in 0..4 {
            assert!((acc.c_vv(mu) - data[0].0[mu].norm_sqr()).abs() < 1e-15);
        }
    }

    #[test]
    fn batch_oracle_l8() {
        let m = 4;
        let data = random_spectra(m, 8, 2);
        let mut acc = MeasurementAccumulator::new(m, SystemMode::Complex, 0);
        for (v, y) in &data {
            acc.accumulate(v, y).unwrap();
        }
        for mu in 0..m {
            let neg = (m - mu) % m;
            let want_vv: f64 = data.iter().map(|(v, _)| v[mu].norm_sqr()).sum::<f64>() / 8.0;
            assert!((acc.c_vv(mu) - want_vv).abs() <= 4.0 * f64::EPSILON * want_vv);
            let want_yv: Complex64 = data
                .iter()
                .map(|(v, y)| y[mu] * v[mu].conj())
                .sum::<Complex64>()
                / 8.0;
            assert!((acc.c_yv(mu) - want_yv).norm() <= 4.0 * f64::EPSILON * want_yv.norm());
            let want_yy_nc: Complex64 = data.iter().map(|(_, y)| y[mu] * y[neg]).sum::<Complex64>();
            assert!(
                (acc.raw_sums(mu).5 - want_yy_nc).norm() <= 8.0 * f64::EPSILON * want_yy_nc.norm()
            );
        }
    }

    #[test]
    fn merge_equals_sequential() {
        let m = 8;
        let data = random_spectra(m, 10, 3);
        let mut seq = MeasurementAccumulator::new(m, SystemMode::Complex, 77);
        for (v, y) in &data {
            seq.accumulate(v, y).unwrap();
        }
        let mut a = MeasurementAccumulator::with_start_index(m, SystemMode::Complex, 77, 0);
        let mut b = MeasurementAccumulator::with_start_index(m, SystemMode::Complex, 77, 4);
        for (v, y) in &data[..4] {
            a.accumulate(v, y).unwrap();
        }
        for (v, y) in &data[4..] {
            b.accumulate(v, y).unwrap();
        }
        a.merge(&b).unwrap();
        assert_eq!(a.l(), seq.l());
        for mu in 0..m {
            let (svv, svvnc, syv, syvnc, syy, syync) = seq.raw_sums(mu);
            let (avv, avvnc, ayv, ayvnc, ayy, ayync) = a.raw_sums(mu);
            assert!((svv - avv).abs() <= 8.0 * f64::EPSILON * svv.abs());
            assert!((svvnc - avvnc).norm() <= 8.0 * f64::EPSILON * svvnc.norm().max(1e-3));
            assert!((syv - ayv).norm() <= 8.0 * f64::EPSILON * syv.norm().max(1e-3));
            assert!((syvnc - ayvnc).norm() <= 8.0 * f64::EPSILON * syvnc.norm().max(1e-3));
            assert!((syy - ayy).abs() <= 8.0 * f64::EPSILON * syy.abs());
            assert!((syync - ayync).norm() <= 8.0 * f64::EPSILON * syync.norm().max(1e-3));
        }
        // non-contiguous merge rejected
        let c = MeasurementAccumulator::with_start_index(m, SystemMode::Complex, 77, 99);
        assert!(a.merge(&c).is_err());
    }
}
