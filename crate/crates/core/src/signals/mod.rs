//! Excitation ensembles: random multitone, complex chirp, a real chirp
//! with crest-factor control, and Gaussian random vectors. All generators
//! are reproducible: the per-sub-measurement RNG is a counter-based stream
//! cipher seeded from the plan seed with the sub-measurement index as the
//! stream number, so sub-measurements are independent streams and a plan
//! regenerates bit-identically from its spec.

use crate::error::{Error, Result};
use crate::numerics::ifft;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Parameters of the crest-controlled real chirp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpParams {
    /// spectral magnitude (signal units * sqrt(M))
    pub v_c: f64,
    /// admissible crest factor, > sqrt(2)
    pub cr_max: f64,
    /// equiprobable global sign flip per sub-measurement
    pub random_sign: bool,
    /// uniform random cyclic rotation per sub-measurement
    pub random_rotation: bool,
}

impl ChirpParams {
    /// Phase-hub bound `1 - 2 / cr_max^2` implied by the crest limit.
    pub fn phi_max(&self) -> f64 {
        1.0 - 2.0 / (self.cr_max * self.cr_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cr_max <= std::f64::consts::SQRT_2 {
            return Err(Error::invalid("cr_max must exceed sqrt(2)"));
        }
        if self.v_c <= 0.0 {
            return Err(Error::invalid("v_c must be positive"));
        }
        Ok(())
    }
}

/// Serializable description of an excitation ensemble; the spectra and
/// time signals regenerate deterministically from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanKind {
    Multitone {
        magnitudes: Vec<f64>,
        real_mode: bool,
    },
    ChirpComplex {
        v_c: f64,
        random_rotation: bool,
    },
    ChirpReal(ChirpParams),
    Gaussian {
        variance: f64,
        complex_mode: bool,
        rho_re: f64,
        rho_im: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSpec {
    pub m: usize,
    pub l: u32,
    pub seed: u64,
    #[serde(flatten)]
    pub kind: PlanKind,
}

/// Generated excitation: per-sub-measurement spectra and periodic base
/// blocks.
#[derive(Debug, Clone)]
pub struct ExcitationPlan {
    pub spec: PlanSpec,
    /// V_lambda(mu), length M each
    pub spectra: Vec<Vec<Complex64>>,
    /// one period v_lambda(k), length M each
    pub time_signals: Vec<Vec<Complex64>>,
}

fn stream_rng(seed: u64, lambda: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(lambda);
    rng
}

/// Random multitone: fixed per-bin magnitude, i.i.d. uniform phases. In
/// real mode the phases are antisymmetric and the two self-conjugate bins
/// get equiprobable signs, so the spectrum is exactly conjugate-symmetric.
pub fn gen_multitone(
    m: usize,
    l: u32,
    magnitudes: &[f64],
    seed: u64,
    real_mode: bool,
) -> Result<ExcitationPlan> {
    if magnitudes.len() != m {
        return Err(Error::LengthMismatch {
            what: "multitone magnitudes",
            expected: m,
            got: magnitudes.len(),
        });
    }
    if magnitudes.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::invalid(
            "multitone magnitudes must be finite and >= 0",
        ));
    }
    if real_mode {
        if m % 2 != 0 {
            return Err(Error::invalid("real-mode multitone needs even M"));
        }
        for mu in 1..m / 2 {
            if (magnitudes[mu] - magnitudes[m - mu]).abs() > 0.0 {
                return Err(Error::invalid(
                    "real-mode multitone needs conjugate-symmetric magnitudes",
                ));
            }
        }
    }
    let spec = PlanSpec {
        m,
        l,
        seed,
        kind: PlanKind::Multitone {
            magnitudes: magnitudes.to_vec(),
            real_mode,
        },
    };
    generate(&spec)
}

/// Complex chirp: one fixed quadratic-phase block, rotated by a common
/// random phasor per sub-measurement, optionally cyclically shifted.
pub fn gen_chirp_complex(
    m: usize,
    l: u32,
    v_c: f64,
    seed: u64,
    random_rotation: bool,
) -> Result<ExcitationPlan> {
    if m % 2 != 0 {
        return Err(Error::invalid("complex chirp needs even M"));
    }
    let spec = PlanSpec {
        m,
        l,
        seed,
        kind: PlanKind::ChirpComplex {
            v_c,
            random_rotation,
        },
    };
    generate(&spec)
}

/// Real chirp with crest-factor control.
pub fn gen_chirp_real(m: usize, l: u32, params: ChirpParams, seed: u64) -> Result<ExcitationPlan> {
    if m % 2 != 0 {
        return Err(Error::invalid("real chirp needs even M"));
    }
    params.validate()?;
    let spec = PlanSpec {
        m,
        l,
        seed,
        kind: PlanKind::ChirpReal(params),
    };
    generate(&spec)
}

/// White Gaussian excitation; in complex mode the variance splits between
/// real and imaginary parts with the requested complementary correlation
/// `rho = E{v^2} / E{|v|^2}`.
pub fn gen_gaussian(
    m: usize,
    l: u32,
    variance: f64,
    complex_mode: bool,
    rho: Complex64,
    seed: u64,
) -> Result<ExcitationPlan> {
    if variance <= 0.0 {
        return Err(Error::invalid("variance must be positive"));
    }
    if rho.norm() > 1.0 + 1e-12 {
        return Err(Error::invalid("|rho| must be <= 1"));
    }
    let spec = PlanSpec {
        m,
        l,
        seed,
        kind: PlanKind::Gaussian {
            variance,
            complex_mode,
            rho_re: rho.re,
            rho_im: rho.im,
        },
    };
    generate(&spec)
}

/// Spectrum of the crest-controlled real chirp: constant magnitude `v_c`,
/// skew-symmetric phase built from a sign-flipped quadratic part and a
/// sinusoidal part of hub `phi`, cyclically rotated by `shift` samples.
pub fn chirp_real_spectrum(m: usize, v_c: f64, phi: f64, shift: usize) -> Vec<Complex64> {
    let half = m as i64 / 2;
    let mut v = vec![Complex64::new(0.0, 0.0); m];
    for mu in (1 - half)..=half {
        let ph = -(2.0 * std::f64::consts::PI / m as f64 * (mu * mu.abs()) as f64
            + phi * m as f64 / std::f64::consts::PI
                * (2.0 * std::f64::consts::PI * mu as f64 / m as f64).sin());
        let idx = mu.rem_euclid(m as i64) as usize;
        let rot = -2.0 * std::f64::consts::PI * (mu as f64) * shift as f64 / m as f64;
        v[idx] = Complex64::from_polar(v_c, ph + rot);
    }
    v
}

/// Regenerate a plan from its serializable spec.
pub fn generate(spec: &PlanSpec) -> Result<ExcitationPlan> {
    let m = spec.m;
    if m < 1 {
        return Err(Error::invalid("plan needs M >= 1"));
    }
    let mut spectra = Vec::with_capacity(spec.l as usize);
    let mut time_signals = Vec::with_capacity(spec.l as usize);
    for lambda in 0..spec.l as u64 {
        let mut rng = stream_rng(spec.seed, lambda);
        match &spec.kind {
            PlanKind::Multitone {
                magnitudes,
                real_mode,
            } => {
                let mut v = vec![Complex64::new(0.0, 0.0); m];
                if *real_mode {
                    let mut phases = vec![0.0f64; m];
                    for mu in 1..m / 2 {
                        let ph: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                        phases[mu] = ph;
                        phases[m - mu] = -ph;
                    }
                    let sign0: bool = rng.gen();
                    let signh: bool = rng.gen();
                    phases[0] = if sign0 { 0.0 } else { std::f64::consts::PI };
                    phases[m / 2] = if signh { 0.0 } else { std::f64::consts::PI };
                    for mu in 0..m {
                        v[mu] = Complex64::from_polar(magnitudes[mu], phases[mu]);
                    }
                    // enforce exact symmetry: the phase construction already
                    // gives V(mu) = conj(V(M-mu)) up to sign of zero
                    for mu in 1..m / 2 {
                        v[m - mu] = v[mu].conj();
                    }
                    v[0] = Complex64::new(v[0].re, 0.0);
                    v[m / 2] = Complex64::new(v[m / 2].re, 0.0);
                } else {
                    for mu in 0..m {
                        let ph: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                        v[mu] = Complex64::from_polar(magnitudes[mu], ph);
                    }
                }
                let t = ifft(&v)?;
                spectra.push(v);
                time_signals.push(t);
            }
            PlanKind::ChirpComplex {
                v_c,
                random_rotation,
            } => {
                let phi: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                let shift: usize = if *random_rotation {
                    rng.gen_range(0..m)
                } else {
                    0
                };
                let rot = Complex64::from_polar(1.0, phi);
                let mut v = Vec::with_capacity(m);
                for mu in 0..m {
                    // V_C e^{j pi/4} e^{-j pi mu^2 / M}
                    let ph = std::f64::consts::FRAC_PI_4
                        - std::f64::consts::PI * (mu * mu) as f64 / m as f64
                        - 2.0 * std::f64::consts::PI * (mu * shift) as f64 / m as f64;
                    v.push(Complex64::from_polar(*v_c, ph) * rot);
                }
                let t = ifft(&v)?;
                spectra.push(v);
                time_signals.push(t);
            }
            PlanKind::ChirpReal(p) => {
                let phi: f64 = rng.gen_range(0.0..=p.phi_max());
                let sign = if p.random_sign {
                    if rng.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    1.0
                };
                let shift: usize = if p.random_rotation {
                    rng.gen_range(0..m)
                } else {
                    0
                };
                let v = chirp_real_spectrum(m, sign * p.v_c, phi, shift);
                let t = ifft(&v)?;
                spectra.push(v);
                time_signals.push(t);
            }
            PlanKind::Gaussian {
                variance,
                complex_mode,
                rho_re,
                rho_im,
            } => {
                let mut t = Vec::with_capacity(m);
                if *complex_mode {
                    // E{x^2} = a, E{y^2} = b, E{xy} = c from rho
                    let a = variance * (1.0 + rho_re) / 2.0;
                    let b = variance * (1.0 - rho_re) / 2.0;
                    let c = variance * rho_im / 2.0;
                    let sa = a.sqrt();
                    let cy = if sa > 0.0 { c / sa } else { 0.0 };
                    let sy = (b - cy * cy).max(0.0).sqrt();
                    for _ in 0..m {
                        let g1: f64 = StandardNormal.sample(&mut rng);
                        let g2: f64 = StandardNormal.sample(&mut rng);
                        t.push(Complex64::new(sa * g1, cy * g1 + sy * g2));
                    }
                } else {
                    let s = variance.sqrt();
                    for _ in 0..m {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        t.push(Complex64::new(s * g, 0.0));
                    }
                }
                let v = crate::numerics::fft(&t)?;
                spectra.push(v);
                time_signals.push(t);
            }
        }
    }
    Ok(ExcitationPlan {
        spec: spec.clone(),
        spectra,
        time_signals,
    })
}

impl ExcitationPlan {
    /// Periodically extended sample block covering k = -E .. F-1.
    pub fn periodic_extend(
        &self,
        lambda: usize,
        settling: usize,
        total: usize,
    ) -> Result<Vec<Complex64>> {
        if total % self.spec.m != 0 {
            return Err(Error::invalid("total length must be a multiple of M"));
        }
        let base = &self.time_signals[lambda];
        let m = self.spec.m as i64;
        Ok((0..settling + total)
            .map(|i| {
                let k = i as i64 - settling as i64;
                base[k.rem_euclid(m) as usize]
            })
            .collect())
    }

    /// Crest factor of one base block: peak of |real part| over its rms.
    pub fn crest_factor_real(&self, lambda: usize) -> f64 {
        let v = &self.time_signals[lambda];
        let peak = v.iter().map(|z| z.re.abs()).fold(0.0f64, f64::max);
        let rms = (v.iter().map(|z| z.re * z.re).sum::<f64>() / v.len() as f64).sqrt();
        peak / rms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multitone_constant_magnitude_per_bin() {
        let mags = vec![2.0; 16];
        let p = gen_multitone(16, 8, &mags, 1, false).unwrap();
        for v in &p.spectra {
            for (mu, z) in v.iter().enumerate() {
                assert!((z.norm() - 2.0).abs() < 1e-12, "mu={mu}");
            }
        }
        // sum over lambda of |V|^2 is exactly L |V|^2
        for mu in 0..16 {
            let s: f64 = p.spectra.iter().map(|v| v[mu].norm_sqr()).sum();
            assert!((s - 8.0 * 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn multitone_real_mode_real_signal() {
        let mags = vec![1.0; 8];
        let p = gen_multitone(8, 4, &mags, 3, true).unwrap();
        for (v, t) in p.spectra.iter().zip(&p.time_signals) {
            for mu in 1..4 {
                assert_eq!(v[mu], v[8 - mu].conj());
            }
            let max = t.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            for z in t {
                assert!(z.im.abs() <= 1e-13 * max);
            }
        }
        assert!(gen_multitone(7, 4, &vec![1.0; 7], 3, true).is_err());
    }

    #[test]
    fn complex_chirp_flat_envelope_and_crest() {
        let p = gen_chirp_complex(1024, 2, 3.0, 5, false).unwrap();
        let t = &p.time_signals[0];
        let want = 3.0 / (1024f64).sqrt();
        for z in t {
            assert!((z.norm() - want).abs() < 1e-12 * want);
        }
        let cr = p.crest_factor_real(0);
        assert!((cr - std::f64::consts::SQRT_2).abs() < 0.05 * std::f64::consts::SQRT_2);
    }

    #[test]
    fn real_chirp_is_real_and_bounded() {
        let params = ChirpParams {
            v_c: 1.0,
            cr_max: 1.5,
            random_sign: true,
            random_rotation: false,
        };
        assert!((params.phi_max() - 1.0 / 9.0).abs() < 1e-15);
        let p = gen_chirp_real(256, 6, params, 9).unwrap();
        for t in &p.time_signals {
            let max = t.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            for z in t {
                assert!(z.im.abs() <= 1e-13 * max);
            }
        }
    }

    #[test]
    fn gaussian_moments() {
        let rho = Complex64::new(-0.5, 0.5);
        let p = gen_gaussian(1000, 100, 2.0, true, rho, 17).unwrap();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pow = 0.0;
        let mut sq = Complex64::new(0.0, 0.0);
        let mut count = 0.0;
        for t in &p.time_signals {
            for z in t {
                sum += z;
                pow += z.norm_sqr();
                sq += z * z;
                count += 1.0;
            }
        }
        let mean = sum / count;
        assert!(mean.norm() < 5.0 * (2.0f64 / count).sqrt());
        let var = pow / count;
        assert!((var - 2.0).abs() < 0.02 * 2.0);
        let rho_emp = sq / pow;
        assert!((rho_emp - rho).norm() < 0.02);
    }

    #[test]
    fn periodic_extend_indexing() {
        let p = gen_chirp_complex(8, 1, 1.0, 0, false).unwrap();
        let base = p.time_signals[0].clone();
        let out = p.periodic_extend(0, 31, 32).unwrap();
        assert_eq!(out.len(), 63);
        for i in 0..out.len() {
            let k = i as i64 - 31;
            assert_eq!(out[i], base[k.rem_euclid(8) as usize]);
        }
        // settling E = M: first period equals second
        let out = p.periodic_extend(0, 8, 16).unwrap();
        assert_eq!(out[0..8], out[8..16]);
    }

    #[test]
    fn reproducible_from_spec() {
        let params = ChirpParams {
            v_c: 2.0,
            cr_max: 1.6,
            random_sign: true,
            random_rotation: true,
        };
        let a = gen_chirp_real(64, 5, params, 123).unwrap();
        let b = generate(&a.spec).unwrap();
        for (x, y) in a.spectra.iter().zip(&b.spectra) {
            assert_eq!(x, y);
        }
    }
}
