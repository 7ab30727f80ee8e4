//! Simulated devices under test and noise sources, each with a queryable
//! theoretical reference (true transfer function, true PSD) so that
//! campaign results can be checked against an independent oracle.

use crate::error::{Error, Result};
use crate::window::catalog::dolph_chebyshev_taps;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Serializable description of a device under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// y(k) = v(k-1)
    Delay,
    /// 32-tap complex bandpass: Dolph-Chebyshev window modulated by j^k,
    /// normalized to unit gain at Omega = pi/2
    ChebBandpass,
    /// complex linear-phase maximally-flat half-band FIR, center tap
    /// 0.5 + leak
    HalfbandButterworth { n: usize, leak: f64 },
    /// third difference (z^-1 - 1)^3, real
    ThirdDifference,
    /// error-feedback quantizer loop, 12-bit mid-tread
    SigmaDelta,
    /// arbitrary FIR
    Fir {
        taps_re: Vec<f64>,
        taps_im: Vec<f64>,
    },
}

/// A device under test: owns its state; `process` maps an input block
/// (settling prefix included) to the same-length output block.
#[derive(Debug, Clone)]
pub struct SimSystem {
    pub kind: SystemKind,
    taps: Vec<Complex64>,
    /// feedback filter state for the quantizer loop (past errors)
    sd_state: Vec<f64>,
    /// tap weights of P(z) = 1 - (1 - P(z)), index i = delay i+1
    sd_p: Vec<f64>,
    sd_q: f64,
    pub saturated: bool,
    /// keep state across sub-measurements (quantizer loop default)
    pub persistent_state: bool,
}

pub fn make_delay() -> SimSystem {
    SimSystem {
        kind: SystemKind::Delay,
        taps: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        sd_state: Vec::new(),
        sd_p: Vec::new(),
        sd_q: 0.0,
        saturated: false,
        persistent_state: false,
    }
}

pub fn make_fir(taps: Vec<Complex64>) -> SimSystem {
    SimSystem {
        kind: SystemKind::Fir {
            taps_re: taps.iter().map(|z| z.re).collect(),
            taps_im: taps.iter().map(|z| z.im).collect(),
        },
        taps,
        sd_state: Vec::new(),
        sd_p: Vec::new(),
        sd_q: 0.0,
        saturated: false,
        persistent_state: false,
    }
}

/// Complex Chebyshev bandpass: 32 Dolph-Chebyshev taps (stop edge pi/6)
/// modulated by j^k and normalized so H(pi/2) = 1.
pub fn make_cheb_bandpass() -> SimSystem {
    let base = dolph_chebyshev_taps(32, std::f64::consts::PI / 6.0).expect("valid design");
    let mut taps: Vec<Complex64> = base
        .iter()
        .enumerate()
        .map(|(k, &t)| Complex64::i().powu(k as u32) * t)
        .collect();
    let h_half: Complex64 = taps
        .iter()
        .enumerate()
        .map(|(k, &t)| t * Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_2 * k as f64))
        .sum();
    for t in taps.iter_mut() {
        *t /= h_half;
    }
    let mut s = make_fir(taps);
    s.kind = SystemKind::ChebBandpass;
    s
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Complex linear-phase maximally-flat (Butterworth) half-band FIR: only
/// even-index taps besides the center are nonzero; passes 0 < Omega < pi.
/// `leak` raises the center tap to keep the stopband floor measurable.
pub fn make_halfband_butterworth(n: usize, leak: f64) -> Result<SimSystem> {
    if n % 2 == 0 {
        return Err(Error::invalid("half-band design needs odd n"));
    }
    let nn = n as u64;
    let scale = binomial(nn, (nn - 1) / 2) * (n as f64 + 1.0) / 2f64.powi(2 * n as i32 + 1);
    let mut taps = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    for k in (0..=2 * n).step_by(2) {
        let v = scale * binomial(nn, (k / 2) as u64) / (k as f64 - n as f64);
        taps[k] = Complex64::new(0.0, v);
    }
    taps[n] = Complex64::new(0.5 + leak, 0.0);
    let mut s = make_fir(taps);
    s.kind = SystemKind::HalfbandButterworth { n, leak };
    Ok(s)
}

/// Third difference (z^-1 - 1)^3: a 6th-order PSD zero at Omega = 0 when
/// driven by white noise.
pub fn make_third_difference() -> SimSystem {
    let taps = vec![
        Complex64::new(-1.0, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(-3.0, 0.0),
        Complex64::new(1.0, 0.0),
    ];
    let mut s = make_fir(taps);
    s.kind = SystemKind::ThirdDifference;
    s
}

/// Error-feedback quantizer loop: u = v + P(e), y = Q(u), e = u - y, so
/// the output is v - (1 - P(z)) e with
/// 1 - P(z) = z^-5 (z-1)(z^2 - 2 cos(0.246) z + 1)(z^2 - 2 cos(0.4) z + 1)
/// and a 12-bit mid-tread quantizer of step 2/(2^12 - 1). State persists
/// across sub-measurements.
pub fn make_sigma_delta() -> SimSystem {
    // expand (z-1)(z^2 - a z + 1)(z^2 - b z + 1), a = 2cos(0.246), b = 2cos(0.4)
    let a = 2.0 * 0.246f64.cos();
    let b = 2.0 * 0.4f64.cos();
    let mut poly = vec![1.0f64]; // coefficients of z^deg ... z^0
    for factor in [vec![1.0, -1.0], vec![1.0, -a, 1.0], vec![1.0, -b, 1.0]] {
        let mut next = vec![0.0; poly.len() + factor.len() - 1];
        for (i, &p) in poly.iter().enumerate() {
            for (j, &f) in factor.iter().enumerate() {
                next[i + j] += p * f;
            }
        }
        poly = next;
    }
    // z^-5 * poly(z) = 1 + q1 z^-1 + ... + q5 z^-5; P(z) = -sum q_i z^-i
    debug_assert!((poly[0] - 1.0).abs() < 1e-15);
    let p_taps: Vec<f64> = poly[1..].iter().map(|&c| -c).collect();
    SimSystem {
        kind: SystemKind::SigmaDelta,
        taps: Vec::new(),
        sd_state: vec![0.0; p_taps.len()],
        sd_p: p_taps,
        sd_q: 2.0 / (4096.0 - 1.0),
        saturated: false,
        persistent_state: true,
    }
}

/// Build a device from its serializable description.
pub fn build(kind: &SystemKind) -> Result<SimSystem> {
    Ok(match kind {
        SystemKind::Delay => make_delay(),
        SystemKind::ChebBandpass => make_cheb_bandpass(),
        SystemKind::HalfbandButterworth { n, leak } => make_halfband_butterworth(*n, *leak)?,
        SystemKind::ThirdDifference => make_third_difference(),
        SystemKind::SigmaDelta => make_sigma_delta(),
        SystemKind::Fir { taps_re, taps_im } => {
            if taps_re.len() != taps_im.len() {
                return Err(Error::invalid("fir taps_re and taps_im lengths differ"));
            }
            make_fir(
                taps_re
                    .iter()
                    .zip(taps_im)
                    .map(|(&re, &im)| Complex64::new(re, im))
                    .collect(),
            )
        }
    })
}

/// Windowed expectation of a noise source's PSD at bin `mu`: quadrature of
/// the continuous part against the window's squared magnitude spectrum
/// plus the exact tone impulses. This is the oracle a measured PSD value
/// estimates.
pub fn windowed_expectation(
    window: &crate::window::WindowSequence,
    noise: &NoiseSource,
    mu: usize,
) -> f64 {
    let m = window.spec.m;
    let grid = 16 * window.f.len();
    let mut padded: Vec<Complex64> = window.f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    padded.resize(grid, Complex64::new(0.0, 0.0));
    let fpow: Vec<f64> = crate::numerics::fft(&padded)
        .expect("finite window")
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    let omega_mu = 2.0 * std::f64::consts::PI * mu as f64 / m as f64;
    let step = 2.0 * std::f64::consts::PI / grid as f64;
    let mut acc = 0.0;
    for (g, &fp) in fpow.iter().enumerate() {
        acc += noise.psd(omega_mu - g as f64 * step) * fp;
    }
    let mut out = acc * step / (2.0 * std::f64::consts::PI * m as f64);
    for (omega_t, weight) in noise.tones() {
        let d = omega_mu - omega_t;
        let fval: Complex64 = window
            .f
            .iter()
            .enumerate()
            .map(|(k, &v)| Complex64::from_polar(v, -d * k as f64))
            .sum();
        out += weight * fval.norm_sqr() / (2.0 * std::f64::consts::PI * m as f64);
    }
    out
}

impl SimSystem {
    /// Reset internal state (per-sub-measurement default, except for the
    /// quantizer loop which keeps state unless asked otherwise).
    pub fn reset(&mut self) {
        for s in self.sd_state.iter_mut() {
            *s = 0.0;
        }
        self.saturated = false;
    }

    /// Map an input block to the output block of the same length. FIR
    /// kinds start from zero initial state at the block head, which is why
    /// campaigns prepend a settling prefix.
    pub fn process(&mut self, input: &[Complex64]) -> Vec<Complex64> {
        match self.kind {
            SystemKind::SigmaDelta => {
                let q = self.sd_q;
                input
                    .iter()
                    .map(|v| {
                        let mut u = v.re;
                        for (p, e) in self.sd_p.iter().zip(&self.sd_state) {
                            u += p * e;
                        }
                        let clamped = u.clamp(-1.0, 1.0);
                        if clamped != u {
                            self.saturated = true;
                        }
                        let y = q * (clamped / q).round();
                        let e = clamped - y;
                        self.sd_state.rotate_right(1);
                        self.sd_state[0] = e;
                        Complex64::new(y, 0.0)
                    })
                    .collect()
            }
            _ => {
                let taps = &self.taps;
                (0..input.len())
                    .map(|k| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (i, &t) in taps.iter().enumerate() {
                            if t != Complex64::new(0.0, 0.0) {
                                if let Some(idx) = k.checked_sub(i) {
                                    acc += t * input[idx];
                                }
                            }
                        }
                        acc
                    })
                    .collect()
            }
        }
    }

    /// Theoretical transfer function (linear kinds; the quantizer loop's
    /// linear path is identity).
    pub fn freq_response(&self, omega: f64) -> Complex64 {
        match self.kind {
            SystemKind::SigmaDelta => Complex64::new(1.0, 0.0),
            _ => self
                .taps
                .iter()
                .enumerate()
                .map(|(k, &t)| t * Complex64::from_polar(1.0, -omega * k as f64))
                .sum(),
        }
    }

    /// `|1 - P(e^{j omega})|^2` of the quantizer loop's noise shaping.
    pub fn noise_shaping_gain(&self, omega: f64) -> f64 {
        let mut one_minus_p = Complex64::new(1.0, 0.0);
        for (i, &p) in self.sd_p.iter().enumerate() {
            one_minus_p -= p * Complex64::from_polar(1.0, -omega * (i as f64 + 1.0));
        }
        one_minus_p.norm_sqr()
    }

    /// Quantizer step of the loop.
    pub fn quantizer_step(&self) -> f64 {
        self.sd_q
    }
}

/// Serializable description of a noise source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    /// independent Gaussian real and imaginary parts
    WhiteGaussian {
        sigma_re: f64,
        sigma_im: f64,
    },
    /// white complex Gaussian (parts sigma each) plus its one-sample
    /// delayed conjugate
    DelayedConjugateSum {
        sigma: f64,
    },
    /// complex tone of fixed amplitude, uniform random phase per block
    ToneRandomPhase {
        amplitude: f64,
        omega: f64,
    },
    /// white Gaussian through a real FIR
    FilteredGaussian {
        sigma: f64,
        taps: Vec<f64>,
    },
    Composite {
        parts: Vec<NoiseKind>,
    },
}

#[derive(Debug, Clone)]
pub struct NoiseSource {
    pub kind: NoiseKind,
    pub seed: u64,
}

/// The composite disturbance used by the confidence-calibration study:
/// white complex (parts `sigma`) + its delayed conjugate + an independent
/// unit tone at `omega` with random phase.
pub fn make_composite_tone_noise(
    sigma: f64,
    tone_amplitude: f64,
    omega: f64,
    seed: u64,
) -> NoiseSource {
    NoiseSource {
        kind: NoiseKind::Composite {
            parts: vec![
                NoiseKind::DelayedConjugateSum { sigma },
                NoiseKind::ToneRandomPhase {
                    amplitude: tone_amplitude,
                    omega,
                },
            ],
        },
        seed,
    }
}

impl NoiseSource {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        NoiseSource { kind, seed }
    }

    /// One block of samples covering time indices `k0 .. k0 + len`;
    /// `lambda` selects the per-sub-measurement stream.
    pub fn block(&self, lambda: u64, k0: i64, len: usize) -> Vec<Complex64> {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed ^ 0x6e6f_6973);
        rng.set_stream(lambda);
        Self::gen(&self.kind, &mut rng, k0, len)
    }

    fn gen(kind: &NoiseKind, rng: &mut ChaCha12Rng, k0: i64, len: usize) -> Vec<Complex64> {
        match kind {
            NoiseKind::WhiteGaussian { sigma_re, sigma_im } => (0..len)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(sigma_re * re, sigma_im * im)
                })
                .collect(),
            NoiseKind::DelayedConjugateSum { sigma } => {
                let w: Vec<Complex64> = (0..len + 1)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        Complex64::new(sigma * re, sigma * im)
                    })
                    .collect();
                (0..len).map(|k| w[k + 1] + w[k].conj()).collect()
            }
            NoiseKind::ToneRandomPhase { amplitude, omega } => {
                let phase: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                (0..len)
                    .map(|i| {
                        let k = k0 + i as i64;
                        Complex64::from_polar(*amplitude, omega * k as f64 + phase)
                    })
                    .collect()
            }
            NoiseKind::FilteredGaussian { sigma, taps } => {
                let pre = taps.len().saturating_sub(1);
                let w: Vec<f64> = (0..len + pre)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(rng);
                        sigma * g
                    })
                    .collect();
                (0..len)
                    .map(|k| {
                        let mut acc = 0.0;
                        for (i, &t) in taps.iter().enumerate() {
                            acc += t * w[k + pre - i];
                        }
                        Complex64::new(acc, 0.0)
                    })
                    .collect()
            }
            NoiseKind::Composite { parts } => {
                let mut out = vec![Complex64::new(0.0, 0.0); len];
                for p in parts {
                    for (o, v) in out.iter_mut().zip(Self::gen(p, rng, k0, len)) {
                        *o += v;
                    }
                }
                out
            }
        }
    }

    /// Continuous part of the theoretical PSD at `omega`.
    pub fn psd(&self, omega: f64) -> f64 {
        Self::psd_kind(&self.kind, omega)
    }

    fn psd_kind(kind: &NoiseKind, omega: f64) -> f64 {
        match kind {
            NoiseKind::WhiteGaussian { sigma_re, sigma_im } => {
                sigma_re * sigma_re + sigma_im * sigma_im
            }
            NoiseKind::DelayedConjugateSum { sigma } => 4.0 * sigma * sigma,
            NoiseKind::ToneRandomPhase { .. } => 0.0,
            NoiseKind::FilteredGaussian { sigma, taps } => {
                let h: Complex64 = taps
                    .iter()
                    .enumerate()
                    .map(|(k, &t)| Complex64::from_polar(t, -omega * k as f64))
                    .sum();
                sigma * sigma * h.norm_sqr()
            }
            NoiseKind::Composite { parts } => parts.iter().map(|p| Self::psd_kind(p, omega)).sum(),
        }
    }

    /// Continuous part of the theoretical modified PSD at `omega`.
    pub fn mpsd(&self, omega: f64) -> Complex64 {
        Self::mpsd_kind(&self.kind, omega)
    }

    fn mpsd_kind(kind: &NoiseKind, omega: f64) -> Complex64 {
        match kind {
            NoiseKind::WhiteGaussian { sigma_re, sigma_im } => {
                Complex64::new(sigma_re * sigma_re - sigma_im * sigma_im, 0.0)
            }
            // E{n(k) n(k+kappa)} = sigma^2 (delta(kappa-1) + delta(kappa+1)) * 2
            NoiseKind::DelayedConjugateSum { sigma } => {
                Complex64::new(4.0 * sigma * sigma * omega.cos(), 0.0)
            }
            NoiseKind::ToneRandomPhase { .. } => Complex64::new(0.0, 0.0),
            NoiseKind::FilteredGaussian { sigma, taps } => {
                // real filter, real white input: Psi(omega) = sigma^2 H(omega) H(-omega)
                let h = |om: f64| -> Complex64 {
                    taps.iter()
                        .enumerate()
                        .map(|(k, &t)| Complex64::from_polar(t, -om * k as f64))
                        .sum()
                };
                sigma * sigma * h(omega) * h(-omega)
            }
            NoiseKind::Composite { parts } => parts.iter().map(|p| Self::mpsd_kind(p, omega)).sum(),
        }
    }

    /// Spectral impulses (tones): (frequency, PSD impulse weight).
    /// A tone of amplitude A carries weight 2 pi A^2.
    pub fn tones(&self) -> Vec<(f64, f64)> {
        fn walk(kind: &NoiseKind, out: &mut Vec<(f64, f64)>) {
            match kind {
                NoiseKind::ToneRandomPhase { amplitude, omega } => {
                    out.push((*omega, 2.0 * std::f64::consts::PI * amplitude * amplitude));
                }
                NoiseKind::Composite { parts } => {
                    for p in parts {
                        walk(p, out);
                    }
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(&self.kind, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_moves_impulse() {
        let mut s = make_delay();
        let mut x = vec![Complex64::new(0.0, 0.0); 8];
        x[2] = Complex64::new(1.0, 0.0);
        let y = s.process(&x);
        assert_eq!(y[3], Complex64::new(1.0, 0.0));
        assert_eq!(y[2], Complex64::new(0.0, 0.0));
        let h = s.freq_response(0.3);
        assert!((h - Complex64::from_polar(1.0, -0.3)).norm() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn cheb_bandpass_normalized_and_equiripple() {
        let s = make_cheb_bandpass();
        assert!((s.freq_response(std::f64::consts::FRAC_PI_2).norm() - 1.0).abs() < 1e-12);
        // taps demodulated by j^k are real
        for (k, t) in s.taps.iter().enumerate() {
            let demod = t / Complex64::i().powu(k as u32);
            assert!(demod.im.abs() < 1e-12);
        }
    }

    #[test]
    fn halfband_structure_and_complementarity() {
        let s = make_halfband_butterworth(25, 0.0).unwrap();
        // even-index taps only besides the center
        for (k, t) in s.taps.iter().enumerate() {
            if k % 2 == 1 && k != 25 {
                assert_eq!(*t, Complex64::new(0.0, 0.0));
            }
        }
        assert!((s.freq_response(std::f64::consts::PI) - Complex64::new(-0.5, 0.0)).norm() < 1e-12);
        // amplitude complementarity of the zero-phase response: the shifted
        // responses add to an allpass of unit amplitude
        let n = 25.0;
        for i in 0..200 {
            let om = -std::f64::consts::PI + i as f64 * 0.0314;
            let sum = s.freq_response(om) * Complex64::from_polar(1.0, om * n)
                + s.freq_response(om + std::f64::consts::PI)
                    * Complex64::from_polar(1.0, (om + std::f64::consts::PI) * n);
            assert!(
                (sum.norm() - 1.0).abs() < 1e-10,
                "om={om}: |sum|={}",
                sum.norm()
            );
        }
        // with leak the stopband floor is at the leak level; the deepest
        // attenuation of this pass-(0,pi) filter sits at Omega = -pi/2
        let s = make_halfband_butterworth(25, 1e-6).unwrap();
        let floor = s.freq_response(-std::f64::consts::FRAC_PI_2).norm();
        let db = 20.0 * floor.log10();
        assert!((db + 120.0).abs() < 1.0, "stopband floor {db} dB");
    }

    #[test]
    fn sigma_delta_basics() {
        let mut s = make_sigma_delta();
        // zero in, zero out forever
        let y = s.process(&vec![Complex64::new(0.0, 0.0); 1000]);
        assert!(y.iter().all(|z| z.re == 0.0));
        // (z - 1) factor: 1 - P(1) = 0
        assert!(s.noise_shaping_gain(0.0) < 1e-25);
        assert!(s.noise_shaping_gain(0.246) < 1e-25);
        assert!(s.noise_shaping_gain(0.4) < 1e-25);
        assert!((s.quantizer_step() - 2.0 / 4095.0).abs() < 1e-18);
    }

    #[test]
    fn sigma_delta_bounded_state() {
        let mut s = make_sigma_delta();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let n = 2_000_00usize;
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-0.96..0.96), 0.0))
            .collect();
        let _ = s.process(&x);
        assert!(!s.saturated);
        assert!(s.sd_state.iter().all(|e| e.abs() <= 1.0));
    }

    #[test]
    fn composite_noise_psd_values() {
        let ns = make_composite_tone_noise(0.1, 1.0, 1.0, 7);
        assert!((ns.psd(0.3) - 0.04).abs() < 1e-15);
        let tones = ns.tones();
        assert_eq!(tones.len(), 1);
        assert!((tones[0].1 - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        // mpsd = 4 sigma^2 cos(omega)
        let want = 0.04 * (0.7f64).cos();
        assert!((ns.mpsd(0.7) - Complex64::new(want, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn noise_stationary_moments() {
        let ns = NoiseSource::new(NoiseKind::DelayedConjugateSum { sigma: 0.1 }, 3);
        let b = ns.block(0, 0, 1_000_000);
        let pow: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>() / b.len() as f64;
        assert!((pow - 0.04).abs() < 0.003);
        // modified ACF at lag 1: E{n(k) n(k+1)} = 2 sigma^2
        let macf1: Complex64 =
            b.windows(2).map(|w| w[0] * w[1]).sum::<Complex64>() / (b.len() - 1) as f64;
        assert!((macf1 - Complex64::new(0.02, 0.0)).norm() < 0.003);
    }
}
