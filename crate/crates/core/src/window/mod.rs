//! Construction of window sequences whose spectrum vanishes on the
//! measurement bin grid and whose shifted magnitude-squared spectra add up
//! to a constant, i.e. whose autocorrelation is an M-th-band (Nyquist)
//! impulse response. The construction is non-iterative: the magnitude of
//! the N retained Fourier coefficients comes from a closed pole-product
//! formula, the minimum-phase angle from a cepstral factorization carried
//! out after a bilinear warp that pulls near-circle zeros inward.

pub mod catalog;
pub mod io;

use crate::error::{Error, Result};
use crate::numerics::{
    cos_pi_ratio, direct_dft_bin, ifft, next_pow2, sin_pi_ratio, EPS, MANTISSA_BITS,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Geometry of a window: DFT length `M`, length factor `N`, window length
/// `F = N * M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub m: usize,
    pub n: usize,
}

impl WindowSpec {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("window spec needs M >= 2"));
        }
        if n < 1 {
            return Err(Error::invalid("window spec needs N >= 1"));
        }
        Ok(WindowSpec { m, n })
    }

    pub fn f_len(&self) -> usize {
        self.m * self.n
    }
}

/// Parameters of the bilinear warp used by the cepstral phase computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearParams {
    /// warp parameter, 0 < c < 2
    pub c: f64,
    /// FFT length for the cepstrum, power of two
    pub m_tilde: usize,
}

/// A designed window: the time sequence and its N retained Fourier
/// coefficients stored as spectrum values `F(nu * 2 pi / F)`, so that the
/// value at `nu = 0` equals `M`.
#[derive(Debug, Clone)]
pub struct WindowSequence {
    pub spec: WindowSpec,
    pub f: Vec<f64>,
    pub fourier_coeffs: Vec<Complex64>,
    /// false when the cepstrum had not decayed into the eps floor at the
    /// chosen FFT length (a larger length would be needed)
    pub cepstrum_tail_ok: bool,
}

/// Empirical-quality record of a designed window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowVerification {
    /// autocorrelation d(k) for k = -(F-1) .. F-1 (index k + F - 1)
    pub acf: Vec<f64>,
    /// |F(mu 2pi/M)| for mu = 1 .. M-1, from the direct reduced-argument DFT
    pub zero_grid_errors: Vec<f64>,
    /// d(kt * M) - delta(kt) for kt = 1-N .. N-1
    pub acf_grid_errors: Vec<f64>,
    /// rms of the relative power-complementarity error
    pub eps_2_20_rms: f64,
}

/// Eq-style empirical warp parameter; needs N >= 2 (N = 1 is the
/// rectangle shortcut and never reaches the cepstrum path).
pub fn bilinear_c(spec: &WindowSpec) -> Result<f64> {
    let (m, n) = (spec.m as f64, spec.n as f64);
    if spec.n < 2 {
        return Err(Error::invalid("bilinear parameter undefined for N = 1"));
    }
    let c = 2.0
        / (1.0 + (n / 2.0).powf(m / 3.0 / (1.0 - m)) / (std::f64::consts::PI / (2.0 * m)).tan());
    debug_assert!(c > 0.0 && c < 2.0);
    Ok(c)
}

/// FFT length for the cepstrum: smallest power of two covering the
/// empirically determined decay bound.
pub fn cepstrum_fft_length(spec: &WindowSpec, mantissa_bits: u32) -> Result<usize> {
    if mantissa_bits < 24 {
        return Err(Error::invalid("mantissa_bits must be >= 24"));
    }
    let (m, n) = (spec.m as f64, spec.n as f64);
    let raw = (mantissa_bits as f64 - 1.0) * 2f64.powf((n / 3.0).ln()) * 3.6f64.powf(1.0 / m);
    Ok(next_pow2(raw))
}

/// Squared magnitudes of the retained spectrum samples `|F(nu 2pi/F)|^2`
/// for `nu = 0 .. N-1`, up to one common positive factor. Computed as the
/// pole-distance product sum with the cancelled double zero skipped and an
/// overflow-guard normalization folded into every factor.
pub fn magnitude_squared_coeffs(spec: &WindowSpec) -> Vec<f64> {
    let n = spec.n;
    let f = spec.f_len() as i64;
    if n == 1 {
        return vec![1.0];
    }
    // guard factor: keeps the value at nu = 0 near unity
    let sum_ln: f64 = (5..=4 * n as u64).step_by(2).map(|v| (v as f64).ln()).sum();
    let nf = (2.0 * (8.0 / std::f64::consts::PI * f as f64).ln() - sum_ln / (n as f64 - 1.0)).exp();

    let mut out = vec![0.0f64; n];
    for i1 in 0..n as i64 {
        // nu_1 = (1-N)/2 + i1; summand active for i1+1-N <= nu <= i1
        let mut cum: Vec<f64> = (0..n as i64)
            .map(|nu| {
                if nu <= i1 && nu >= i1 + 1 - n as i64 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        for i2 in 0..(n as i64 - 1) {
            // nu_2 = (1-N)/2 + i2; the cancelled pole at nu_2 = nu - nu_1 is
            // skipped by shifting the index past it
            let base = 1 - n as i64 + i1 + i2; // nu_1 + nu_2
            for (nu, c) in cum.iter_mut().enumerate() {
                let nu = nu as i64;
                let skip = if nu <= base { 1 } else { 0 };
                let nu3 = nu - base - skip;
                let s = sin_pi_ratio(nu3, f);
                *c /= nf * s * s;
            }
        }
        for (o, c) in out.iter_mut().zip(&cum) {
            *o += c;
        }
    }
    out
}

/// Result of the cepstral phase computation.
#[derive(Debug, Clone)]
pub struct PhaseCoeffs {
    /// total minimum-phase angle phi(nu) for nu = 1 .. N-1; the spectrum
    /// sample is `|F| * exp(-j phi)`
    pub phi: Vec<f64>,
    /// true when the cepstrum tail at the chosen FFT length sits in the
    /// eps floor
    pub tail_ok: bool,
}

/// Minimum-phase angles of the retained spectrum samples, `nu = 1 .. N-1`.
///
/// Three parts: the sine series from the cepstrum of the warped
/// unknown-zero factor (evaluated smallest-terms-first), the multiple
/// pole-pair part of the warp, and the linear part of the unit-circle
/// zeros; the last two combine into the closed correction applied after
/// the series.
pub fn phase_coeffs(spec: &WindowSpec, params: &BilinearParams) -> Result<PhaseCoeffs> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::invalid("phase coefficients need N >= 2"));
    }
    let f = spec.f_len() as i64;
    let c = params.c;
    let ms = params.m_tilde;
    let half = ms / 2;
    let pi = std::f64::consts::PI;

    // samples of the warped zero-only factor on eta = 0 .. Ms/2
    let nf = 1.0
        / (c * c
            + 4.0 * (1.0 - c) * {
                let s = sin_pi_ratio(n as i64 - 1, f);
                s * s
            });
    let mut d_eta = vec![0.0f64; half + 1];
    for i1 in 0..n as i64 {
        let mut cum = vec![1.0f64; half + 1];
        let lo_end = i1 - n as i64; // nu_1 - (N+1)/2
        let hi_start = i1 + 1; // nu_1 + (N+1)/2
        let nu2s = (1 - n as i64..=lo_end).chain(hi_start..=n as i64 - 1);
        for nu2 in nu2s {
            let s = sin_pi_ratio(nu2, f);
            let k = nf * (c * c + 4.0 * (1.0 - c) * s * s);
            let psi = ((1.0 - c) * sin_pi_ratio(2 * nu2, f) / (c + 2.0 * (1.0 - c) * s * s)).atan();
            let shift = pi / f as f64 * nu2 as f64 + psi;
            for (eta, v) in cum.iter_mut().enumerate() {
                let arg = pi / ms as f64 * eta as f64 - shift;
                let sn = arg.sin();
                *v *= k * sn * sn;
            }
        }
        for (d, v) in d_eta.iter_mut().zip(&cum) {
            *d += v;
        }
    }

    // normalize so max = 1/min, which keeps the quantization error of the
    // logarithm flat across the band
    let max = d_eta.iter().cloned().fold(f64::MIN, f64::max);
    let min = d_eta.iter().cloned().fold(f64::MAX, f64::min);
    let scale = 1.0 / (max * min).sqrt();
    let logs: Vec<f64> = d_eta.iter().map(|&v| (scale * v).ln()).collect();

    // double cepstrum via inverse FFT of the evenly mirrored log samples
    let mut full: Vec<Complex64> = Vec::with_capacity(ms);
    full.extend(logs.iter().map(|&v| Complex64::new(v, 0.0)));
    for idx in (1..half).rev() {
        full.push(Complex64::new(logs[idx], 0.0));
    }
    let ceps = ifft(&full)?;
    let mut c2: Vec<f64> = ceps.iter().map(|z| z.re).collect();
    for k in 1..=ms / 2 {
        let avg = 0.5 * (c2[k] + c2[ms - k]);
        c2[k] = avg;
        c2[ms - k] = avg;
    }

    // residual cepstrum above the eps floor near Ms/2 means the FFT was too
    // short; check the top decile of [1, Ms/2)
    let tail_start = 1 + (0.9 * (half as f64 - 1.0)).ceil() as usize;
    let tail_ok = (tail_start..half).all(|k| (2.0 * c2[k]).abs() < 64.0 * EPS);

    // sine series at the warped versions of the target frequencies
    let mut phi = vec![0.0f64; n - 1];
    for nu in 1..n {
        let omega = 2.0 * pi / f as f64 * nu as f64;
        let s_half = sin_pi_ratio(nu as i64, f); // sin(Omega/2)
        let omega_s = omega
            + 2.0
                * ((1.0 - c) * sin_pi_ratio(2 * nu as i64, f)
                    / (c + 2.0 * (1.0 - c) * s_half * s_half))
                    .atan();
        // reverse order: smallest (largest-k) terms first
        let mut acc = 0.0f64;
        for k in (1..half).rev() {
            acc += (omega_s * k as f64).sin() * c2[k];
        }
        // pole-pair part expressed through (Omega - Omega_s), linear part of
        // the unit-circle zeros absorbed alongside
        phi[nu - 1] = acc - (n as f64 - 1.0) * omega_s / 2.0 + (f - n as i64) as f64 * omega / 2.0;
    }
    Ok(PhaseCoeffs { phi, tail_ok })
}

/// Design the window for the given geometry.
///
/// `N = 1` returns the rectangle directly. Otherwise the N retained
/// spectrum samples are assembled from magnitude and phase and the time
/// sequence is synthesized as a cosine plus sine series with
/// exact-argument tables, accumulated from the smallest coefficients up.
/// The trailing N-1 values are kept as computed.
pub fn design_window(spec: &WindowSpec) -> Result<WindowSequence> {
    let n = spec.n;
    let m = spec.m;
    let f_len = spec.f_len();
    if n == 1 {
        return Ok(WindowSequence {
            spec: *spec,
            f: vec![1.0; m],
            fourier_coeffs: vec![Complex64::new(m as f64, 0.0)],
            cepstrum_tail_ok: true,
        });
    }

    let c = bilinear_c(spec)?;
    let m_tilde = cepstrum_fft_length(spec, MANTISSA_BITS)?;
    let params = BilinearParams { c, m_tilde };

    let mag2 = magnitude_squared_coeffs(spec);
    let PhaseCoeffs { phi, tail_ok } = phase_coeffs(spec, &params)?;

    // normalized Fourier-series coefficients: value 1/N at nu = 0
    let mut mags: Vec<f64> = mag2.iter().map(|&v| v.sqrt()).collect();
    let scale = 1.0 / (n as f64 * mags[0]);
    for v in mags.iter_mut() {
        *v *= scale;
    }
    let mut coeffs: Vec<Complex64> = Vec::with_capacity(n);
    coeffs.push(Complex64::new(mags[0], 0.0));
    for nu in 1..n {
        coeffs.push(Complex64::from_polar(mags[nu], -phi[nu - 1]));
    }

    // full-cycle tables sin(2 pi m / F), cos(2 pi m / F) with exact reduction
    let den = f_len as i64;
    let si: Vec<f64> = (0..den).map(|k| sin_pi_ratio(2 * k, den)).collect();
    let co: Vec<f64> = (0..den).map(|k| cos_pi_ratio(2 * k, den)).collect();

    let mut f = vec![0.0f64; f_len];
    for nu in (1..n).rev() {
        let re2 = 2.0 * coeffs[nu].re;
        let im2 = 2.0 * coeffs[nu].im;
        for (k, fv) in f.iter_mut().enumerate() {
            let idx = (k * nu) % f_len;
            *fv += re2 * co[idx] - im2 * si[idx];
        }
    }
    let inv_n = 1.0 / n as f64;
    for fv in f.iter_mut() {
        *fv += inv_n;
    }

    let fourier_coeffs = coeffs.iter().map(|&z| z * f_len as f64).collect::<Vec<_>>();
    Ok(WindowSequence {
        spec: *spec,
        f,
        fourier_coeffs,
        cepstrum_tail_ok: tail_ok,
    })
}

/// Worker count for embarrassingly parallel loops: `RKM_THREADS` caps it.
pub(crate) fn worker_count() -> usize {
    let avail = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("RKM_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).unwrap_or(avail),
        Err(_) => avail,
    }
}

/// Verify a window: autocorrelation by the direct self-correlation sum,
/// spectral zeros by the direct reduced-argument DFT.
pub fn verify_window(w: &WindowSequence) -> WindowVerification {
    let f = &w.f;
    let f_len = f.len();
    let m = w.spec.m;
    let n = w.spec.n;

    // d(k) = (1/M) sum_j f(j) f(j+k), direct evaluation (no FFT)
    let mut acf = vec![0.0f64; 2 * f_len - 1];
    let inv_m = 1.0 / m as f64;
    for (i, a) in acf.iter_mut().enumerate() {
        let k = i as i64 - (f_len as i64 - 1);
        let (lo, hi) = if k >= 0 {
            (0usize, f_len - k as usize)
        } else {
            ((-k) as usize, f_len)
        };
        let mut s = 0.0;
        for j in lo..hi {
            s += f[j] * f[(j as i64 + k) as usize];
        }
        *a = s * inv_m;
    }

    let d_at = |k: i64| acf[(k + f_len as i64 - 1) as usize];
    let mut acf_grid_errors = Vec::with_capacity(2 * n - 1);
    for kt in (1 - (n as i64))..=(n as i64 - 1) {
        let target = if kt == 0 { 1.0 } else { 0.0 };
        acf_grid_errors.push(d_at(kt * m as i64) - target);
    }
    let eps_2_20_rms = acf_grid_errors.iter().map(|e| e * e).sum::<f64>().sqrt();

    // |F(mu 2pi/M)| for mu = 1..M-1, chunked across workers
    let mut zero_grid_errors = vec![0.0f64; m.saturating_sub(1)];
    if m > 1 {
        let workers = worker_count().min(m - 1);
        let chunk = (m - 1 + workers - 1) / workers;
        std::thread::scope(|s| {
            for (w_idx, out) in zero_grid_errors.chunks_mut(chunk).enumerate() {
                let f_ref = &f;
                s.spawn(move || {
                    for (j, slot) in out.iter_mut().enumerate() {
                        let mu = 1 + w_idx * chunk + j;
                        *slot = direct_dft_bin(f_ref, mu, m).norm();
                    }
                });
            }
        });
    }

    WindowVerification {
        acf,
        zero_grid_errors,
        acf_grid_errors,
        eps_2_20_rms,
    }
}

/// Half-band filter taps: the autocorrelation of the `M = 2` design,
/// centered, with d(0) = 1. For N > 2 it has 2N+1 structurally nonzero
/// taps; N = 1 and N = 2 are the identical (1/2, 1, 1/2) filter.
pub fn halfband_coeffs(n: usize) -> Result<Vec<f64>> {
    let spec = WindowSpec::new(2, n)?;
    let w = design_window(&spec)?;
    let v = verify_window(&w);
    Ok(v.acf)
}
