//! Classical windows sampled onto the `F = N * M` grid, with feasibility
//! flags for the two conditions the measurement method needs: spectral
//! zeros on the bin grid and power-complementarity of the shifted
//! magnitude-squared spectra. None of the classical shapes meets both
//! beyond the trivial rectangle; the flags record the per-kind analysis.

use super::WindowSpec;
use crate::error::{Error, Result};
use crate::numerics::{fft, ifft};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatalogKind {
    Rectangle,
    Triangle,
    Parzen,
    Hamming,
    Hann,
    Blackman,
    Tukey { alpha: f64 },
    CosineRolloff { alpha: f64 },
    RootCosineRolloff { alpha: f64 },
    Kaiser { alpha: f64 },
    DolphChebyshev { omega1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub meets_zero_condition: bool,
    pub meets_power_complement: bool,
    /// asymptotic power of the stopband rise in sin(Omega/2); None for
    /// equiripple stopbands that have no power-law envelope
    pub stopband_decay_order: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct CatalogWindow {
    pub kind: CatalogKind,
    pub spec: WindowSpec,
    pub f: Vec<f64>,
    pub feasibility: Feasibility,
}

/// Cosine-series window on |t| < 1/2 sampled at rate F over its support:
/// `f(k) = c0 + sum_nu 2 c_nu cos(2 pi nu (k/F - 1/2))`. Every term lands
/// exactly on a DFT bin, so the bin-grid zeros hold for any N >= number of
/// series terms.
fn cosine_series(spec: &WindowSpec, coeffs: &[f64]) -> Vec<f64> {
    let f_len = spec.f_len();
    let c0 = coeffs[0];
    let norm = 1.0 / (spec.n as f64 * c0);
    (0..f_len)
        .map(|k| {
            let t = k as f64 / f_len as f64 - 0.5;
            let mut v = c0;
            for (nu, &c) in coeffs.iter().enumerate().skip(1) {
                v += 2.0 * c * (2.0 * std::f64::consts::PI * nu as f64 * t).cos();
            }
            v * norm
        })
        .collect()
}

/// Raised-cosine spectrum, value 1 in the flat region, half at omega = pi.
fn raised_cosine_spectrum(omega: f64, alpha: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let a = omega.abs();
    if a <= pi * (1.0 - alpha) {
        1.0
    } else if a < pi * (1.0 + alpha) {
        0.5 * (1.0 + (pi * (a / pi - 1.0 + alpha) / (2.0 * alpha)).cos())
    } else {
        0.0
    }
}

/// Periodified line-spectrum sampling of a band-limited continuous window:
/// lines at the bins |nu| < N(1+alpha)/2 with weights from the continuous
/// spectrum, segment centered so the window is symmetric.
fn line_spectrum_window(spec: &WindowSpec, alpha: f64, root: bool) -> Vec<f64> {
    let f_len = spec.f_len();
    let n = spec.n as f64;
    let nu_max = (n * (1.0 + alpha) / 2.0).ceil() as i64;
    let mut f = vec![0.0f64; f_len];
    let mut lines = Vec::new();
    for nu in -nu_max..=nu_max {
        let wv = raised_cosine_spectrum(2.0 * std::f64::consts::PI * nu as f64 / n, alpha);
        let wv = if root { wv.sqrt() } else { wv };
        if wv != 0.0 {
            lines.push((nu, wv));
        }
    }
    for (k, fv) in f.iter_mut().enumerate() {
        let t = k as f64 - f_len as f64 / 2.0;
        let mut v = 0.0;
        for &(nu, wv) in &lines {
            v += wv * (2.0 * std::f64::consts::PI * nu as f64 * t / f_len as f64).cos();
        }
        *fv = v;
    }
    let dc: f64 = f.iter().sum();
    let scale = spec.m as f64 / dc;
    for fv in f.iter_mut() {
        *fv *= scale;
    }
    f
}

fn bessel_i0(x: f64) -> f64 {
    // power series; converges quickly for the argument range used here
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let q = 0.25 * x * x;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

/// Dolph-Chebyshev taps of length `len` with stopband edge `omega1`:
/// Chebyshev polynomial sampled on the length-`len` bin grid, inverse FFT.
pub fn dolph_chebyshev_taps(len: usize, omega1: f64) -> Result<Vec<f64>> {
    if len < 2 {
        return Err(Error::invalid("dolph-chebyshev needs len >= 2"));
    }
    if !(0.0..std::f64::consts::PI).contains(&omega1) {
        return Err(Error::invalid("dolph-chebyshev needs 0 <= omega1 < pi"));
    }
    let deg = (len - 1) as f64;
    let x0 = (omega1 / 2.0).cos();
    let cheb = |x: f64| -> f64 {
        if x.abs() <= 1.0 {
            (deg * x.acos()).cos()
        } else {
            let t = (deg * x.abs().acosh()).cosh();
            if x < 0.0 && (len - 1) % 2 == 1 {
                -t
            } else {
                t
            }
        }
    };
    let spectrum: Vec<Complex64> = (0..len)
        .map(|nu| {
            let x = (std::f64::consts::PI * nu as f64 / len as f64).cos() / x0;
            let rot =
                Complex64::from_polar(1.0, -deg * std::f64::consts::PI * nu as f64 / len as f64);
            rot * cheb(x)
        })
        .collect();
    let taps = ifft(&spectrum)?;
    let peak = taps.iter().map(|z| z.re.abs()).fold(0.0f64, f64::max);
    Ok(taps.iter().map(|z| z.re / peak).collect())
}

/// Sample a classical window onto the `F = N * M` grid, or reject samplings
/// that cannot meet the bin-grid zero condition.
pub fn catalog_window(kind: &CatalogKind, spec: &WindowSpec) -> Result<CatalogWindow> {
    let f_len = spec.f_len();
    let n = spec.n;
    let m = spec.m;
    let (f, feasibility) = match kind {
        CatalogKind::Rectangle => {
            let c = 1.0 / n as f64;
            (
                vec![c; f_len],
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: n == 1,
                    stopband_decay_order: Some(1),
                },
            )
        }
        CatalogKind::Triangle => {
            if n % 2 != 0 {
                return Err(Error::InfeasibleWindow(format!(
                    "triangle window needs an even length factor so its spectral zeros \
                     land on the bin grid; N = {n} does not sample the support at an \
                     integer multiple of M"
                )));
            }
            let f: Vec<f64> = (0..f_len)
                .map(|k| {
                    let t = 2.0 * k as f64 / f_len as f64 - 1.0;
                    (1.0 - t.abs()) * 2.0 / n as f64
                })
                .collect();
            (
                f,
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: false,
                    stopband_decay_order: Some(2),
                },
            )
        }
        CatalogKind::Parzen => {
            if n % 4 != 0 {
                return Err(Error::InfeasibleWindow(format!(
                    "parzen window needs a length factor divisible by 4; got N = {n}"
                )));
            }
            let f: Vec<f64> = (0..f_len)
                .map(|k| {
                    let t = 4.0 * k as f64 / f_len as f64 - 2.0;
                    let a = t.abs();
                    let v = if a < 1.0 {
                        1.0 - 0.75 * t * t * (2.0 - a)
                    } else if a < 2.0 {
                        0.25 * (2.0 - a).powi(3)
                    } else {
                        0.0
                    };
                    v * 4.0 / (3.0 * n as f64)
                })
                .collect();
            (
                f,
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: false,
                    stopband_decay_order: Some(4),
                },
            )
        }
        CatalogKind::Hamming => {
            if n < 2 {
                return Err(Error::InfeasibleWindow(
                    "hamming window needs N >= 2: with N = 1 its spectral lines fall on \
                     required zero bins"
                        .into(),
                ));
            }
            (
                cosine_series(spec, &[0.54, 0.23]),
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: false,
                    stopband_decay_order: Some(1),
                },
            )
        }
        CatalogKind::Hann => {
            if n < 2 {
                return Err(Error::InfeasibleWindow(
                    "hann window needs N >= 2: with N = 1 its spectral lines fall on \
                     required zero bins"
                        .into(),
                ));
            }
            (
                cosine_series(spec, &[1.0, 0.5]),
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: false,
                    stopband_decay_order: Some(3),
                },
            )
        }
        CatalogKind::Blackman => {
            if n < 3 {
                return Err(Error::InfeasibleWindow(
                    "blackman window needs N >= 3: with fewer, its spectral lines fall \
                     on required zero bins"
                        .into(),
                ));
            }
            (
                cosine_series(spec, &[42.0, 25.0, 4.0]),
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: false,
                    stopband_decay_order: Some(3),
                },
            )
        }
        CatalogKind::Tukey { alpha } => {
            let alpha = *alpha;
            if !(0.0..0.5).contains(&alpha) || alpha == 0.0 {
                return Err(Error::invalid("tukey window needs 0 < alpha < 1/2"));
            }
            // plateau-plus-flank zeros usable only when F(1-alpha) is an
            // integer multiple of M
            let prod = f_len as f64 * (1.0 - alpha);
            let rounded = prod.round();
            if (prod - rounded).abs() > 1e-9 || rounded as usize % m != 0 {
                return Err(Error::InfeasibleWindow(format!(
                    "tukey window with alpha = {alpha} on F = {f_len}: F(1-alpha) must \
                     be an integer multiple of M"
                )));
            }
            let f: Vec<f64> = (0..f_len)
                .map(|k| {
                    let t = k as f64 / f_len as f64 - 0.5;
                    let a = t.abs();
                    if a <= 0.5 - alpha {
                        2.0
                    } else if a < 0.5 {
                        1.0 - (std::f64::consts::PI / (2.0 * alpha) * (1.0 - 2.0 * a)).cos()
                    } else {
                        0.0
                    }
                })
                .collect();
            let dc: f64 = f.iter().sum();
            let scale = m as f64 / dc;
            (
                f.into_iter().map(|v| v * scale).collect(),
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: false,
                    stopband_decay_order: Some(3),
                },
            )
        }
        CatalogKind::CosineRolloff { alpha } => {
            if !(0.0..1.0).contains(alpha) || *alpha == 0.0 {
                return Err(Error::invalid("cosine rolloff needs 0 < alpha < 1"));
            }
            (
                line_spectrum_window(spec, *alpha, false),
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: false,
                    stopband_decay_order: Some(if n % 2 == 0 { 3 } else { 1 }),
                },
            )
        }
        CatalogKind::RootCosineRolloff { alpha } => {
            if !(0.0..1.0).contains(alpha) || *alpha == 0.0 {
                return Err(Error::invalid("root cosine rolloff needs 0 < alpha < 1"));
            }
            (
                line_spectrum_window(spec, *alpha, true),
                Feasibility {
                    meets_zero_condition: true,
                    meets_power_complement: false,
                    stopband_decay_order: Some(1),
                },
            )
        }
        CatalogKind::Kaiser { alpha } => {
            // no sampling of the Kaiser shape puts zeros on the bin grid
            let f: Vec<f64> = (0..f_len)
                .map(|k| {
                    let t = k as f64 / f_len as f64 - 0.5;
                    bessel_i0(alpha * (1.0 - 4.0 * t * t).max(0.0).sqrt())
                })
                .collect();
            let dc: f64 = f.iter().sum();
            let scale = m as f64 / dc;
            (
                f.into_iter().map(|v| v * scale).collect(),
                Feasibility {
                    meets_zero_condition: false,
                    meets_power_complement: false,
                    stopband_decay_order: Some(1),
                },
            )
        }
        CatalogKind::DolphChebyshev { omega1 } => {
            let taps = dolph_chebyshev_taps(f_len, *omega1)?;
            let dc: f64 = taps.iter().sum();
            let scale = m as f64 / dc;
            (
                taps.into_iter().map(|v| v * scale).collect(),
                Feasibility {
                    meets_zero_condition: false,
                    meets_power_complement: false,
                    stopband_decay_order: None,
                },
            )
        }
    };
    Ok(CatalogWindow {
        kind: kind.clone(),
        spec: *spec,
        f,
        feasibility,
    })
}

/// Measured asymptotic stopband decay order: regression slope of
/// log|F(Omega)| against log sin(Omega/2) at the envelope-touch samples
/// (odd multiples of pi/F) inside `[omega_min, omega_max]`, negated.
pub fn measured_decay_order(f: &[f64], omega_min: f64, omega_max: f64) -> f64 {
    let f_len = f.len();
    let pi = std::f64::consts::PI;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut padded: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    padded.resize(2 * f_len, Complex64::new(0.0, 0.0));
    let spec = fft(&padded).expect("finite window");
    // bins of the 2F transform at odd multiples of pi/F
    let mut i = 1usize;
    while i < f_len {
        let omega = pi * i as f64 / f_len as f64;
        if omega >= omega_min && omega <= omega_max {
            xs.push((omega / 2.0).sin().ln());
            ys.push(spec[i].norm().max(1e-300).ln());
        }
        i += 2;
    }
    let nn = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nn;
    let my = ys.iter().sum::<f64>() / nn;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -(sxy / sxx)
}
