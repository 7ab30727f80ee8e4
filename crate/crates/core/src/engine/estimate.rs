//! Closing-form evaluation of the estimators from the accumulator sums:
//! the per-bin least-squares transfer function, the projection trace forms
//! for the PSD and modified PSD, their variance estimates, and the
//! output-only spectral estimation path.

use super::accumulator::MeasurementAccumulator;
use super::confidence::{check_alpha, ellipse, interval_half_width};
use super::result::{BinResult, MeasurementResult};
use super::{fold_and_dft, SystemMode};
use crate::error::{Error, Result};
use crate::numerics::{dd_add_norm_sqr, CDd, Dd, EPS};
use crate::window::WindowSequence;
use num_complex::Complex64;

/// Basis row identities for the orthogonal-projection quadratic form.
#[derive(Clone, Copy, PartialEq, Debug)]
enum Row {
    /// the excitation sample vector at +mu
    V,
    /// the conjugated excitation sample vector at -mu
    Vc,
    /// deterministic unit-phasor fallback stream
    W(usize),
}

struct BinSums<'a> {
    acc: &'a MeasurementAccumulator,
    mu: usize,
    neg: usize,
}

impl<'a> BinSums<'a> {
    fn new(acc: &'a MeasurementAccumulator, mu: usize) -> Self {
        let m = acc.m();
        BinSums {
            acc,
            mu,
            neg: (m - mu) % m,
        }
    }

    /// Gram entry `sum_lambda r_i[lambda] conj(r_j[lambda])`.
    fn gram(&self, i: Row, j: Row) -> CDd {
        let a = self.acc;
        match (i, j) {
            (Row::V, Row::V) => CDd {
                re: a.s_vv[self.mu],
                im: Dd::ZERO,
            },
            (Row::Vc, Row::Vc) => CDd {
                re: a.s_vv[self.neg],
                im: Dd::ZERO,
            },
            (Row::V, Row::Vc) => a.s_vv_nc[self.mu],
            (Row::Vc, Row::V) => a.s_vv_nc[self.mu].conj(),
            (Row::V, Row::W(k)) => a.s_vw[k][self.mu],
            (Row::W(k), Row::V) => a.s_vw[k][self.mu].conj(),
            (Row::Vc, Row::W(k)) => a.s_vw_nc[k][self.neg].conj(),
            (Row::W(k), Row::Vc) => a.s_vw_nc[k][self.neg],
            (Row::W(k), Row::W(l)) if k == l => CDd {
                re: a.s_ww[k],
                im: Dd::ZERO,
            },
            (Row::W(0), Row::W(1)) => a.s_w1w2,
            (Row::W(1), Row::W(0)) => a.s_w1w2.conj(),
            _ => unreachable!(),
        }
    }

    /// `sum_lambda Y(mu) conj(r[lambda])`.
    fn row_y(&self, r: Row) -> CDd {
        let a = self.acc;
        match r {
            Row::V => a.s_yv[self.mu],
            Row::Vc => a.s_yv_nc[self.mu],
            Row::W(k) => a.s_yw[k][self.mu],
        }
    }

    /// `sum_lambda r[lambda] Y(-mu)` (plain product).
    fn col_y_neg(&self, r: Row) -> CDd {
        let a = self.acc;
        match r {
            Row::V => a.s_yv_nc[self.neg],
            // conj(V(-mu)) Y(-mu) summed is exactly C_{Y,V} at the bin -mu
            Row::Vc => a.s_yv[self.neg],
            Row::W(k) => a.s_wy_nc[k][self.neg],
        }
    }
}

struct Gram2 {
    g11: Dd,
    g22: Dd,
    g12: CDd,
    det: Dd,
}

fn gram2(sums: &BinSums, basis: (Row, Row)) -> Gram2 {
    let g11 = sums.gram(basis.0, basis.0).re;
    let g22 = sums.gram(basis.1, basis.1).re;
    let g12 = sums.gram(basis.0, basis.1);
    let det = g11.mul(g22).sub(g12.norm_sqr());
    Gram2 { g11, g22, g12, det }
}

fn is_singular(g: &Gram2) -> bool {
    let prod = g.g11.value() * g.g22.value();
    g.det.value().abs() <= 1e6 * EPS * EPS * prod || prod == 0.0
}

/// `row * G^{-1} * col` for the 2x2 Hermitian gram.
fn quad_form(g: &Gram2, row: (CDd, CDd), col: (CDd, CDd)) -> CDd {
    // G^{-1} = 1/det [[g22, -g12], [-conj(g12), g11]]
    let t0 = row.0.mul(col.0.mul_dd(g.g22).sub(g.g12.mul(col.1)));
    let t1 = row.1.mul(col.1.mul_dd(g.g11).sub(g.g12.conj().mul(col.0)));
    let num = t0.add(t1);
    CDd {
        re: num.re.div(g.det),
        im: num.im.div(g.det),
    }
}

struct Projection {
    phi: f64,
    psi: Complex64,
    cond: f64,
    fallback: bool,
}

/// Build the 2x2 empirical covariance of the excitation pair, invert it and
/// evaluate the closing quadratic forms, entirely from accumulator sums.
/// A singular pair falls back to the deterministic phasor streams.
fn projection_traceform(acc: &MeasurementAccumulator, mu: usize, trace: u32) -> Projection {
    let sums = BinSums::new(acc, mu);
    let m = acc.m() as f64;
    let l = acc.l() as f64;

    // condition number of the primary pair, reported regardless of fallback
    let gp = gram2(&sums, (Row::V, Row::Vc));
    let cond = {
        let t = 0.5 * (gp.g11.value() + gp.g22.value()) / l;
        let det = gp.det.value() / (l * l);
        let disc = (t * t - det).max(0.0).sqrt();
        let lo = t - disc;
        if lo > 0.0 {
            (t + disc) / lo
        } else {
            f64::INFINITY
        }
    };

    let mut basis = (Row::V, Row::Vc);
    let mut g = gp;
    let mut fallback = false;
    if is_singular(&g) {
        fallback = true;
        basis = (Row::V, Row::W(0));
        g = gram2(&sums, basis);
        if is_singular(&g) {
            basis = (Row::W(0), Row::W(1));
            g = gram2(&sums, basis);
        }
    }

    let row = (sums.row_y(basis.0), sums.row_y(basis.1));
    let col_phi = (row.0.conj(), row.1.conj());
    let q_phi = quad_form(&g, row, col_phi);
    let phi_dd = CDd {
        re: acc.s_yy[mu],
        im: Dd::ZERO,
    }
    .sub(q_phi);
    let denom = m * (trace as f64);
    let phi = (phi_dd.re.value() / denom).max(0.0);

    let col_psi = (sums.col_y_neg(basis.0), sums.col_y_neg(basis.1));
    let q_psi = quad_form(&g, row, col_psi);
    let psi_dd = acc.s_yy_nc[mu].sub(q_psi);
    let psi = psi_dd.value() / denom;

    Projection {
        phi,
        psi,
        cond,
        fallback,
    }
}

fn estimate_h_bin(acc: &MeasurementAccumulator, mu: usize) -> Complex64 {
    let svv = acc.s_vv[mu];
    if svv.value() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let syv = acc.s_yv[mu];
    Complex64::new(syv.re.div(svv).value(), syv.im.div(svv).value())
}

fn special_bins(m: usize) -> Vec<usize> {
    if m % 2 == 0 {
        vec![0, m / 2]
    } else {
        vec![0]
    }
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Full complex-mode results: estimates, variance estimates and confidence
/// regions for every bin.
pub fn finalize_complex(
    acc: &MeasurementAccumulator,
    alpha: f64,
    window_id: &str,
) -> Result<MeasurementResult> {
    check_alpha(alpha)?;
    if acc.mode() != SystemMode::Complex {
        return Err(Error::invalid("accumulator is not in complex mode"));
    }
    let l = acc.l();
    if l < 4 {
        return Err(Error::TooFewSubMeasurements { min: 4, have: l });
    }
    let m = acc.m();
    let lf = l as f64;
    let specials = special_bins(m);
    let mut warnings = Vec::new();
    if m % 2 != 0 {
        warnings.push(
            "odd M: the two bins adjacent to the half-sampling frequency use the generic \
             variance formulas, which degrade there"
                .to_string(),
        );
    }

    let mut proj = Vec::with_capacity(m);
    for mu in 0..m {
        proj.push(projection_traceform(acc, mu, l - 2));
    }
    let fallbacks = proj.iter().filter(|p| p.fallback).count() as u32;
    if fallbacks > 0 {
        warnings.push(format!(
            "{fallbacks} bin(s) had a singular excitation pair; deterministic phasor \
             rows were substituted"
        ));
    }

    let mut bins = Vec::with_capacity(m);
    for mu in 0..m {
        let h = estimate_h_bin(acc, mu);
        let phi = proj[mu].phi;
        let phi_neg = proj[(m - mu) % m].phi;
        let psi = proj[mu].psi;
        let c_vv = acc.s_vv[mu].value() / lf;
        let var_h = if c_vv > 0.0 {
            m as f64 / lf * phi / c_vv
        } else {
            0.0
        };
        let is_special = specials.contains(&mu);
        let cov_h = if is_special && c_vv > 0.0 {
            let c_cross = acc.s_vv_nc[mu].value() / lf;
            Some(m as f64 / lf * c_cross.conj() / (c_vv * c_vv) * psi)
        } else {
            None
        };
        let (var_phi, var_psi, cov_psi) = if is_special {
            (
                (lf - 4.0) / (lf * (lf - 3.0)) * phi * phi
                    + (lf - 2.0) / (lf * (lf - 3.0)) * psi.norm_sqr(),
                2.0 * (lf - 2.0) / (lf * (lf - 3.0)) * phi * phi
                    - 2.0 / (lf * (lf - 3.0)) * psi.norm_sqr(),
                2.0 / lf * psi * psi,
            )
        } else {
            (
                phi * phi / (lf - 1.0),
                (lf - 2.0) / ((lf - 1.0) * (lf - 3.0)) * phi_neg * phi
                    - psi.norm_sqr() / ((lf - 1.0) * (lf - 3.0)),
                psi * psi / (lf - 1.0),
            )
        };
        let ci_phi = interval_half_width(var_phi, alpha)?;
        let ci_h = ellipse(var_h, cov_h, alpha);
        let ci_psi = ellipse(var_psi.max(0.0), Some(cov_psi), alpha);
        bins.push(BinResult {
            mu,
            h,
            phi,
            psi: Some(psi),
            var_h,
            cov_h,
            var_phi,
            var_psi: Some(var_psi),
            cov_psi: Some(cov_psi),
            cond: proj[mu].cond,
            ci_phi,
            ci_h,
            ci_psi: Some(ci_psi),
        });
    }

    let mean_out = (0..m).map(|mu| acc.s_yy[mu].value()).sum::<f64>() / (m as f64 * lf * m as f64);
    let short_settling_suspect = settling_heuristic(&bins, mean_out);
    Ok(MeasurementResult {
        m,
        l,
        alpha,
        mode: SystemMode::Complex,
        psd_only: false,
        window_id: window_id.to_string(),
        bins,
        warnings,
        short_settling_suspect,
        singular_fallbacks: fallbacks,
    })
}

/// Rule of thumb for a too-short settling prefix: residual PSD shaped like
/// the squared transfer magnitude. The machine-noise floor of a noiseless
/// campaign also scales with the output level, so the correlation only
/// counts when the residual sits meaningfully above that floor.
fn settling_heuristic(bins: &[BinResult], mean_output_power: f64) -> bool {
    let phi: Vec<f64> = bins.iter().map(|b| b.phi).collect();
    let h2: Vec<f64> = bins.iter().map(|b| b.h.norm_sqr()).collect();
    let resid = phi.iter().sum::<f64>() / phi.len() as f64;
    resid > 1e-20 * mean_output_power && pearson(&phi, &h2) > 0.9
}

/// Real-system variant: conjugate-symmetric data, single-row projector
/// with trace L-1, results on the half grid `mu = 0 .. M/2`.
pub fn run_real_variant(
    acc: &MeasurementAccumulator,
    alpha: f64,
    window_id: &str,
) -> Result<MeasurementResult> {
    check_alpha(alpha)?;
    if acc.mode() != SystemMode::Real {
        return Err(Error::invalid("accumulator is not in real mode"));
    }
    let l = acc.l();
    if l < 2 {
        return Err(Error::TooFewSubMeasurements { min: 2, have: l });
    }
    let m = acc.m();
    if m % 2 != 0 {
        return Err(Error::invalid("real variant needs even M"));
    }
    let lf = l as f64;
    let denom = m as f64 * (lf - 1.0);
    let mut fallbacks = 0u32;
    let mut bins = Vec::with_capacity(m / 2 + 1);
    for mu in 0..=m / 2 {
        let h = estimate_h_bin(acc, mu);
        let svv = acc.s_vv[mu];
        let (num, var_h) = if svv.value() > 0.0 {
            let q = acc.s_yv[mu].norm_sqr().div(svv);
            // var_H = (M/L) Phi / c_vv = num / ((L-1) S_vv)
            (
                acc.s_yy[mu].sub(q).value(),
                ((acc.s_yy[mu].sub(q)).div(svv).value() / (lf - 1.0)).max(0.0),
            )
        } else {
            // zero excitation row: substitute the first phasor stream
            fallbacks += 1;
            let q = acc.s_yw[0][mu].norm_sqr().div(acc.s_ww[0]);
            (acc.s_yy[mu].sub(q).value(), 0.0)
        };
        let phi = (num / denom).max(0.0);
        let is_special = mu == 0 || mu == m / 2;
        let var_phi = if is_special {
            2.0 / (lf + 1.0) * phi * phi
        } else {
            phi * phi / lf
        };
        let ci_phi = interval_half_width(var_phi, alpha)?;
        let ci_h = if is_special {
            super::ConfidenceRegion::Interval {
                half_width: interval_half_width(var_h, alpha)?,
            }
        } else {
            ellipse(var_h, None, alpha)
        };
        bins.push(BinResult {
            mu,
            h,
            phi,
            psi: None,
            var_h,
            cov_h: None,
            var_phi,
            var_psi: None,
            cov_psi: None,
            cond: 1.0,
            ci_phi,
            ci_h,
            ci_psi: None,
        });
    }
    let mut warnings = Vec::new();
    if fallbacks > 0 {
        warnings.push(format!("{fallbacks} bin(s) had zero excitation power"));
    }
    let mean_out = (0..m).map(|mu| acc.s_yy[mu].value()).sum::<f64>() / (m as f64 * lf * m as f64);
    let short_settling_suspect = settling_heuristic(&bins, mean_out);
    Ok(MeasurementResult {
        m,
        l,
        alpha,
        mode: SystemMode::Real,
        psd_only: false,
        window_id: window_id.to_string(),
        bins,
        warnings,
        short_settling_suspect,
        singular_fallbacks: fallbacks,
    })
}

/// Output-only spectral estimation: no excitation, the records are
/// windowed, folded and accumulated directly.
pub fn run_psd_only(
    records: &[Vec<Complex64>],
    window: &WindowSequence,
    real_mode: bool,
    alpha: f64,
    window_id: &str,
) -> Result<MeasurementResult> {
    check_alpha(alpha)?;
    let l = records.len() as u32;
    if l < 1 {
        return Err(Error::TooFewSubMeasurements { min: 1, have: 0 });
    }
    let m = window.spec.m;
    let mut s_yy = vec![Dd::ZERO; m];
    let mut s_yy_nc = vec![CDd::ZERO; m];
    for rec in records {
        let y = fold_and_dft(rec, window)?;
        for mu in 0..m {
            let neg = (m - mu) % m;
            s_yy[mu] = dd_add_norm_sqr(s_yy[mu], y[mu]);
            s_yy_nc[mu] = s_yy_nc[mu].add_prod(y[mu], y[neg]);
        }
    }
    let lf = l as f64;
    let have_var = l >= 2;
    let mut warnings = Vec::new();
    if !have_var {
        warnings.push("variance estimates need L >= 2; reported as zero".to_string());
    }
    let phi_at = |mu: usize| -> f64 { (s_yy[mu].value() / (m as f64 * lf)).max(0.0) };
    let upper = if real_mode { m / 2 } else { m - 1 };
    if real_mode && m % 2 != 0 {
        return Err(Error::invalid("real-mode spectral estimation needs even M"));
    }
    let mut bins = Vec::with_capacity(upper + 1);
    for mu in 0..=upper {
        let phi = phi_at(mu);
        let phi_neg = phi_at((m - mu) % m);
        let psi = s_yy_nc[mu].value() / (m as f64 * lf);
        let is_special = mu == 0 || (m % 2 == 0 && mu == m / 2);
        let (var_phi, var_psi, cov_psi) = if !have_var {
            (0.0, 0.0, Complex64::new(0.0, 0.0))
        } else if real_mode {
            let v = if is_special {
                2.0 / (lf + 2.0) * phi * phi
            } else {
                phi * phi / (lf + 1.0)
            };
            (v, 0.0, Complex64::new(0.0, 0.0))
        } else if is_special {
            (
                (lf - 2.0) / ((lf + 2.0) * (lf - 1.0)) * phi * phi
                    + lf / ((lf + 2.0) * (lf - 1.0)) * psi.norm_sqr(),
                2.0 * lf / ((lf + 2.0) * (lf - 1.0)) * phi * phi
                    - 2.0 / ((lf + 2.0) * (lf - 1.0)) * psi.norm_sqr(),
                2.0 / (lf + 2.0) * psi * psi,
            )
        } else {
            (
                phi * phi / (lf + 1.0),
                lf / ((lf + 1.0) * (lf - 1.0)) * phi_neg * phi
                    - psi.norm_sqr() / ((lf + 1.0) * (lf - 1.0)),
                psi * psi / (lf + 1.0),
            )
        };
        let ci_phi = interval_half_width(var_phi, alpha)?;
        let (psi_out, var_psi_out, cov_psi_out, ci_psi) = if real_mode {
            (None, None, None, None)
        } else {
            (
                Some(psi),
                Some(var_psi),
                Some(cov_psi),
                Some(ellipse(var_psi.max(0.0), Some(cov_psi), alpha)),
            )
        };
        bins.push(BinResult {
            mu,
            h: Complex64::new(0.0, 0.0),
            phi,
            psi: psi_out,
            var_h: 0.0,
            cov_h: None,
            var_phi,
            var_psi: var_psi_out,
            cov_psi: cov_psi_out,
            cond: 1.0,
            ci_phi,
            ci_h: ellipse(0.0, None, alpha),
            ci_psi,
        });
    }
    Ok(MeasurementResult {
        m,
        l,
        alpha,
        mode: if real_mode {
            SystemMode::Real
        } else {
            SystemMode::Complex
        },
        psd_only: true,
        window_id: window_id.to_string(),
        bins,
        warnings,
        short_settling_suspect: false,
        singular_fallbacks: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_c(rng: &mut ChaCha12Rng) -> Complex64 {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    }

    /// Explicit projector oracle for the closing forms: build the L x L
    /// projection matrix from the sample matrix and apply it.
    fn explicit_projection(
        v: &[Vec<Complex64>],
        y: &[Vec<Complex64>],
        mu: usize,
        m: usize,
    ) -> (f64, Complex64) {
        let l = v.len();
        let neg = (m - mu) % m;
        let r1: Vec<Complex64> = v.iter().map(|s| s[mu]).collect();
        let r2: Vec<Complex64> = v.iter().map(|s| s[neg].conj()).collect();
        // gram
        let g11: Complex64 = r1.iter().map(|a| a * a.conj()).sum();
        let g22: Complex64 = r2.iter().map(|a| a * a.conj()).sum();
        let g12: Complex64 = r1.iter().zip(&r2).map(|(a, b)| a * b.conj()).sum();
        let det = g11 * g22 - g12 * g12.conj();
        // P = I - R^H G^{-1} R with R rows r1, r2 (unnormalized sums)
        let mut p = vec![vec![Complex64::new(0.0, 0.0); l]; l];
        for i in 0..l {
            for j in 0..l {
                let e = if i == j { 1.0 } else { 0.0 };
                // [r1_i*, r2_i*] G^{-1} [r1_j; r2_j]
                let gi = [
                    (g22 * r1[j] - g12 * r2[j]) / det,
                    (g11 * r2[j] - g12.conj() * r1[j]) / det,
                ];
                p[i][j] = Complex64::new(e, 0.0) - (r1[i].conj() * gi[0] + r2[i].conj() * gi[1]);
            }
        }
        let ymu: Vec<Complex64> = y.iter().map(|s| s[mu]).collect();
        let yneg: Vec<Complex64> = y.iter().map(|s| s[neg]).collect();
        let mut phi = Complex64::new(0.0, 0.0);
        let mut psi = Complex64::new(0.0, 0.0);
        for i in 0..l {
            for j in 0..l {
                phi += ymu[i] * p[i][j] * ymu[j].conj();
                psi += ymu[i] * p[i][j] * yneg[j];
            }
        }
        let denom = m as f64 * (l as f64 - 2.0);
        (phi.re / denom, psi / denom)
    }

    #[test]
    fn traceform_matches_explicit_projector() {
        let m = 4usize;
        let l = 6usize;
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let v: Vec<Vec<Complex64>> = (0..l)
            .map(|_| (0..m).map(|_| random_c(&mut rng)).collect())
            .collect();
        let y: Vec<Vec<Complex64>> = (0..l)
            .map(|_| (0..m).map(|_| random_c(&mut rng)).collect())
            .collect();
        let mut acc = MeasurementAccumulator::new(m, SystemMode::Complex, 5);
        for (vs, ys) in v.iter().zip(&y) {
            acc.accumulate(vs, ys).unwrap();
        }
        for mu in 0..m {
            let p = projection_traceform(&acc, mu, acc.l() - 2);
            let (phi_o, psi_o) = explicit_projection(&v, &y, mu, m);
            assert!(
                (p.phi - phi_o).abs() <= 16.0 * EPS * phi_o.abs().max(1e-3),
                "mu={mu}: {} vs {phi_o}",
                p.phi
            );
            assert!(
                (p.psi - psi_o).norm() <= 16.0 * EPS * psi_o.norm().max(1e-3),
                "mu={mu}: {:?} vs {psi_o:?}",
                p.psi
            );
            assert!(!p.fallback);
        }
    }

    #[test]
    fn h_of_zero_output_is_zero() {
        let m = 4;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut acc = MeasurementAccumulator::new(m, SystemMode::Complex, 1);
        for _ in 0..5 {
            let v: Vec<Complex64> = (0..m).map(|_| random_c(&mut rng)).collect();
            let y = vec![Complex64::new(0.0, 0.0); m];
            acc.accumulate(&v, &y).unwrap();
        }
        for mu in 0..m {
            assert_eq!(estimate_h_bin(&acc, mu), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn h_matches_normal_equation_oracle() {
        let m = 4usize;
        let l = 8usize;
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let v: Vec<Vec<Complex64>> = (0..l)
            .map(|_| (0..m).map(|_| random_c(&mut rng)).collect())
            .collect();
        let y: Vec<Vec<Complex64>> = (0..l)
            .map(|_| (0..m).map(|_| random_c(&mut rng)).collect())
            .collect();
        let mut acc = MeasurementAccumulator::new(m, SystemMode::Complex, 5);
        for (vs, ys) in v.iter().zip(&y) {
            acc.accumulate(vs, ys).unwrap();
        }
        for mu in 0..m {
            let num: Complex64 = v
                .iter()
                .zip(&y)
                .map(|(vs, ys)| ys[mu] * vs[mu].conj())
                .sum();
            let den: f64 = v.iter().map(|vs| vs[mu].norm_sqr()).sum();
            let want = num / den;
            let got = estimate_h_bin(&acc, mu);
            assert!((got - want).norm() <= 8.0 * EPS * want.norm());
        }
    }

    #[test]
    fn scaling_equivariance() {
        let m = 4usize;
        let l = 6usize;
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let v: Vec<Vec<Complex64>> = (0..l)
            .map(|_| (0..m).map(|_| random_c(&mut rng)).collect())
            .collect();
        let y: Vec<Vec<Complex64>> = (0..l)
            .map(|_| (0..m).map(|_| random_c(&mut rng)).collect())
            .collect();
        let a = Complex64::new(1.7, -0.9);
        let mut acc1 = MeasurementAccumulator::new(m, SystemMode::Complex, 5);
        let mut acc2 = MeasurementAccumulator::new(m, SystemMode::Complex, 5);
        let mut acc3 = MeasurementAccumulator::new(m, SystemMode::Complex, 5);
        for (vs, ys) in v.iter().zip(&y) {
            let vs_a: Vec<Complex64> = vs.iter().map(|z| a * z).collect();
            let ys_a: Vec<Complex64> = ys.iter().map(|z| a * z).collect();
            acc1.accumulate(vs, ys).unwrap();
            acc2.accumulate(&vs_a, &ys_a).unwrap(); // both scaled: H invariant
            acc3.accumulate(&vs_a, ys).unwrap(); // V scaled: H -> H/a
        }
        for mu in 0..m {
            let h1 = estimate_h_bin(&acc1, mu);
            let h2 = estimate_h_bin(&acc2, mu);
            let h3 = estimate_h_bin(&acc3, mu);
            assert!((h1 - h2).norm() <= 1e-12 * h1.norm());
            assert!((h3 - h1 / a).norm() <= 1e-12 * h1.norm());
        }
    }

    #[test]
    fn psi_inequality_holds_by_construction() {
        let m = 6usize;
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..50 {
            let l = rng.gen_range(5..12);
            let mut acc = MeasurementAccumulator::new(m, SystemMode::Complex, 9);
            for _ in 0..l {
                let v: Vec<Complex64> = (0..m).map(|_| random_c(&mut rng)).collect();
                let y: Vec<Complex64> = (0..m).map(|_| random_c(&mut rng)).collect();
                acc.accumulate(&v, &y).unwrap();
            }
            for mu in 0..m {
                let p = projection_traceform(&acc, mu, acc.l() - 2);
                let pn = projection_traceform(&acc, (m - mu) % m, acc.l() - 2);
                assert!(
                    p.psi.norm_sqr() <= p.phi * pn.phi * (1.0 + 8.0 * EPS),
                    "mu={mu}"
                );
            }
        }
    }

    #[test]
    fn too_few_submeasurements_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mut acc = MeasurementAccumulator::new(4, SystemMode::Complex, 0);
        for _ in 0..3 {
            let v: Vec<Complex64> = (0..4).map(|_| random_c(&mut rng)).collect();
            let y: Vec<Complex64> = (0..4).map(|_| random_c(&mut rng)).collect();
            acc.accumulate(&v, &y).unwrap();
        }
        assert!(matches!(
            finalize_complex(&acc, 0.1, "w"),
            Err(Error::TooFewSubMeasurements { min: 4, .. })
        ));
    }

    #[test]
    fn real_variant_matches_single_row_projector_oracle() {
        let m = 4usize;
        let l = 6usize;
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        // conjugate-symmetric spectra from real signals
        let mk = |rng: &mut ChaCha12Rng| -> Vec<Complex64> {
            let t: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, 0.0))
                .collect();
            crate::numerics::fft(&t).unwrap()
        };
        let v: Vec<Vec<Complex64>> = (0..l).map(|_| mk(&mut rng)).collect();
        let y: Vec<Vec<Complex64>> = (0..l).map(|_| mk(&mut rng)).collect();
        let mut acc = MeasurementAccumulator::new(m, SystemMode::Real, 5);
        for (vs, ys) in v.iter().zip(&y) {
            acc.accumulate(vs, ys).unwrap();
        }
        let res = run_real_variant(&acc, 0.1, "w").unwrap();
        for mu in 0..=m / 2 {
            // oracle: Phi = (|Y|^2 - |Y V^H|^2 / |V|^2) / (M (L-1))
            let yv: Complex64 = v
                .iter()
                .zip(&y)
                .map(|(vs, ys)| ys[mu] * vs[mu].conj())
                .sum();
            let vv: f64 = v.iter().map(|vs| vs[mu].norm_sqr()).sum();
            let yy: f64 = y.iter().map(|ys| ys[mu].norm_sqr()).sum();
            let want = (yy - yv.norm_sqr() / vv) / (m as f64 * (l as f64 - 1.0));
            let got = res.bins[mu].phi;
            assert!(
                (got - want).abs() <= 16.0 * EPS * want.abs().max(1e-3),
                "mu={mu}: {got} vs {want}"
            );
        }
        // variance formula spot checks
        let b0 = &res.bins[0];
        assert!((b0.var_phi - 2.0 / (l as f64 + 1.0) * b0.phi * b0.phi).abs() < 1e-18);
        let b1 = &res.bins[1];
        assert!((b1.var_phi - b1.phi * b1.phi / l as f64).abs() < 1e-18);
    }

    #[test]
    fn real_variant_rejects_asymmetric_spectra() {
        let m = 4;
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mut acc = MeasurementAccumulator::new(m, SystemMode::Real, 5);
        let v: Vec<Complex64> = (0..m).map(|_| random_c(&mut rng)).collect();
        let y: Vec<Complex64> = (0..m).map(|_| random_c(&mut rng)).collect();
        assert!(acc.accumulate(&v, &y).is_err());
    }
}
