//! Window file format: a JSON object with the geometry, the time sequence
//! as 17-significant-digit decimals (enough to round-trip binary64
//! exactly), the retained spectrum samples, and the verification record.

use super::{verify_window, WindowSequence, WindowSpec, WindowVerification};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt::Write as _;

fn push_f64(out: &mut String, v: f64) {
    // 17 significant digits: 1 leading + 16 after the point
    let _ = write!(out, "{v:.16e}");
}

fn push_f64_array(out: &mut String, vals: impl Iterator<Item = f64>) {
    out.push('[');
    for (i, v) in vals.enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_f64(out, v);
    }
    out.push(']');
}

/// Serialize a window (with its verification) to the window file JSON.
pub fn window_to_json(w: &WindowSequence, v: &WindowVerification) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    let _ = write!(
        s,
        "  \"M\": {},\n  \"N\": {},\n  \"F\": {},\n",
        w.spec.m,
        w.spec.n,
        w.f.len()
    );
    s.push_str("  \"f\": ");
    push_f64_array(&mut s, w.f.iter().copied());
    s.push_str(",\n  \"fourier_coeffs\": [");
    for (i, c) in w.fourier_coeffs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        push_f64(&mut s, c.re);
        s.push(',');
        push_f64(&mut s, c.im);
        s.push(']');
    }
    s.push_str("],\n  \"verification\": {\n    \"acf_grid_errors\": ");
    push_f64_array(&mut s, v.acf_grid_errors.iter().copied());
    s.push_str(",\n    \"eps_2_20_rms\": ");
    push_f64(&mut s, v.eps_2_20_rms);
    s.push_str(",\n    \"zero_grid_errors\": ");
    push_f64_array(&mut s, v.zero_grid_errors.iter().copied());
    let _ = write!(
        s,
        ",\n    \"cepstrum_tail_ok\": {}\n  }}\n}}\n",
        w.cepstrum_tail_ok
    );
    s
}

/// Parse a window file. The verification block is re-derivable, so only
/// the sequence itself is required.
pub fn window_from_json(text: &str) -> Result<WindowSequence> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let m = v["M"]
        .as_u64()
        .ok_or_else(|| Error::invalid("window file: missing M"))? as usize;
    let n = v["N"]
        .as_u64()
        .ok_or_else(|| Error::invalid("window file: missing N"))? as usize;
    let spec = WindowSpec::new(m, n)?;
    let f: Vec<f64> = v["f"]
        .as_array()
        .ok_or_else(|| Error::invalid("window file: missing f"))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| Error::invalid("window file: non-numeric f entry"))
        })
        .collect::<Result<_>>()?;
    if f.len() != spec.f_len() {
        return Err(Error::LengthMismatch {
            what: "window file f length",
            expected: spec.f_len(),
            got: f.len(),
        });
    }
    let coeffs: Vec<Complex64> = v["fourier_coeffs"]
        .as_array()
        .ok_or_else(|| Error::invalid("window file: missing fourier_coeffs"))?
        .iter()
        .map(|pair| {
            let re = pair[0].as_f64();
            let im = pair[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(Error::invalid("window file: bad fourier coefficient")),
            }
        })
        .collect::<Result<_>>()?;
    let tail_ok = v["verification"]["cepstrum_tail_ok"]
        .as_bool()
        .unwrap_or(true);
    Ok(WindowSequence {
        spec,
        f,
        fourier_coeffs: coeffs,
        cepstrum_tail_ok: tail_ok,
    })
}

/// Verification thresholds used by the file-level check: the scale-level
/// bounds every designed window meets.
pub struct VerificationReport {
    pub ok: bool,
    pub failures: Vec<String>,
}

/// Check a (possibly externally produced) window against the conditions
/// the measurement method needs.
pub fn check_window(w: &WindowSequence) -> (WindowVerification, VerificationReport) {
    let v = verify_window(w);
    let mut failures = Vec::new();
    let n = w.spec.n;
    for (i, e) in v.acf_grid_errors.iter().enumerate() {
        let kt = i as i64 - (n as i64 - 1);
        if e.abs() > 1e-14 {
            failures.push(format!(
                "autocorrelation fails the M-th-band (Nyquist) condition at lag {}M: |d - target| = {:.3e}",
                kt,
                e.abs()
            ));
        }
    }
    if v.eps_2_20_rms > 5e-15 {
        failures.push(format!(
            "power-complementarity error rms too large: {:.3e}",
            v.eps_2_20_rms
        ));
    }
    let fmax = w.f.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    let bound = 10.0 * (w.f.len() as f64).sqrt() * crate::numerics::EPS * fmax;
    for (i, e) in v.zero_grid_errors.iter().enumerate() {
        if *e > bound {
            failures.push(format!(
                "spectral zero condition violated at bin {}: |F| = {:.3e} (bound {:.3e})",
                i + 1,
                e,
                bound
            ));
        }
    }
    let ok = failures.is_empty();
    (v, VerificationReport { ok, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::design_window;

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let w = design_window(&WindowSpec::new(16, 3).unwrap()).unwrap();
        let v = verify_window(&w);
        let text = window_to_json(&w, &v);
        let back = window_from_json(&text).unwrap();
        assert_eq!(back.spec, w.spec);
        for (a, b) in w.f.iter().zip(&back.f) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in w.fourier_coeffs.iter().zip(&back.fourier_coeffs) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn perturbed_window_flagged() {
        let w = design_window(&WindowSpec::new(8, 2).unwrap()).unwrap();
        let (_, rep) = check_window(&w);
        assert!(rep.ok);
        let mut bad = w.clone();
        bad.f[3] += 1e-6;
        let (_, rep) = check_window(&bad);
        assert!(!rep.ok);
        assert!(rep.failures.iter().any(|f| f.contains("M-th-band")));
    }
}
