//! Measurement results: per-bin records plus campaign metadata, with JSON
//! and plot-ready CSV serialization.

use super::confidence::ConfidenceRegion;
use super::SystemMode;
use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use std::io::Write;

#[derive(Debug, Clone)]
pub struct BinResult {
    pub mu: usize,
    pub h: Complex64,
    pub phi: f64,
    pub psi: Option<Complex64>,
    pub var_h: f64,
    pub cov_h: Option<Complex64>,
    pub var_phi: f64,
    pub var_psi: Option<f64>,
    pub cov_psi: Option<Complex64>,
    /// condition number of the empirical 2x2 excitation covariance
    pub cond: f64,
    /// confidence interval half width for phi
    pub ci_phi: f64,
    pub ci_h: ConfidenceRegion,
    pub ci_psi: Option<ConfidenceRegion>,
}

#[derive(Debug, Clone)]
pub struct MeasurementResult {
    pub m: usize,
    pub l: u32,
    pub alpha: f64,
    pub mode: SystemMode,
    pub psd_only: bool,
    pub window_id: String,
    pub bins: Vec<BinResult>,
    pub warnings: Vec<String>,
    pub short_settling_suspect: bool,
    pub singular_fallbacks: u32,
}

fn c_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl Serialize for BinResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("mu", &self.mu)?;
        map.serialize_entry("H", &c_pair(self.h))?;
        map.serialize_entry("Phi", &self.phi)?;
        if let Some(p) = self.psi {
            map.serialize_entry("Psi", &c_pair(p))?;
        }
        map.serialize_entry("var_H", &self.var_h)?;
        if let Some(c) = self.cov_h {
            map.serialize_entry("cov_H", &c_pair(c))?;
        }
        map.serialize_entry("var_Phi", &self.var_phi)?;
        if let Some(v) = self.var_psi {
            map.serialize_entry("var_Psi", &v)?;
        }
        if let Some(c) = self.cov_psi {
            map.serialize_entry("cov_Psi", &c_pair(c))?;
        }
        map.serialize_entry("cond", &self.cond)?;
        map.serialize_entry(
            "ci",
            &CiView {
                phi_half_width: self.ci_phi,
                h: &self.ci_h,
                psi: self.ci_psi.as_ref(),
            },
        )?;
        map.end()
    }
}

#[derive(Serialize)]
struct CiView<'a> {
    phi_half_width: f64,
    h: &'a ConfidenceRegion,
    #[serde(skip_serializing_if = "Option::is_none")]
    psi: Option<&'a ConfidenceRegion>,
}

#[derive(Serialize)]
struct ResultView<'a> {
    m: usize,
    l: u32,
    alpha: f64,
    mode: SystemMode,
    psd_only: bool,
    window_id: &'a str,
    short_settling_suspect: bool,
    singular_fallbacks: u32,
    warnings: &'a [String],
    bins: &'a [BinResult],
}

impl MeasurementResult {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&ResultView {
            m: self.m,
            l: self.l,
            alpha: self.alpha,
            mode: self.mode,
            psd_only: self.psd_only,
            window_id: &self.window_id,
            short_settling_suspect: self.short_settling_suspect,
            singular_fallbacks: self.singular_fallbacks,
            warnings: &self.warnings,
            bins: &self.bins,
        })
    }

    /// Plot-ready CSV: one row per bin with the dB conventions of the
    /// result plots (20 log10 for |H|, 10 log10 for the spectra).
    pub fn write_csv<W: Write>(&self, mut w: W, figure: &str) -> std::io::Result<()> {
        writeln!(w, "# {figure}")?;
        writeln!(
            w,
            "Omega,mu,H_re,H_im,H_abs_dB,Phi,Phi_dB,Psi_re,Psi_im,var_H,var_Phi,ci_Phi_half_width"
        )?;
        let db20 = |x: f64| {
            if x > 0.0 {
                20.0 * x.log10()
            } else {
                f64::NEG_INFINITY
            }
        };
        let db10 = |x: f64| {
            if x > 0.0 {
                10.0 * x.log10()
            } else {
                f64::NEG_INFINITY
            }
        };
        for b in &self.bins {
            let omega = 2.0 * std::f64::consts::PI * b.mu as f64 / self.m as f64;
            let (psi_re, psi_im) = b.psi.map(|p| (p.re, p.im)).unwrap_or((0.0, 0.0));
            writeln!(
                w,
                "{omega:.12e},{},{:.17e},{:.17e},{:.6},{:.17e},{:.6},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                b.mu,
                b.h.re,
                b.h.im,
                db20(b.h.norm()),
                b.phi,
                db10(b.phi),
                psi_re,
                psi_im,
                b.var_h,
                b.var_phi,
                b.ci_phi,
            )?;
        }
        Ok(())
    }
}

/// Deserialization view of a result file (used by downstream tooling and
/// the round-trip tests).
#[derive(Debug, Deserialize)]
pub struct ResultFile {
    pub m: usize,
    pub l: u32,
    pub alpha: f64,
    pub bins: Vec<serde_json::Value>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_shape() {
        let r = MeasurementResult {
            m: 4,
            l: 10,
            alpha: 0.1,
            mode: SystemMode::Complex,
            psd_only: false,
            window_id: "design-M4-N2".into(),
            bins: vec![BinResult {
                mu: 0,
                h: Complex64::new(1.0, -0.25),
                phi: 1e-3,
                psi: Some(Complex64::new(1e-4, 0.0)),
                var_h: 1e-5,
                cov_h: Some(Complex64::new(0.0, 1e-6)),
                var_phi: 1e-7,
                var_psi: Some(2e-7),
                cov_psi: Some(Complex64::new(0.0, 0.0)),
                cond: 1.5,
                ci_phi: 1e-3,
                ci_h: ConfidenceRegion::Ellipse {
                    a1: Complex64::new(1e-2, 0.0),
                    a2: Complex64::new(0.0, 1e-2),
                },
                ci_psi: None,
            }],
            warnings: vec![],
            short_settling_suspect: false,
            singular_fallbacks: 0,
        };
        let s = r.to_json().unwrap();
        let parsed: ResultFile = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed.m, 4);
        assert_eq!(parsed.l, 10);
        assert_eq!(parsed.bins.len(), 1);
        assert_eq!(parsed.bins[0]["H"][0], 1.0);
        let mut csv = Vec::new();
        r.write_csv(&mut csv, "test figure").unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("# test figure"));
        assert_eq!(text.lines().count(), 3);
    }
}
