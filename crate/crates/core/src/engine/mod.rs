//! The measurement core: windowed folding and DFT of output records,
//! streaming accumulation of the empirical (co)variances over the
//! sub-measurements, the estimators for the transfer function, the PSD and
//! the modified PSD of the residual, their variance estimates and
//! confidence regions.

mod accumulator;
mod campaign;
mod confidence;
mod estimate;
mod result;

pub use accumulator::MeasurementAccumulator;
pub use campaign::{run_campaign, run_psd_campaign, CalibrationTable, CampaignConfig, MonteCarlo};
pub use confidence::ConfidenceRegion;
pub use estimate::{finalize_complex, run_psd_only, run_real_variant};
pub use result::{BinResult, MeasurementResult, ResultFile};

use crate::error::{Error, Result};
use crate::numerics::fft_in_place;
use crate::window::WindowSequence;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemMode {
    Complex,
    Real,
}

/// Weight the record with the window, partition it into N blocks of length
/// M, add the blocks, and take the length-M DFT.
pub fn fold_and_dft(record: &[Complex64], window: &WindowSequence) -> Result<Vec<Complex64>> {
    let f_len = window.f.len();
    if record.len() != f_len {
        return Err(Error::LengthMismatch {
            what: "output record vs window length",
            expected: f_len,
            got: record.len(),
        });
    }
    let m = window.spec.m;
    let mut folded = vec![Complex64::new(0.0, 0.0); m];
    for (k, (&w, &x)) in window.f.iter().zip(record).enumerate() {
        folded[k % m] += w * x;
    }
    fft_in_place(&mut folded);
    Ok(folded)
}
