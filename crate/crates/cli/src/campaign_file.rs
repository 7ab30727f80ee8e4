//! Campaign file: one JSON object tying together the measurement
//! configuration, the device under test, the disturbance, and the
//! excitation plan.

use rkm_core::engine::SystemMode;
use rkm_core::signals::PlanKind;
use rkm_core::systems::{NoiseKind, SystemKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSpec {
    /// number of measured bins
    pub m: usize,
    /// window length factor of the designed window (1 = rectangle)
    pub n: usize,
    /// settling prefix E in samples
    #[serde(default)]
    pub settling: usize,
    /// sub-measurement count L
    pub l: u32,
    /// confidence miss probability
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_mode")]
    pub mode: SystemMode,
    /// measure only the output spectra (no excitation)
    #[serde(default)]
    pub psd_only: bool,
    pub seed: u64,
    /// device under test; identity when absent
    #[serde(default)]
    pub system: Option<SystemKind>,
    /// keep device state across sub-measurements (quantizer loops do this
    /// regardless)
    #[serde(default)]
    pub keep_state: bool,
    #[serde(default)]
    pub noise: Option<NoiseKind>,
    /// excitation kind; required unless psd_only
    #[serde(default)]
    pub excitation: Option<PlanKind>,
    /// repetition count for calibration runs
    #[serde(default)]
    pub repetitions: Option<u32>,
}

fn default_alpha() -> f64 {
    0.1
}

fn default_mode() -> SystemMode {
    SystemMode::Complex
}
