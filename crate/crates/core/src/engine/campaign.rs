//! Campaign driver: run the full measurement chain (excite, settle,
//! record, fold, accumulate, estimate) on a simulated device under test,
//! and a Monte-Carlo harness that repeats independent campaigns on worker
//! threads with derived seeds.

use super::accumulator::MeasurementAccumulator;
use super::estimate::{finalize_complex, run_real_variant};
use super::result::MeasurementResult;
use super::{fold_and_dft, SystemMode};
use crate::error::Result;
use crate::signals::{generate, ExcitationPlan, PlanSpec};
use crate::systems::{NoiseSource, SimSystem};
use crate::window::{worker_count, WindowSequence};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub window: WindowSequence,
    /// settling prefix E
    pub settling: usize,
    pub alpha: f64,
    pub mode: SystemMode,
    /// reset device state before every sub-measurement (the quantizer loop
    /// keeps its state by default)
    pub reset_state: bool,
}

impl CampaignConfig {
    pub fn window_id(&self) -> String {
        format!("design-M{}-N{}", self.window.spec.m, self.window.spec.n)
    }
}

/// One full campaign over the plan's sub-measurements.
pub fn run_campaign(
    cfg: &CampaignConfig,
    system: &mut SimSystem,
    noise: Option<&NoiseSource>,
    plan: &ExcitationPlan,
) -> Result<MeasurementResult> {
    let acc = accumulate_campaign(cfg, system, noise, plan)?;
    match cfg.mode {
        SystemMode::Complex => finalize_complex(&acc, cfg.alpha, &cfg.window_id()),
        SystemMode::Real => run_real_variant(&acc, cfg.alpha, &cfg.window_id()),
    }
}

/// The accumulation phase alone (resumable: merge more sub-measurements
/// later).
pub fn accumulate_campaign(
    cfg: &CampaignConfig,
    system: &mut SimSystem,
    noise: Option<&NoiseSource>,
    plan: &ExcitationPlan,
) -> Result<MeasurementAccumulator> {
    let m = cfg.window.spec.m;
    let f_len = cfg.window.f.len();
    let e = cfg.settling;
    let mut acc = MeasurementAccumulator::new(m, cfg.mode, plan.spec.seed);
    for lambda in 0..plan.spec.l as usize {
        if cfg.reset_state && !system.persistent_state {
            system.reset();
        }
        let x = plan.periodic_extend(lambda, e, f_len)?;
        let mut y = system.process(&x);
        if let Some(ns) = noise {
            let block = ns.block(lambda as u64, -(e as i64), e + f_len);
            for (o, n) in y.iter_mut().zip(block) {
                *o += n;
            }
        }
        let record = &y[e..];
        let yspec = fold_and_dft(record, &cfg.window)?;
        acc.accumulate(&plan.spectra[lambda], &yspec)?;
    }
    Ok(acc)
}

/// Output-only campaign: record the noise source (optionally shaped by a
/// system) and estimate its spectra.
pub fn run_psd_campaign(
    cfg: &CampaignConfig,
    system: Option<&mut SimSystem>,
    noise: &NoiseSource,
    l: u32,
) -> Result<MeasurementResult> {
    let f_len = cfg.window.f.len();
    let e = cfg.settling;
    let mut records = Vec::with_capacity(l as usize);
    let mut sys = system;
    for lambda in 0..l as u64 {
        let block = noise.block(lambda, -(e as i64), e + f_len);
        let shaped = match sys.as_deref_mut() {
            Some(s) => {
                if cfg.reset_state && !s.persistent_state {
                    s.reset();
                }
                s.process(&block)
            }
            None => block,
        };
        records.push(shaped[e..].to_vec());
    }
    super::estimate::run_psd_only(
        &records,
        &cfg.window,
        cfg.mode == SystemMode::Real,
        cfg.alpha,
        &cfg.window_id(),
    )
}

/// Monte-Carlo repetition harness: each repetition derives its own plan
/// and noise seeds, campaigns fan out across workers (`RKM_THREADS` caps
/// them), and results come back in repetition order regardless of
/// scheduling.
pub struct MonteCarlo {
    pub cfg: CampaignConfig,
    pub plan_template: PlanSpec,
    pub noise_template: Option<NoiseSource>,
}

impl MonteCarlo {
    /// Run `reps` campaigns of `make_system()` devices; `each` receives
    /// (repetition index, result) in order.
    pub fn run<S, F>(&self, reps: u32, make_system: S, mut each: F) -> Result<()>
    where
        S: Fn() -> SimSystem + Sync,
        F: FnMut(u32, MeasurementResult),
    {
        let workers = worker_count().min(reps.max(1) as usize);
        let mut results: Vec<Option<Result<MeasurementResult>>> = (0..reps).map(|_| None).collect();
        let next = std::sync::atomic::AtomicU32::new(0);
        let slots = std::sync::Mutex::new(&mut results);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let rep = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if rep >= reps {
                        break;
                    }
                    let r = self.run_one(rep, &make_system);
                    let mut guard = slots.lock().unwrap();
                    guard[rep as usize] = Some(r);
                });
            }
        });
        for (i, slot) in results.into_iter().enumerate() {
            each(i as u32, slot.expect("worker filled slot")?);
        }
        Ok(())
    }

    fn run_one<S: Fn() -> SimSystem>(
        &self,
        rep: u32,
        make_system: &S,
    ) -> Result<MeasurementResult> {
        let mut plan_spec = self.plan_template.clone();
        plan_spec.seed = derive_seed(plan_spec.seed, rep);
        let plan = generate(&plan_spec)?;
        let noise = self.noise_template.as_ref().map(|ns| NoiseSource {
            kind: ns.kind.clone(),
            seed: derive_seed(ns.seed, rep),
        });
        let mut system = make_system();
        run_campaign(&self.cfg, &mut system, noise.as_ref(), &plan)
    }
}

pub fn derive_seed(base: u64, rep: u32) -> u64 {
    // splitmix64 step keyed by the repetition index
    let mut z = base ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(rep as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-bin empirical confidence-miss table from repeated campaigns.
#[derive(Debug, Clone)]
pub struct CalibrationTable {
    pub reps: u32,
    /// misses of the PSD confidence interval per bin
    pub phi_misses: Vec<u32>,
    /// misses of the transfer-function confidence region per bin
    pub h_misses: Vec<u32>,
}

impl CalibrationTable {
    pub fn new(bins: usize) -> Self {
        CalibrationTable {
            reps: 0,
            phi_misses: vec![0; bins],
            h_misses: vec![0; bins],
        }
    }

    /// Tally one campaign against the true values.
    pub fn tally(&mut self, result: &MeasurementResult, phi_true: &[f64], h_true: &[Complex64]) {
        self.reps += 1;
        for (i, b) in result.bins.iter().enumerate() {
            if (phi_true[i] - b.phi).abs() > b.ci_phi {
                self.phi_misses[i] += 1;
            }
            if !b.ci_h.covers(b.h, h_true[i]) {
                self.h_misses[i] += 1;
            }
        }
    }

    pub fn phi_miss_rate(&self, bin: usize) -> f64 {
        self.phi_misses[bin] as f64 / self.reps as f64
    }

    pub fn h_miss_rate(&self, bin: usize) -> f64 {
        self.h_misses[bin] as f64 / self.reps as f64
    }
}
