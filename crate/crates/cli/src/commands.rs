//! Command implementations.

use crate::campaign_file::CampaignSpec;
use crate::SignalCommand;
use num_complex::Complex64;
use rkm_core::engine::{
    run_campaign, run_psd_campaign, CalibrationTable, CampaignConfig, MeasurementResult,
    MonteCarlo, SystemMode,
};
use rkm_core::error::{Error, Result};
use rkm_core::signals::{generate, ChirpParams, ExcitationPlan, PlanSpec};
use rkm_core::systems::{self, NoiseSource};
use rkm_core::window::catalog::{catalog_window, CatalogKind};
use rkm_core::window::io::{check_window, window_from_json, window_to_json};
use rkm_core::window::{design_window, WindowSequence, WindowSpec};
use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

pub fn window_design(m: usize, n: usize, out: &Path) -> Result<ExitCode> {
    let spec = WindowSpec::new(m, n)?;
    if n > 256 {
        eprintln!(
            "warning: the warp parameter and FFT-length rules are only spot-checked \
             up to N = 256; inspect the verification block closely"
        );
    }
    let w = design_window(&spec)?;
    if !w.cepstrum_tail_ok {
        eprintln!(
            "warning: cepstrum tail above the precision floor; a longer internal FFT \
             would improve the phase accuracy"
        );
    }
    let (verification, report) = check_window(&w);
    std::fs::write(out, window_to_json(&w, &verification))?;
    println!(
        "wrote {} (M={m}, N={n}, F={}, rms complementarity error {:.3e})",
        out.display(),
        w.f.len(),
        verification.eps_2_20_rms
    );
    if report.ok {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &report.failures {
            eprintln!("verification failure: {f}");
        }
        Ok(ExitCode::FAILURE)
    }
}

pub fn window_verify(file: &Path) -> Result<ExitCode> {
    let w = window_from_json(&std::fs::read_to_string(file)?)?;
    let (verification, report) = check_window(&w);
    println!(
        "M={} N={} F={}: rms complementarity error {:.3e}, worst bin-grid |F| {:.3e}",
        w.spec.m,
        w.spec.n,
        w.f.len(),
        verification.eps_2_20_rms,
        verification
            .zero_grid_errors
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
    );
    if report.ok {
        println!("window verification: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &report.failures {
            eprintln!("verification failure: {f}");
        }
        Ok(ExitCode::FAILURE)
    }
}

pub fn window_catalog(
    m: usize,
    n: usize,
    kind: &str,
    alpha: Option<f64>,
    omega1: Option<f64>,
    out: &Path,
) -> Result<ExitCode> {
    let spec = WindowSpec::new(m, n)?;
    let kind = match kind {
        "rectangle" => CatalogKind::Rectangle,
        "triangle" => CatalogKind::Triangle,
        "parzen" => CatalogKind::Parzen,
        "hamming" => CatalogKind::Hamming,
        "hann" => CatalogKind::Hann,
        "blackman" => CatalogKind::Blackman,
        "tukey" => CatalogKind::Tukey {
            alpha: alpha.ok_or_else(|| Error::invalid("tukey needs --alpha"))?,
        },
        "cosine-rolloff" => CatalogKind::CosineRolloff {
            alpha: alpha.ok_or_else(|| Error::invalid("cosine-rolloff needs --alpha"))?,
        },
        "root-cosine-rolloff" => CatalogKind::RootCosineRolloff {
            alpha: alpha.ok_or_else(|| Error::invalid("root-cosine-rolloff needs --alpha"))?,
        },
        "kaiser" => CatalogKind::Kaiser {
            alpha: alpha.unwrap_or(12.0),
        },
        "dolph-chebyshev" => CatalogKind::DolphChebyshev {
            omega1: omega1.unwrap_or(std::f64::consts::PI / 6.0),
        },
        other => return Err(Error::invalid(format!("unknown catalog kind '{other}'"))),
    };
    let w = catalog_window(&kind, &spec)?;
    let mut s = String::from("{\n");
    let _ = write!(
        s,
        "  \"kind\": {},\n  \"M\": {m},\n  \"N\": {n},\n  \"feasibility\": {},\n  \"f\": [",
        serde_json::to_string(&w.kind)?,
        serde_json::to_string(&w.feasibility)?
    );
    for (i, v) in w.f.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s.push_str("]\n}\n");
    std::fs::write(out, s)?;
    println!(
        "wrote {} (zero condition: {}, power complement: {}, decay order: {})",
        out.display(),
        w.feasibility.meets_zero_condition,
        w.feasibility.meets_power_complement,
        w.feasibility
            .stopband_decay_order
            .map(|d| d.to_string())
            .unwrap_or_else(|| "equiripple".into())
    );
    Ok(ExitCode::SUCCESS)
}

fn write_plan(plan: &ExcitationPlan, out: &Path, csv: Option<&Path>, lambda: usize) -> Result<()> {
    std::fs::write(out, serde_json::to_string_pretty(&plan.spec)?)?;
    println!(
        "wrote {} (M={}, L={})",
        out.display(),
        plan.spec.m,
        plan.spec.l
    );
    if let Some(csv_path) = csv {
        if lambda >= plan.time_signals.len() {
            return Err(Error::invalid("lambda out of range for CSV export"));
        }
        let mut s = String::from("# excitation base block\nk,re,im\n");
        for (k, z) in plan.time_signals[lambda].iter().enumerate() {
            let _ = writeln!(s, "{k},{:.17e},{:.17e}", z.re, z.im);
        }
        std::fs::write(csv_path, s)?;
        println!("wrote {}", csv_path.display());
    }
    Ok(())
}

pub fn signal(cmd: SignalCommand) -> Result<ExitCode> {
    match cmd {
        SignalCommand::Multitone {
            m,
            l,
            seed,
            magnitude,
            mode,
            out,
            csv,
            lambda,
        } => {
            let mags = vec![magnitude; m];
            let plan = rkm_core::signals::gen_multitone(m, l, &mags, seed, mode == "real")?;
            write_plan(&plan, &out, csv.as_deref(), lambda)?;
        }
        SignalCommand::Chirp {
            m,
            l,
            seed,
            v_c,
            no_rotation,
            out,
            csv,
            lambda,
        } => {
            let plan = rkm_core::signals::gen_chirp_complex(m, l, v_c, seed, !no_rotation)?;
            write_plan(&plan, &out, csv.as_deref(), lambda)?;
        }
        SignalCommand::ChirpReal {
            m,
            l,
            seed,
            v_c,
            cr_max,
            out,
            csv,
            lambda,
        } => {
            let params = ChirpParams {
                v_c,
                cr_max,
                random_sign: true,
                random_rotation: true,
            };
            let plan = rkm_core::signals::gen_chirp_real(m, l, params, seed)?;
            write_plan(&plan, &out, csv.as_deref(), lambda)?;
        }
        SignalCommand::Gaussian {
            m,
            l,
            seed,
            variance,
            mode,
            rho_re,
            rho_im,
            out,
            csv,
            lambda,
        } => {
            let plan = rkm_core::signals::gen_gaussian(
                m,
                l,
                variance,
                mode == "complex",
                Complex64::new(rho_re, rho_im),
                seed,
            )?;
            write_plan(&plan, &out, csv.as_deref(), lambda)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_campaign(path: &Path) -> Result<CampaignSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn build_window(spec: &CampaignSpec) -> Result<WindowSequence> {
    design_window(&WindowSpec::new(spec.m, spec.n)?)
}

fn build_config(spec: &CampaignSpec, window: WindowSequence) -> CampaignConfig {
    CampaignConfig {
        window,
        settling: spec.settling,
        alpha: spec.alpha,
        mode: spec.mode,
        reset_state: !spec.keep_state,
    }
}

fn plan_spec_of(spec: &CampaignSpec) -> Result<PlanSpec> {
    let kind = spec
        .excitation
        .clone()
        .ok_or_else(|| Error::invalid("campaign needs an excitation block"))?;
    Ok(PlanSpec {
        m: spec.m,
        l: spec.l,
        seed: spec.seed,
        kind,
    })
}

fn run_from_spec(spec: &CampaignSpec) -> Result<MeasurementResult> {
    let window = build_window(spec)?;
    let cfg = build_config(spec, window);
    let noise = spec
        .noise
        .clone()
        .map(|kind| NoiseSource::new(kind, spec.seed ^ 0x6e6f_6973));
    if spec.psd_only {
        let noise = noise.ok_or_else(|| Error::invalid("psd_only campaign needs a noise block"))?;
        let mut system = spec.system.as_ref().map(systems::build).transpose()?;
        return run_psd_campaign(&cfg, system.as_mut(), &noise, spec.l);
    }
    let plan = generate(&plan_spec_of(spec)?)?;
    let mut system = match &spec.system {
        Some(kind) => systems::build(kind)?,
        None => systems::build(&rkm_core::systems::SystemKind::Fir {
            taps_re: vec![1.0],
            taps_im: vec![0.0],
        })?,
    };
    run_campaign(&cfg, &mut system, noise.as_ref(), &plan)
}

fn write_result(res: &MeasurementResult, out: &str, figure: &str) -> Result<()> {
    let json_path = format!("{out}.json");
    let csv_path = format!("{out}.csv");
    std::fs::write(&json_path, res.to_json()?)?;
    let mut csv = Vec::new();
    res.write_csv(&mut csv, figure)?;
    std::fs::write(&csv_path, csv)?;
    println!("wrote {json_path} and {csv_path}");
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }
    if res.short_settling_suspect {
        eprintln!(
            "warning: residual PSD tracks |H|^2 (correlation > 0.9) - the settling \
             prefix may be too short"
        );
    }
    Ok(())
}

pub fn measure(path: &Path, out: &str) -> Result<ExitCode> {
    let spec = load_campaign(path)?;
    let res = run_from_spec(&spec)?;
    write_result(
        &res,
        out,
        &format!(
            "measurement campaign: M={} N={} L={}",
            spec.m, spec.n, spec.l
        ),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn psd(path: &Path, out: &str, log_log: bool) -> Result<ExitCode> {
    let mut spec = load_campaign(path)?;
    spec.psd_only = true;
    if spec.noise.is_none() {
        return Err(Error::invalid("psd campaign needs a noise block"));
    }
    let res = run_from_spec(&spec)?;
    write_result(
        &res,
        out,
        &format!(
            "output-only spectral estimation: M={} N={} L={}",
            spec.m, spec.n, spec.l
        ),
    )?;
    if log_log {
        let path = format!("{out}_loglog.csv");
        let mut s = String::from("# log-log export: x = log10(sin(Omega/2)), y = Phi_dB\n");
        s.push_str("log_sin_half_omega,Phi_dB\n");
        for b in &res.bins {
            if b.mu == 0 {
                continue;
            }
            let omega = 2.0 * std::f64::consts::PI * b.mu as f64 / res.m as f64;
            let x = (omega / 2.0).sin().log10();
            let y = 10.0 * b.phi.max(1e-300).log10();
            let _ = writeln!(s, "{x:.12e},{y:.6}");
        }
        std::fs::write(&path, s)?;
        println!("wrote {path}");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn calibrate(path: &Path, reps_flag: u32, out: &str) -> Result<ExitCode> {
    let spec = load_campaign(path)?;
    let reps = spec.repetitions.unwrap_or(reps_flag);
    let window = build_window(&spec)?;
    let noise_kind = spec
        .noise
        .clone()
        .ok_or_else(|| Error::invalid("calibration needs a noise block"))?;
    let noise = NoiseSource::new(noise_kind, spec.seed ^ 0x6e6f_6973);
    let system_kind = spec
        .system
        .clone()
        .ok_or_else(|| Error::invalid("calibration needs a system block"))?;
    let reference = systems::build(&system_kind)?;
    let m = spec.m;
    let phi_true: Vec<f64> = (0..m)
        .map(|mu| systems::windowed_expectation(&window, &noise, mu))
        .collect();
    let h_true: Vec<Complex64> = (0..m)
        .map(|mu| reference.freq_response(2.0 * std::f64::consts::PI * mu as f64 / m as f64))
        .collect();
    let mc = MonteCarlo {
        cfg: build_config(&spec, window),
        plan_template: plan_spec_of(&spec)?,
        noise_template: Some(noise),
    };
    let mut table = CalibrationTable::new(if spec.mode == SystemMode::Real {
        m / 2 + 1
    } else {
        m
    });
    let sys_kind = system_kind.clone();
    mc.run(
        reps,
        move || systems::build(&sys_kind).expect("system already built once"),
        |_, res| table.tally(&res, &phi_true, &h_true),
    )?;
    let csv_path = format!("{out}.csv");
    let mut s = String::from("# empirical confidence miss rates per bin\n");
    s.push_str("mu,Omega,phi_miss_rate,h_miss_rate\n");
    for mu in 0..table.phi_misses.len() {
        let omega = 2.0 * std::f64::consts::PI * mu as f64 / m as f64;
        let _ = writeln!(
            s,
            "{mu},{omega:.12e},{:.6},{:.6}",
            table.phi_miss_rate(mu),
            table.h_miss_rate(mu)
        );
    }
    std::fs::write(&csv_path, s)?;
    println!(
        "wrote {csv_path} ({reps} repetitions, alpha = {})",
        spec.alpha
    );
    Ok(ExitCode::SUCCESS)
}
