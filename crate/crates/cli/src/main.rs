//! `rkm` — design and verify power-complementary windows, generate
//! excitation plans, run simulated measurement campaigns, and export
//! plot-ready data.

mod campaign_file;
mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rkm",
    about = "Simultaneous transfer-function and residual-noise-PSD measurement toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design, verify, or sample window sequences
    Window {
        #[command(subcommand)]
        cmd: WindowCmd,
    },
    /// Generate excitation plans
    Signal {
        #[command(subcommand)]
        cmd: SignalCmd,
    },
    /// Run a simulated measurement campaign from a campaign file
    Measure {
        /// campaign JSON file
        campaign: PathBuf,
        /// output prefix (writes <prefix>.json and <prefix>.csv)
        #[arg(long, default_value = "result")]
        out: String,
    },
    /// Output-only spectral estimation from a campaign file or sample CSV
    Psd {
        /// campaign JSON file (with a noise block) or sample file reference
        spec: PathBuf,
        #[arg(long, default_value = "psd")]
        out: String,
        /// write the CSV with log sin(Omega/2) as first column
        #[arg(long)]
        log_log: bool,
    },
    /// Repeat a campaign and tabulate empirical confidence miss rates
    Calibrate {
        campaign: PathBuf,
        #[arg(long, default_value_t = 500)]
        reps: u32,
        #[arg(long, default_value = "calibration")]
        out: String,
    },
}

#[derive(Subcommand)]
enum WindowCmd {
    /// Design the power-complementary window for the given geometry
    Design {
        #[command(flatten)]
        geo: Geometry,
        /// output window JSON file
        #[arg(long, default_value = "window.json")]
        out: PathBuf,
    },
    /// Re-verify a window file; nonzero exit if any condition fails
    Verify { file: PathBuf },
    /// Sample a classical window with feasibility flags
    Catalog {
        #[command(flatten)]
        geo: Geometry,
        /// one of: rectangle, triangle, parzen, hamming, hann, blackman,
        /// tukey, cosine-rolloff, root-cosine-rolloff, kaiser,
        /// dolph-chebyshev
        #[arg(long)]
        kind: String,
        /// shape parameter (tukey/rolloff alpha, kaiser alpha)
        #[arg(long)]
        alpha: Option<f64>,
        /// stopband edge for dolph-chebyshev
        #[arg(long)]
        omega1: Option<f64>,
        #[arg(long, default_value = "catalog.json")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Geometry {
    /// DFT length M (number of measured bins)
    #[arg(long = "M", visible_alias = "m")]
    m: usize,
    /// window length factor N (window length F = N*M)
    #[arg(long = "N", visible_alias = "n")]
    n: usize,
}

#[derive(Subcommand)]
enum SignalCmd {
    /// Random multitone with constant per-bin magnitude
    Multitone {
        #[arg(long = "M")]
        m: usize,
        #[arg(long = "L")]
        l: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// per-bin magnitude (constant across bins)
        #[arg(long, default_value_t = 1.0)]
        magnitude: f64,
        #[arg(long, value_parser = ["complex", "real"], default_value = "complex")]
        mode: String,
        #[arg(long, default_value = "plan.json")]
        out: PathBuf,
        /// also export one base block as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
        /// which sub-measurement to export
        #[arg(long, default_value_t = 0)]
        lambda: usize,
    },
    /// Complex quadratic-phase chirp
    Chirp {
        #[arg(long = "M")]
        m: usize,
        #[arg(long = "L")]
        l: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// spectral magnitude
        #[arg(long, default_value_t = 1.0)]
        v_c: f64,
        /// disable the random cyclic rotation
        #[arg(long)]
        no_rotation: bool,
        #[arg(long, default_value = "plan.json")]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        lambda: usize,
    },
    /// Real chirp with crest-factor control
    ChirpReal {
        #[arg(long = "M")]
        m: usize,
        #[arg(long = "L")]
        l: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        v_c: f64,
        /// admissible crest factor (> sqrt(2))
        #[arg(long, default_value_t = 1.5)]
        cr_max: f64,
        #[arg(long, default_value = "plan.json")]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        lambda: usize,
    },
    /// White Gaussian excitation
    Gaussian {
        #[arg(long = "M")]
        m: usize,
        #[arg(long = "L")]
        l: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        variance: f64,
        #[arg(long, value_parser = ["complex", "real"], default_value = "complex")]
        mode: String,
        /// complementary correlation of real and imaginary parts
        #[arg(long, default_value_t = 0.0)]
        rho_re: f64,
        #[arg(long, default_value_t = 0.0)]
        rho_im: f64,
        #[arg(long, default_value = "plan.json")]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        lambda: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<ExitCode, rkm_core::Error> {
        match cli.command {
            Command::Window { cmd } => match cmd {
                WindowCmd::Design { geo, out } => commands::window_design(geo.m, geo.n, &out),
                WindowCmd::Verify { file } => commands::window_verify(&file),
                WindowCmd::Catalog {
                    geo,
                    kind,
                    alpha,
                    omega1,
                    out,
                } => commands::window_catalog(geo.m, geo.n, &kind, alpha, omega1, &out),
            },
            Command::Signal { cmd } => commands::signal(cmd),
            Command::Measure { campaign, out } => commands::measure(&campaign, &out),
            Command::Psd { spec, out, log_log } => commands::psd(&spec, &out, log_log),
            Command::Calibrate {
                campaign,
                reps,
                out,
            } => commands::calibrate(&campaign, reps, &out),
        }
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub(crate) use SignalCmd as SignalCommand;
