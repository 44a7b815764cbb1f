use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qproc_core::circuits::ShorVariant;
use qproc_core::harness::{self, ConfigFile, Experiment, ExperimentSpec};
use qproc_core::Error;

/// Simulator for a bus-coupled four-qubit phase-qubit processor.
#[derive(Parser)]
#[command(name = "qproc-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Device/noise config (JSON). Built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Qubit frequency vs interaction time scan.
    Spectroscopy {
        #[command(flatten)]
        common: Common,
        /// 1-based qubit number.
        #[arg(long, default_value_t = 1)]
        qubit: usize,
        #[arg(long, default_value_t = 5.9)]
        f_min: f64,
        #[arg(long, default_value_t = 7.4)]
        f_max: f64,
        #[arg(long, default_value_t = 0.005)]
        f_step: f64,
        #[arg(long, default_value_t = 200.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 2.0)]
        tau_step: f64,
    },
    /// Bus oscillations with N = 1, 2, … qubits on resonance.
    #[command(name = "rabi_scaling")]
    RabiScaling {
        #[command(flatten)]
        common: Common,
        /// Comma-separated 1-based qubit numbers.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        qubits: Vec<usize>,
        #[arg(long, default_value_t = 200.0)]
        duration: f64,
        #[arg(long, default_value_t = 0.25)]
        dt: f64,
        /// Use this bus coupling (MHz) for every qubit.
        #[arg(long)]
        coupling_mhz: Option<f64>,
    },
    /// Bell (Q1,Q2) and W (Q1-Q3) states from a shared bus photon.
    Entangle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        shots_per_setting: u64,
        #[arg(long)]
        coupling_mhz: Option<f64>,
    },
    /// Compiled order finding for N = 15, a = 4.
    Shor {
        #[command(flatten)]
        common: Common,
        /// four_qubit, three_qubit or control.
        #[arg(long, default_value = "three_qubit")]
        variant: ShorVariant,
        #[arg(long, default_value_t = 150_000)]
        shots: u64,
        #[arg(long, default_value_t = 10_000)]
        shots_per_setting: u64,
        /// Density-matrix run with the config's noise parameters.
        #[arg(long)]
        noisy: bool,
    },
    /// Check a config file and list every violation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn configure_threads() {
    if let Some(n) = std::env::var("QPROC_SIM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn load(path: &Option<PathBuf>) -> Result<ConfigFile, Error> {
    match path {
        Some(p) => harness::load_config(p),
        None => Ok(ConfigFile::default()),
    }
}

fn run(command: Command) -> Result<i32, Error> {
    let (common, experiment) = match command {
        Command::Validate { config } => {
            let report = harness::validate_config(&config)?;
            for e in &report.entries {
                println!("{:?}: {}: {}", e.severity, e.field, e.message);
            }
            if report.entries.is_empty() {
                println!("ok: no violations");
            }
            return Ok(if report.has_errors() { 1 } else { 0 });
        }
        Command::Spectroscopy { common, qubit, f_min, f_max, f_step, tau_max, tau_step } => (
            common,
            Experiment::Spectroscopy {
                qubit,
                f_min_ghz: f_min,
                f_max_ghz: f_max,
                f_step_ghz: f_step,
                tau_max_ns: tau_max,
                tau_step_ns: tau_step,
            },
        ),
        Command::RabiScaling { common, qubits, duration, dt, coupling_mhz } => (
            common,
            Experiment::RabiScaling { qubits, duration_ns: duration, sample_dt_ns: dt, coupling_mhz },
        ),
        Command::Entangle { common, shots_per_setting, coupling_mhz } => {
            (common, Experiment::Entangle { shots_per_setting, coupling_mhz })
        }
        Command::Shor { common, variant, shots, shots_per_setting, noisy } => {
            (common, Experiment::Shor { variant, shots, shots_per_setting, noisy })
        }
    };
    let config = load(&common.config)?;
    let spec = ExperimentSpec { experiment, seed: common.seed, output_dir: common.out };
    let outcome = harness::run_experiment(&spec, &config)?;
    for f in outcome.files {
        println!("{}", f.display());
    }
    Ok(0)
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for invariant violations
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    configure_threads();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}
