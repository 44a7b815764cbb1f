//! Experiment orchestration and output files.
//!
//! # Config file
//!
//! A JSON object holding the [`DeviceConfig`] fields at top level and an
//! optional `noise` object ([`NoiseParams`]):
//!
//! ```json
//! {
//!   "n_qubits": 4,
//!   "f_bus": 6.1,
//!   "f_memory": [6.8, 7.2, 7.1, 6.9],
//!   "f_idle": [6.6, 6.6, 6.6, 6.6],
//!   "g_bus": [55.0, 55.0, 55.0, 55.0],
//!   "g_mem": [20.0, 20.0, 20.0, 20.0],
//!   "n_max": 3,
//!   "coupling_mode": "switched",
//!   "noise": { "t1": [400, 400, 400, 400], "t_phi": [200, 200, 200, 200],
//!              "gate_time_1q": 10, "gate_time_2q": 50, "invented_default": true }
//! }
//! ```
//!
//! Frequencies are GHz, couplings MHz, times ns. `null` in `t1`/`t_phi`
//! switches that process off.
//!
//! # Output files
//!
//! Every run writes `manifest.json` ([`Manifest`]) and:
//!
//! | experiment     | files |
//! |----------------|-------|
//! | `spectroscopy` | `spectroscopy.csv` (`freq_ghz,tau_ns,p_e`), `spectroscopy_summary.json` |
//! | `rabi_scaling` | `rabi_n{N}.csv` (`time_ns,p_bus,p_vacuum,p_q{k}...`), `rabi_fits.json` |
//! | `entangle`     | `entangle_bell.json`, `entangle_w.json` ([`EntangleReport`]) |
//! | `shor`         | `factoring.json` ([`ShorReport`]), `breakpoint_{name}.json` ([`TomographyRecord`]) |
//!
//! Qubit numbers in files and on the command line are 1-based (`Q1..Q4`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuits::{build_shor, output_distribution, run_circuit, sample_output, FactoringResult, RunMode, ShorVariant};
use crate::dynamics::{
    collective_coupling_mhz, fit_oscillation, prepare_shared_excitation, simultaneous_resonance, swap_spectroscopy,
    DeviceConfig, OccupationTrace, Severity, SpectroscopyMap,
};
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, DensityMatrix, SpaceLayout, State};
use crate::noise::NoiseParams;
use crate::states;
use crate::tomography::{
    concurrence_eof, gauged_fidelity, linear_entropy, reconstruct, simulate_tomography, state_fidelity, summarize,
    uhlmann_fidelity, witness_check, TomographyRecord, WitnessClass, WitnessOutcome,
};

/// Tolerance for trace and positivity of reconstructed states.
const DENSITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub device: DeviceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseParams>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self { device: DeviceConfig::default(), noise: Some(NoiseParams::invented_default(4)) }
    }
}

impl ConfigFile {
    /// Noise for the device: the configured values, else the invented defaults.
    pub fn noise_or_default(&self) -> NoiseParams {
        self.noise.clone().unwrap_or_else(|| NoiseParams::invented_default(self.device.n_qubits))
    }
}

/// Parse a config document; errors carry the offending line.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    serde_json::from_str(text).map_err(|e| {
        let line = e.line();
        let source = text.lines().nth(line.saturating_sub(1)).unwrap_or("").trim_end();
        Error::Parse { line, message: format!("column {}: {e}\n    {source}", e.column()) }
    })
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    parse_config(&fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub field: String,
    pub message: String,
    pub severity: Severity,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<ReportEntry>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.entries.iter().any(|e| e.severity == Severity::Error)
    }
}

pub fn check_config(config: &ConfigFile) -> ValidationReport {
    let mut entries: Vec<ReportEntry> = config
        .device
        .violations()
        .into_iter()
        .map(|v| ReportEntry { field: v.field, message: v.message, severity: v.severity })
        .collect();
    if let Some(noise) = &config.noise {
        if noise.n_qubits() != config.device.n_qubits {
            entries.push(ReportEntry {
                field: "noise.t1".into(),
                message: format!("has {} entries, expected n_qubits = {}", noise.n_qubits(), config.device.n_qubits),
                severity: Severity::Error,
            });
        }
        entries.extend(noise.violations().into_iter().map(|message| ReportEntry {
            field: "noise".into(),
            message,
            severity: Severity::Error,
        }));
    }
    ValidationReport { entries }
}

/// Load and check a config file. Parse failures are returned as errors.
pub fn validate_config(path: &Path) -> Result<ValidationReport> {
    Ok(check_config(&load_config(path)?))
}

/// 1 for config and I/O problems, 2 for violated numerical invariants.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Invariant(_) | Error::NotHermitian { .. } | Error::NotPositive { .. } => 2,
        _ => 1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Experiment {
    Spectroscopy {
        /// 1-based.
        qubit: usize,
        f_min_ghz: f64,
        f_max_ghz: f64,
        f_step_ghz: f64,
        tau_max_ns: f64,
        tau_step_ns: f64,
    },
    RabiScaling {
        /// 1-based; N = 1, 2, … uses the first N entries.
        qubits: Vec<usize>,
        duration_ns: f64,
        sample_dt_ns: f64,
        /// Replace every bus coupling with this value.
        coupling_mhz: Option<f64>,
    },
    Entangle {
        shots_per_setting: u64,
        coupling_mhz: Option<f64>,
    },
    Shor {
        variant: ShorVariant,
        shots: u64,
        shots_per_setting: u64,
        noisy: bool,
    },
}

impl Experiment {
    pub fn spectroscopy(qubit: usize) -> Self {
        Experiment::Spectroscopy {
            qubit,
            f_min_ghz: 5.9,
            f_max_ghz: 7.4,
            f_step_ghz: 0.005,
            tau_max_ns: 200.0,
            tau_step_ns: 2.0,
        }
    }

    pub fn rabi_scaling(qubits: Vec<usize>) -> Self {
        Experiment::RabiScaling { qubits, duration_ns: 200.0, sample_dt_ns: 0.25, coupling_mhz: None }
    }

    pub fn entangle() -> Self {
        Experiment::Entangle { shots_per_setting: 10_000, coupling_mhz: None }
    }

    pub fn shor(variant: ShorVariant) -> Self {
        Experiment::Shor { variant, shots: 150_000, shots_per_setting: 10_000, noisy: false }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectroscopy { .. } => "spectroscopy",
            Experiment::RabiScaling { .. } => "rabi_scaling",
            Experiment::Entangle { .. } => "entangle",
            Experiment::Shor { .. } => "shor",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub seed: u64,
    pub version: String,
    pub config: ConfigFile,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyRow {
    pub freq_ghz: f64,
    pub tau_ns: f64,
    pub p_e: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopySummary {
    /// 1-based.
    pub qubit: usize,
    pub threshold: f64,
    pub chevron_centers_ghz: Vec<f64>,
    pub mean_p_e: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiFit {
    pub n: usize,
    /// 1-based.
    pub participants: Vec<usize>,
    pub frequency_mhz: f64,
    /// Half the −3 dB width of the spectral peak.
    pub error_mhz: f64,
    pub collective_coupling_mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntangleReport {
    pub target: String,
    /// 1-based.
    pub participants: Vec<usize>,
    pub stop_time_ns: f64,
    pub residual: f64,
    pub raw_fidelity: f64,
    pub gauged_fidelity: f64,
    pub gauge_phases: Vec<f64>,
    pub witness: Option<WitnessOutcome>,
    pub tomography: TomographyRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShorReport {
    pub variant: ShorVariant,
    pub mode: String,
    pub noise: Option<NoiseParams>,
    pub ideal_distribution: BTreeMap<String, f64>,
    pub exact_distribution: BTreeMap<String, f64>,
    pub result: FactoringResult,
    pub breakpoint_files: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name)).map_err(csv_error)?;
        w.write_record(header).map_err(csv_error)?;
        for row in rows {
            w.write_record(row.iter().map(|x| x.to_string())).map_err(csv_error)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

fn to_zero_based(qubits: &[usize], n: usize) -> Result<Vec<usize>> {
    qubits
        .iter()
        .map(|&q| {
            if q == 0 || q > n {
                Err(Error::InvalidArgument(format!("qubit Q{q} is not on a {n}-qubit device")))
            } else {
                Ok(q - 1)
            }
        })
        .collect()
}

fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::InvalidArgument(format!("bad grid {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn check_density(rho: &DensityMatrix, what: &str) -> Result<()> {
    let trace = rho.trace();
    let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    if (trace - 1.0).abs() > DENSITY_TOL || min < -DENSITY_TOL {
        return Err(Error::Invariant(format!("{what}: trace {trace}, min eigenvalue {min}")));
    }
    Ok(())
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::Invariant(format!("{what} = {p} is not a probability")));
    }
    Ok(())
}

/// Run one experiment and write its files into `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec, config: &ConfigFile) -> Result<RunOutcome> {
    let report = check_config(config);
    if let Some(e) = report.entries.iter().find(|e| e.severity == Severity::Error) {
        return Err(Error::InvalidConfig(format!("{}: {}", e.field, e.message)));
    }
    let mut out = Writer::new(&spec.output_dir)?;
    match &spec.experiment {
        Experiment::Spectroscopy { qubit, f_min_ghz, f_max_ghz, f_step_ghz, tau_max_ns, tau_step_ns } => {
            let q = to_zero_based(&[*qubit], config.device.n_qubits)?[0];
            let freqs = grid(*f_min_ghz, *f_max_ghz, *f_step_ghz)?;
            let taus = grid(0.0, *tau_max_ns, *tau_step_ns)?;
            let map = swap_spectroscopy(&config.device, q, &freqs, &taus)?;
            write_spectroscopy(&mut out, &map, *qubit)?;
        }
        Experiment::RabiScaling { qubits, duration_ns, sample_dt_ns, coupling_mhz } => {
            let mut device = config.device.clone();
            if let Some(g) = coupling_mhz {
                device = device.with_uniform_bus_coupling(*g);
            }
            let zero_based = to_zero_based(qubits, device.n_qubits)?;
            let mut fits = Vec::new();
            for n in 1..=zero_based.len() {
                let participants = &zero_based[..n];
                let trace = simultaneous_resonance(&device, participants, *duration_ns, *sample_dt_ns)?;
                write_trace(&mut out, &format!("rabi_n{n}.csv"), &trace)?;
                let fit = fit_oscillation(&trace.times, &trace.p_bus)?;
                fits.push(RabiFit {
                    n,
                    participants: qubits[..n].to_vec(),
                    frequency_mhz: fit.frequency_mhz,
                    error_mhz: fit.error_mhz,
                    collective_coupling_mhz: collective_coupling_mhz(&device, participants),
                });
            }
            out.json("rabi_fits.json", &fits)?;
        }
        Experiment::Entangle { shots_per_setting, coupling_mhz } => {
            let mut device = config.device.clone();
            if let Some(g) = coupling_mhz {
                device = device.with_uniform_bus_coupling(*g);
            }
            let bell = entangle_report(&device, &[0, 1], *shots_per_setting, spec.seed)?;
            out.json("entangle_bell.json", &bell)?;
            let w = entangle_report(&device, &[0, 1, 2], *shots_per_setting, spec.seed.wrapping_add(1))?;
            out.json("entangle_w.json", &w)?;
        }
        Experiment::Shor { variant, shots, shots_per_setting, noisy } => {
            run_shor(&mut out, config, *variant, *shots, *shots_per_setting, *noisy, spec.seed)?;
        }
    }
    let mut files = out.files.clone();
    files.sort();
    let manifest = Manifest {
        experiment: spec.experiment.clone(),
        seed: spec.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        files,
    };
    out.json("manifest.json", &manifest)?;
    Ok(RunOutcome { files: out.files.iter().map(|f| out.dir.join(f)).collect() })
}

fn write_spectroscopy(out: &mut Writer, map: &SpectroscopyMap, qubit: usize) -> Result<()> {
    for (f, row) in map.freqs.iter().zip(&map.p_e) {
        for p in row {
            check_probability(*p, &format!("P_e at {f} GHz"))?;
        }
    }
    let header = ["freq_ghz", "tau_ns", "p_e"].map(String::from);
    let rows = map
        .freqs
        .iter()
        .zip(&map.p_e)
        .flat_map(|(&f, row)| map.taus.iter().zip(row).map(move |(&t, &p)| vec![f, t, p]));
    out.csv("spectroscopy.csv", &header, rows)?;
    let threshold = 0.75;
    out.json(
        "spectroscopy_summary.json",
        &SpectroscopySummary {
            qubit,
            threshold,
            chevron_centers_ghz: map.chevron_centers(threshold),
            mean_p_e: map.mean_profile(),
        },
    )
}

fn write_trace(out: &mut Writer, name: &str, trace: &OccupationTrace) -> Result<()> {
    let mut header = vec!["time_ns".to_string(), "p_bus".into(), "p_vacuum".into()];
    header.extend((1..=trace.p_qubit.len()).map(|k| format!("p_q{k}")));
    let rows = (0..trace.len()).map(|i| {
        let mut row = vec![trace.times[i], trace.p_bus[i], trace.p_vacuum[i]];
        row.extend(trace.p_qubit.iter().map(|p| p[i]));
        row
    });
    out.csv(name, &header, rows)
}

fn entangle_report(device: &DeviceConfig, participants: &[usize], shots: u64, seed: u64) -> Result<EntangleReport> {
    let shared = prepare_shared_excitation(device, participants)?;
    let (target_name, target) = match participants.len() {
        2 => ("singlet", states::singlet()),
        n => ("w", states::w_state(n)),
    };
    let gauge = gauged_fidelity(&shared.state, &target)?;
    let n = participants.len();
    let all: Vec<usize> = (0..n).collect();
    let mut record = simulate_tomography(&gauge.gauged_state.clone().into(), &all, shots, seed)?;
    let rho = reconstruct(&record)?;
    check_density(&rho, "reconstructed state")?;
    let mut metrics = summarize(&rho, &target)?;
    metrics.insert("raw_fidelity".into(), gauge.raw);
    metrics.insert("gauged_fidelity".into(), gauge.gauged);
    let witness = if n == 3 { Some(witness_check(&rho, WitnessClass::W, &target)?) } else { None };
    if let Some(w) = &witness {
        metrics.insert("witness_margin".into(), w.margin);
    }
    record.rho_hat = Some(rho);
    record.metrics = metrics;
    Ok(EntangleReport {
        target: target_name.into(),
        participants: participants.iter().map(|q| q + 1).collect(),
        stop_time_ns: shared.stop_time_ns,
        residual: shared.residual,
        raw_fidelity: gauge.raw,
        gauged_fidelity: gauge.gauged,
        gauge_phases: gauge.phases,
        witness,
        tomography: record,
    })
}

/// Register positions holding the three-qubit core of each Shor variant.
fn shor_core(variant: ShorVariant) -> [usize; 3] {
    match variant {
        ShorVariant::FourQubit => [1, 2, 3],
        ShorVariant::ThreeQubit | ShorVariant::Control => [0, 1, 2],
    }
}

fn run_shor(
    out: &mut Writer,
    config: &ConfigFile,
    variant: ShorVariant,
    shots: u64,
    shots_per_setting: u64,
    noisy: bool,
    seed: u64,
) -> Result<()> {
    let circuit = build_shor(variant);
    let ideal = run_circuit(&circuit, RunMode::IdealPure, None)?;
    let noise = if noisy { Some(config.noise_or_default()) } else { None };
    let run = match &noise {
        Some(params) => run_circuit(&circuit, RunMode::NoisyDensity, Some(params))?,
        None => ideal.clone(),
    };
    let register = &circuit.measured_register;
    let ideal_distribution = output_distribution(&ideal.final_state, register, circuit.output_padding)?;
    let exact_distribution = output_distribution(&run.final_state, register, circuit.output_padding)?;
    let counts = sample_output(&run.final_state, register, circuit.output_padding, shots, seed)?;
    let result = FactoringResult::from_counts(counts, 4, 15, circuit.output_bits())?;
    if let Some((p, q)) = result.factors {
        if p * q != 15 {
            return Err(Error::Invariant(format!("factors {p} x {q} != 15")));
        }
    }

    let core = shor_core(variant);
    let mut breakpoint_files = Vec::new();
    for (k, ((name, state), (_, ideal_state))) in run.breakpoints.iter().zip(&ideal.breakpoints).enumerate() {
        let mut record = simulate_tomography(state, &core, shots_per_setting, seed.wrapping_add(1 + k as u64))?;
        let rho = reconstruct(&record)?;
        check_density(&rho, &format!("breakpoint {name}"))?;
        record.metrics = breakpoint_metrics(variant, name, &rho, &partial_trace(&ideal_state.to_density(), &core)?)?;
        record.rho_hat = Some(rho);
        let file = format!("breakpoint_{name}.json");
        out.json(&file, &record)?;
        breakpoint_files.push(file);
    }

    let report = ShorReport {
        variant,
        mode: if noisy { "noisy_density".into() } else { "ideal_pure".into() },
        noise,
        ideal_distribution,
        exact_distribution,
        result,
        breakpoint_files,
    };
    out.json("factoring.json", &report)
}

fn breakpoint_metrics(
    variant: ShorVariant,
    name: &str,
    rho: &DensityMatrix,
    ideal: &DensityMatrix,
) -> Result<BTreeMap<String, f64>> {
    let mut m = BTreeMap::new();
    m.insert("fidelity".into(), uhlmann_fidelity(rho, ideal)?.powi(2));
    m.insert("max_abs_imag".into(), rho.max_imag());
    m.insert("trace".into(), rho.trace());
    m.insert("min_eigenvalue".into(), rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min));
    m.insert("purity".into(), rho.purity());

    // the register is the first qubit of the core
    let reg = partial_trace(rho, &[0])?;
    let mixed = DensityMatrix::maximally_mixed(SpaceLayout::qubits(1));
    m.insert("register_fidelity_to_mixed".into(), uhlmann_fidelity(&reg, &mixed)?);
    m.insert("register_linear_entropy".into(), linear_entropy(&reg));

    if variant == ShorVariant::Control {
        return Ok(m);
    }
    match name {
        "step1" => {
            let pair = partial_trace(rho, &[0, 1])?;
            m.insert("pair_fidelity_phi_plus".into(), state_fidelity(&pair, &states::phi_plus())?);
            m.insert("pair_fidelity_singlet".into(), state_fidelity(&pair, &states::singlet())?);
            let e = concurrence_eof(&pair)?;
            m.insert("pair_concurrence".into(), e.concurrence);
            m.insert("pair_eof".into(), e.eof);
        }
        "step2" => {
            let w = witness_check(rho, WitnessClass::Ghz, &states::ghz(3))?;
            m.insert("ghz_fidelity".into(), w.fidelity);
            m.insert("ghz_witness_margin".into(), w.margin);
        }
        "step3" => {
            m.insert("psi3_fidelity".into(), state_fidelity(rho, &states::psi3())?);
        }
        _ => {}
    }
    Ok(m)
}

/// Read `spectroscopy.csv` back into a map.
pub fn read_spectroscopy_csv(path: &Path, qubit: usize) -> Result<SpectroscopyMap> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let mut freqs: Vec<f64> = Vec::new();
    let mut taus: Vec<f64> = Vec::new();
    let mut p_e: Vec<Vec<f64>> = Vec::new();
    for row in reader.deserialize::<SpectroscopyRow>() {
        let row = row.map_err(csv_error)?;
        if freqs.last() != Some(&row.freq_ghz) {
            freqs.push(row.freq_ghz);
            p_e.push(Vec::new());
        }
        if freqs.len() == 1 {
            taus.push(row.tau_ns);
        }
        p_e.last_mut().expect("row pushed above").push(row.p_e);
    }
    if p_e.iter().any(|r| r.len() != taus.len()) {
        return Err(Error::InvalidArgument("spectroscopy grid is ragged".into()));
    }
    Ok(SpectroscopyMap { qubit, freqs, taus, p_e })
}

/// Read a `rabi_n{N}.csv` file back into a trace.
pub fn read_trace_csv(path: &Path) -> Result<OccupationTrace> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let n_qubits = reader.headers().map_err(csv_error)?.len().saturating_sub(3);
    let mut trace = OccupationTrace { times: vec![], p_qubit: vec![vec![]; n_qubits], p_bus: vec![], p_vacuum: vec![] };
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let values = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad number {s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != n_qubits + 3 {
            return Err(Error::InvalidArgument("trace row has the wrong width".into()));
        }
        trace.times.push(values[0]);
        trace.p_bus.push(values[1]);
        trace.p_vacuum.push(values[2]);
        for (k, v) in values[3..].iter().enumerate() {
            trace.p_qubit[k].push(*v);
        }
    }
    Ok(trace)
}

/// Final register state of a run, for callers that want it without files.
pub fn shor_final_state(variant: ShorVariant, noise: Option<&NoiseParams>) -> Result<State> {
    let circuit = build_shor(variant);
    let mode = if noise.is_some() { RunMode::NoisyDensity } else { RunMode::IdealPure };
    Ok(run_circuit(&circuit, mode, noise)?.final_state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let c = ConfigFile::default();
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
        assert!(check_config(&c).entries.is_empty());
    }

    #[test]
    fn parse_error_names_line() {
        let text = "{\n  \"n_qubits\": 4,\n  \"f_bus\": oops\n}";
        match parse_config(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn negative_coupling_is_one_violation() {
        let mut c = ConfigFile::default();
        c.device.g_bus[2] = -5.0;
        let r = check_config(&c);
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].field, "g_bus[2]");
        assert!(r.has_errors());
    }

    #[test]
    fn near_bus_idle_is_warning() {
        let mut c = ConfigFile::default();
        c.device.f_idle[0] = 6.2;
        let r = check_config(&c);
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].severity, Severity::Warning);
        assert!(r.entries[0].message.contains("coupling-off regime violated"));
        assert!(!r.has_errors());
    }

    #[test]
    fn noise_length_mismatch_reported() {
        let mut c = ConfigFile::default();
        c.noise = Some(NoiseParams::invented_default(3));
        assert!(check_config(&c).has_errors());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Invariant("x".into())), 2);
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), 1);
        assert_eq!(exit_code(&Error::Parse { line: 1, message: String::new() }), 1);
    }

    #[test]
    fn grid_includes_endpoint() {
        let g = grid(6.0, 6.02, 0.005).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4] - 6.02).abs() < 1e-12);
        assert!(grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn qubit_numbers_are_one_based() {
        assert_eq!(to_zero_based(&[1, 4], 4).unwrap(), vec![0, 3]);
        assert!(to_zero_based(&[0], 4).is_err());
        assert!(to_zero_based(&[5], 4).is_err());
    }

    #[test]
    fn experiment_json_is_tagged() {
        let e = Experiment::shor(ShorVariant::ThreeQubit);
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["name"], "shor");
        assert_eq!(v["variant"], "three_qubit");
        assert_eq!(serde_json::from_value::<Experiment>(v).unwrap(), e);
    }
}
