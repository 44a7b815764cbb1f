use std::path::Path;

use qproc_core::circuits::ShorVariant;
use qproc_core::harness::{
    read_spectroscopy_csv, read_trace_csv, run_experiment, ConfigFile, EntangleReport, Experiment, ExperimentSpec,
    Manifest, RabiFit, ShorReport, SpectroscopySummary,
};
use qproc_core::tomography::TomographyRecord;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run(dir: &Path, experiment: Experiment, seed: u64) {
    let spec = ExperimentSpec { experiment, seed, output_dir: dir.to_path_buf() };
    run_experiment(&spec, &ConfigFile::default()).unwrap();
}

#[test]
fn spectroscopy_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let experiment = Experiment::Spectroscopy {
        qubit: 1,
        f_min_ghz: 6.0,
        f_max_ghz: 6.9,
        f_step_ghz: 0.01,
        tau_max_ns: 100.0,
        tau_step_ns: 2.5,
    };
    run(dir.path(), experiment.clone(), 1);
    let map = read_spectroscopy_csv(&dir.path().join("spectroscopy.csv"), 0).unwrap();
    assert_eq!(map.freqs.len(), 91);
    assert_eq!(map.taus.len(), 41);
    let direct = qproc_core::dynamics::swap_spectroscopy(&ConfigFile::default().device, 0, &map.freqs, &map.taus).unwrap();
    assert_eq!(map.p_e, direct.p_e);
    let summary: SpectroscopySummary = read_json(&dir.path().join("spectroscopy_summary.json"));
    assert_eq!(summary.chevron_centers_ghz, map.chevron_centers(summary.threshold));
    let manifest: Manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest.experiment, experiment);
    assert_eq!(manifest.config, ConfigFile::default());
}

#[test]
fn rabi_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let experiment = Experiment::RabiScaling { qubits: vec![2, 3], duration_ns: 100.0, sample_dt_ns: 0.5, coupling_mhz: Some(56.5) };
    run(dir.path(), experiment, 0);
    let fits: Vec<RabiFit> = read_json(&dir.path().join("rabi_fits.json"));
    assert_eq!(fits.len(), 2);
    assert_eq!(fits[1].participants, vec![2, 3]);
    for fit in &fits {
        let trace = read_trace_csv(&dir.path().join(format!("rabi_n{}.csv", fit.n))).unwrap();
        assert_eq!(trace.p_qubit.len(), 4);
        assert_eq!(trace.len(), 201);
        let refit = qproc_core::dynamics::fit_oscillation(&trace.times, &trace.p_bus).unwrap();
        assert_eq!(refit.frequency_mhz, fit.frequency_mhz);
        assert!((fit.frequency_mhz - fit.collective_coupling_mhz).abs() < 0.02 * fit.collective_coupling_mhz);
    }
}

#[test]
fn entangle_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), Experiment::Entangle { shots_per_setting: 3000, coupling_mhz: None }, 2);
    let bell: EntangleReport = read_json(&dir.path().join("entangle_bell.json"));
    let w: EntangleReport = read_json(&dir.path().join("entangle_w.json"));
    assert!(bell.gauged_fidelity > 0.99 && w.gauged_fidelity > 0.99);
    assert!(w.witness.unwrap().passed);
    assert!(bell.tomography.metrics["fidelity"] > 0.95);
    assert_eq!(w.tomography.settings.len(), 27);
    let rho = bell.tomography.rho_hat.as_ref().unwrap();
    assert!((rho.trace() - 1.0).abs() < 1e-9);
}

#[test]
fn shor_files_round_trip_and_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        run(&dir.path().join(sub), Experiment::shor(ShorVariant::ThreeQubit), 7);
    }
    let report: ShorReport = read_json(&dir.path().join("a/factoring.json"));
    assert_eq!(report.result.factors, Some((3, 5)));
    assert_eq!(report.result.period_r, Some(2));
    assert!((0.496..=0.504).contains(&report.result.success_probability));
    for file in &report.breakpoint_files {
        let record: TomographyRecord = read_json(&dir.path().join("a").join(file));
        assert!(record.metrics["fidelity"] > 0.97, "{file}: {:?}", record.metrics);
        let text = std::fs::read_to_string(dir.path().join("a").join(file)).unwrap();
        let again = serde_json::to_string_pretty(&record).unwrap() + "\n";
        assert_eq!(text, again);
    }
    let step3: TomographyRecord = read_json(&dir.path().join("a/breakpoint_step3.json"));
    assert!(step3.metrics["register_linear_entropy"] > 0.95);
    for entry in std::fs::read_dir(dir.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?}");
    }
}

#[test]
fn noisy_shor_reports_its_noise() {
    let dir = tempfile::tempdir().unwrap();
    let experiment = Experiment::Shor { variant: ShorVariant::ThreeQubit, shots: 20_000, shots_per_setting: 2000, noisy: true };
    run(dir.path(), experiment, 11);
    let report: ShorReport = read_json(&dir.path().join("factoring.json"));
    assert_eq!(report.mode, "noisy_density");
    assert!(report.noise.unwrap().invented_default);
    assert!(report.exact_distribution["10"] < 0.5);
    let step1: TomographyRecord = read_json(&dir.path().join("breakpoint_step1.json"));
    assert!(step1.metrics["pair_fidelity_phi_plus"] < 0.99);
}

#[test]
fn invalid_config_is_rejected_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ConfigFile::default();
    config.device.g_bus[0] = -1.0;
    let spec = ExperimentSpec { experiment: Experiment::entangle(), seed: 0, output_dir: dir.path().join("out") };
    let err = run_experiment(&spec, &config).unwrap_err();
    assert_eq!(qproc_core::harness::exit_code(&err), 1);
    assert!(!dir.path().join("out").exists());
}
