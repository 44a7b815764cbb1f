//! Browser bindings: each entry point returns a JSON string for the demo page.

use std::collections::BTreeMap;

use qproc_core::circuits::{build_shor, output_distribution, run_circuit, RunMode, ShorVariant};
use qproc_core::dynamics::{
    collective_coupling_mhz, fit_oscillation, simultaneous_resonance, swap_spectroscopy, DeviceConfig,
};
use qproc_core::hilbert::{DensityMatrix, State};
use qproc_core::noise::NoiseParams;
use qproc_core::tomography::uhlmann_fidelity;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const CHEVRON_THRESHOLD: f64 = 0.75;

#[derive(Serialize)]
struct SpectroscopyView {
    freqs: Vec<f64>,
    taus: Vec<f64>,
    p_e: Vec<Vec<f64>>,
    centers: Vec<f64>,
}

#[derive(Serialize)]
struct RabiView {
    times: Vec<f64>,
    p_bus: Vec<f64>,
    fitted_mhz: f64,
    error_mhz: f64,
    expected_mhz: f64,
}

#[derive(Serialize)]
struct MatrixView {
    name: String,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    fidelity: f64,
    purity: f64,
}

#[derive(Serialize)]
struct ShorView {
    ideal: BTreeMap<String, f64>,
    noisy: BTreeMap<String, f64>,
    breakpoints: Vec<MatrixView>,
}

fn grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 || !(max > min) {
        return Err("grid needs at least 2 points and max > min".into());
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points).map(|k| min + step * k as f64).collect())
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Swap spectroscopy of one qubit (0-based) on the default device.
pub fn spectroscopy_json(qubit: usize, f_min: f64, f_max: f64, n_freq: usize, tau_max: f64, n_tau: usize) -> Result<String, String> {
    let config = DeviceConfig::default();
    let freqs = grid(f_min, f_max, n_freq)?;
    let taus = grid(0.0, tau_max, n_tau)?;
    let map = swap_spectroscopy(&config, qubit, &freqs, &taus).map_err(|e| e.to_string())?;
    let centers = map.chevron_centers(CHEVRON_THRESHOLD);
    json(&SpectroscopyView { freqs: map.freqs, taus: map.taus, p_e: map.p_e, centers })
}

/// Bus population with the first `n` qubits on resonance, every bus coupling set to `g_mhz`.
pub fn rabi_json(n: usize, g_mhz: f64, duration_ns: f64) -> Result<String, String> {
    if !(g_mhz > 0.0) {
        return Err("coupling must be positive".into());
    }
    let config = DeviceConfig::default().with_uniform_bus_coupling(g_mhz);
    let participants: Vec<usize> = (0..n).collect();
    let trace = simultaneous_resonance(&config, &participants, duration_ns, 0.25).map_err(|e| e.to_string())?;
    let fit = fit_oscillation(&trace.times, &trace.p_bus).map_err(|e| e.to_string())?;
    json(&RabiView {
        times: trace.times,
        p_bus: trace.p_bus,
        fitted_mhz: fit.frequency_mhz,
        error_mhz: fit.error_mhz,
        expected_mhz: collective_coupling_mhz(&config, &participants),
    })
}

fn matrix_view(name: &str, rho: &DensityMatrix, ideal: &DensityMatrix) -> Result<MatrixView, String> {
    let m = rho.elements();
    let rows = |f: fn(&qproc_core::hilbert::C64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    let f = uhlmann_fidelity(rho, ideal).map_err(|e| e.to_string())?;
    Ok(MatrixView {
        name: name.to_string(),
        re: rows(|z| z.re),
        im: rows(|z| z.im),
        fidelity: f * f,
        purity: rho.purity(),
    })
}

/// Ideal and noisy Shor runs; `t1_ns` / `t_phi_ns` of 0 turn that process off.
pub fn shor_json(variant: &str, t1_ns: f64, t_phi_ns: f64) -> Result<String, String> {
    let variant: ShorVariant = variant.parse().map_err(|e: qproc_core::Error| e.to_string())?;
    let circuit = build_shor(variant);
    let rate = |t: f64| if t == 0.0 { f64::INFINITY } else { t };
    let noise = NoiseParams { t1: vec![rate(t1_ns); 4], t_phi: vec![rate(t_phi_ns); 4], ..NoiseParams::invented_default(4) };
    noise.validate().map_err(|e| e.to_string())?;
    let ideal = run_circuit(&circuit, RunMode::IdealPure, None).map_err(|e| e.to_string())?;
    let noisy = run_circuit(&circuit, RunMode::NoisyDensity, Some(&noise)).map_err(|e| e.to_string())?;
    let dist = |s: &State| output_distribution(s, &circuit.measured_register, circuit.output_padding).map_err(|e| e.to_string());
    let breakpoints = noisy
        .breakpoints
        .iter()
        .zip(&ideal.breakpoints)
        .map(|((name, rho), (_, psi))| matrix_view(name, &rho.to_density(), &psi.to_density()))
        .collect::<Result<Vec<_>, _>>()?;
    json(&ShorView { ideal: dist(&ideal.final_state)?, noisy: dist(&noisy.final_state)?, breakpoints })
}

#[wasm_bindgen]
pub fn spectroscopy(qubit: usize, f_min: f64, f_max: f64, n_freq: usize, tau_max: f64, n_tau: usize) -> Result<String, JsError> {
    spectroscopy_json(qubit, f_min, f_max, n_freq, tau_max, n_tau).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn rabi(n: usize, g_mhz: f64, duration_ns: f64) -> Result<String, JsError> {
    rabi_json(n, g_mhz, duration_ns).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn shor(variant: &str, t1_ns: f64, t_phi_ns: f64) -> Result<String, JsError> {
    shor_json(variant, t1_ns, t_phi_ns).map_err(|e| JsError::new(&e))
}
