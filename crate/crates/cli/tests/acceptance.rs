//! Acceptance criteria, one PASS/FAIL line each.

use std::collections::BTreeMap;
use std::panic;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qproc_core::circuits::{
    build_shor, classical_factors, extract_period, output_distribution, run_circuit, sample_output, RunMode,
    ShorVariant,
};
use qproc_core::dynamics::{
    fit_oscillation, prepare_shared_excitation, pump_fock, simultaneous_resonance, swap_spectroscopy, swap_time_ns,
    DeviceConfig,
};
use qproc_core::hilbert::{
    hermitian_exponential, CMatrix, DensityMatrix, Factor, QuantumOperator, QuantumState, SpaceLayout, State, C64,
};
use qproc_core::noise::NoiseParams;
use qproc_core::states;
use qproc_core::tomography::{
    concurrence_eof, gauged_fidelity, linear_entropy, reconstruct, simulate_tomography, state_fidelity,
    uhlmann_fidelity, witness_check, WitnessClass,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn equal_coupling() -> DeviceConfig {
    DeviceConfig::default().with_uniform_bus_coupling(56.5)
}

fn sqrt_n_scaling() -> Outcome {
    let config = equal_coupling();
    let expected = [56.5, 79.9, 97.9, 113.0];
    let mut got = Vec::new();
    for n in 1..=4 {
        let participants: Vec<usize> = (0..n).collect();
        let trace = simultaneous_resonance(&config, &participants, 200.0, 0.25).map_err(err)?;
        let fit = fit_oscillation(&trace.times, &trace.p_bus).map_err(err)?;
        let want = expected[n - 1];
        ensure(
            (fit.frequency_mhz - want).abs() <= 0.01 * want,
            format!("N={n}: fitted {:.2} MHz, expected {want}", fit.frequency_mhz),
        )?;
        // the closed form, for the rounding in the quoted values
        let exact = 56.5 * (n as f64).sqrt();
        ensure((fit.frequency_mhz - exact).abs() <= 0.01 * exact, format!("N={n}: off 56.5 sqrt(N)"))?;
        got.push(format!("{:.2}±{:.2}", fit.frequency_mhz, fit.error_mhz));
    }
    Ok(format!("fitted MHz {}", got.join(", ")))
}

fn iswap_timing() -> Outcome {
    let config = DeviceConfig::default();
    let tau = swap_time_ns(55.0);
    ensure((tau - 9.09).abs() < 0.01, format!("tau = {tau}"))?;
    let psi = pump_fock(&config).map_err(err)?;
    let mut digits = vec![0; psi.layout().len()];
    digits[0] = 1;
    let p = psi.amplitudes()[psi.layout().index(&digits)].norm_sqr();
    ensure(p >= 0.999, format!("transfer {p}"))?;
    Ok(format!("transfer {p:.9} at {tau:.3} ns"))
}

fn spectroscopy() -> Outcome {
    let config = DeviceConfig::default();
    let step = 0.005;
    let freqs: Vec<f64> = (0..=300).map(|k| 5.9 + k as f64 * step).collect();
    let taus: Vec<f64> = (0..=100).map(|k| 2.0 * k as f64).collect();
    let map = swap_spectroscopy(&config, 0, &freqs, &taus).map_err(err)?;
    let centers = map.chevron_centers(0.75);
    ensure(centers.len() == 2, format!("expected two chevrons, found {centers:?}"))?;
    for (c, want) in centers.iter().zip([6.1, 6.8]) {
        ensure((c - want).abs() <= step + 1e-9, format!("centre {c} vs {want}"))?;
    }

    let fine: Vec<f64> = (0..=800).map(|k| 0.25 * k as f64).collect();
    let mut report = Vec::new();
    for delta_mhz in [50.0, 100.0, 200.0] {
        let f = config.f_bus + delta_mhz * 1e-3;
        let scan = swap_spectroscopy(&config, 0, &[f], &fine).map_err(err)?;
        let fit = fit_oscillation(&fine, &scan.p_e[0]).map_err(err)?;
        let want = (55.0f64.powi(2) + delta_mhz.powi(2)).sqrt();
        ensure(
            (fit.frequency_mhz - want).abs() <= 0.02 * want,
            format!("delta {delta_mhz}: {:.2} vs {want:.2} MHz", fit.frequency_mhz),
        )?;
        report.push(format!("{:.1}/{want:.1}", fit.frequency_mhz));
    }
    Ok(format!("centres {centers:?} GHz; detuned fit/expected MHz {}", report.join(", ")))
}

fn entanglement() -> Outcome {
    let config = equal_coupling();
    let bell = prepare_shared_excitation(&config, &[0, 1]).map_err(err)?;
    let gb = gauged_fidelity(&bell.state, &states::singlet()).map_err(err)?;
    ensure(gb.gauged >= 0.99, format!("Bell gauged fidelity {}", gb.gauged))?;
    let w = prepare_shared_excitation(&config, &[0, 1, 2]).map_err(err)?;
    let gw = gauged_fidelity(&w.state, &states::w_state(3)).map_err(err)?;
    ensure(gw.gauged >= 0.99, format!("W gauged fidelity {}", gw.gauged))?;

    let w_rho = gw.gauged_state.to_density();
    let ww = witness_check(&w_rho, WitnessClass::W, &states::w_state(3)).map_err(err)?;
    ensure(ww.passed && ww.margin > 0.3, format!("W witness margin {}", ww.margin))?;

    let run = run_circuit(&build_shor(ShorVariant::ThreeQubit), RunMode::IdealPure, None).map_err(err)?;
    let ghz_rho = run.breakpoint("step2").ok_or("missing step2")?.to_density();
    let wg = witness_check(&ghz_rho, WitnessClass::Ghz, &states::ghz(3)).map_err(err)?;
    ensure(wg.passed && wg.margin > 0.3, format!("GHZ witness margin {}", wg.margin))?;
    Ok(format!(
        "Bell {:.6} (raw {:.3}, {:.2} ns), W {:.6} (raw {:.3}, {:.2} ns), margins W {:.3} GHZ {:.3}",
        gb.gauged, gb.raw, bell.stop_time_ns, gw.gauged, gw.raw, w.stop_time_ns, ww.margin, wg.margin
    ))
}

fn shor_ideal() -> Outcome {
    let circuit = build_shor(ShorVariant::ThreeQubit);
    let run = run_circuit(&circuit, RunMode::IdealPure, None).map_err(err)?;
    let dist = output_distribution(&run.final_state, &circuit.measured_register, circuit.output_padding).map_err(err)?;
    ensure(dist.len() == 2, format!("distribution {dist:?}"))?;
    for key in ["00", "10"] {
        let p = dist.get(key).copied().unwrap_or(0.0);
        ensure((p - 0.5).abs() < 1e-12, format!("P({key}) = {p}"))?;
    }
    let counts = sample_output(&run.final_state, &circuit.measured_register, circuit.output_padding, 150_000, 7)
        .map_err(err)?;
    let success = counts.get("10").copied().unwrap_or(0) as f64 / 150_000.0;
    ensure((0.496..=0.504).contains(&success), format!("success frequency {success}"))?;
    let r = extract_period("10", 2).map_err(err)?;
    ensure(r == Some(2), format!("period {r:?}"))?;
    let f = classical_factors(4, 2, 15).map_err(err)?;
    ensure(f == Some((3, 5)), format!("factors {f:?}"))?;
    let fid = |name: &str, target: &QuantumState| -> Result<f64, String> {
        let rho = run.breakpoint(name).ok_or(format!("missing {name}"))?.to_density();
        state_fidelity(&rho, target).map_err(err)
    };
    let f2 = fid("step2", &states::ghz(3))?;
    let f3 = fid("step3", &states::psi3())?;
    ensure((f2 - 1.0).abs() < 1e-9 && (f3 - 1.0).abs() < 1e-9, format!("breakpoint fidelities {f2}, {f3}"))?;
    Ok(format!("success {success:.5}, r=2, factors (3, 5), breakpoint fidelities {f2:.12} {f3:.12}"))
}

fn control() -> Outcome {
    let circuit = build_shor(ShorVariant::Control);
    let run = run_circuit(&circuit, RunMode::IdealPure, None).map_err(err)?;
    let counts = sample_output(&run.final_state, &circuit.measured_register, circuit.output_padding, 10_000, 3)
        .map_err(err)?;
    ensure(counts.len() == 1 && counts.get("00") == Some(&10_000), format!("ideal counts {counts:?}"))?;
    let mut fids = Vec::new();
    for t1 in [200.0, 400.0, 800.0, 1600.0] {
        let noise = NoiseParams::damping_only(4, t1);
        let noisy = run_circuit(&circuit, RunMode::NoisyDensity, Some(&noise)).map_err(err)?;
        fids.push(state_fidelity(&noisy.final_state.to_density(), &states::ground(3)).map_err(err)?);
    }
    ensure(fids.iter().all(|f| *f < 1.0), format!("fidelities {fids:?}"))?;
    ensure(fids.windows(2).all(|w| w[0] < w[1]), format!("not monotone: {fids:?}"))?;
    Ok(format!("ideal 100% \"00\"; damped fidelity vs T1 200/400/800/1600 ns: {fids:.4?}"))
}

fn tomography_round_trip() -> Outcome {
    let mut report = Vec::new();
    let cases = [("Bell", states::singlet()), ("W", states::w_state(3)), ("GHZ", states::ghz(3)), ("psi3", states::psi3())];
    for (seed, (name, psi)) in cases.into_iter().enumerate() {
        let n = psi.layout().len();
        let qubits: Vec<usize> = (0..n).collect();
        let state: State = psi.clone().into();
        let record = simulate_tomography(&state, &qubits, 10_000, 100 + seed as u64).map_err(err)?;
        ensure(record.settings.len() == 3usize.pow(n as u32), "setting count")?;
        let rho = reconstruct(&record).map_err(err)?;
        let f = state_fidelity(&rho, &psi).map_err(err)?;
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        ensure(f >= 0.98, format!("{name}: fidelity {f}"))?;
        ensure(min >= -1e-9 && (rho.trace() - 1.0).abs() <= 1e-9, format!("{name}: min eig {min}, trace {}", rho.trace()))?;
        report.push(format!("{name} F={f:.4} max|Im|={:.4}", rho.max_imag()));
    }
    Ok(report.join("; "))
}

/// exp(-i 2π H t) by scaling and squaring around a 40-term Taylor series.
fn taylor_exponential(h: &CMatrix, t: f64) -> CMatrix {
    let d = h.nrows();
    let m = h * C64::new(0.0, -2.0 * std::f64::consts::PI * t);
    let norm = m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let a = m * C64::from(0.5f64.powi(squarings as i32));
    let mut sum = CMatrix::identity(d, d);
    let mut term = CMatrix::identity(d, d);
    for k in 1..=40 {
        term = &term * &a * C64::from(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn taylor_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2011);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let d = 2 + (k * 30) / 49;
        let raw = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let h = (&raw + raw.adjoint()) * C64::from(0.5);
        let t = rng.random_range(0.0..5.0);
        let layout = SpaceLayout::new(vec![Factor::resonator(d - 1).map_err(err)?]).map_err(err)?;
        let op = QuantumOperator::new(layout, h.clone()).map_err(err)?;
        let u = hermitian_exponential(&op, t).map_err(err)?;
        let diff = (u.elements() - taylor_exponential(&h, t)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    ensure(worst <= 1e-9, format!("max elementwise difference {worst:e}"))?;
    Ok(format!("50 matrices, dims 2..32, max difference {worst:.2e}"))
}

fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
    let d = 1 << n;
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(SpaceLayout::qubits(n), m / tr).expect("Ginibre matrices are valid states")
}

fn metric_identities() -> Outcome {
    let eof = concurrence_eof(&states::singlet().to_density()).map_err(err)?.eof;
    ensure((eof - 1.0).abs() <= 1e-9, format!("EOF(singlet) = {eof}"))?;

    let p = 0.5;
    let werner = states::singlet().to_density().elements() * C64::from(p)
        + CMatrix::identity(4, 4) * C64::from((1.0 - p) / 4.0);
    let werner = DensityMatrix::new(SpaceLayout::qubits(2), werner).map_err(err)?;
    let c = concurrence_eof(&werner).map_err(err)?.concurrence;
    ensure((c - 0.25).abs() <= 1e-9, format!("C(Werner 0.5) = {c}"))?;

    let sl = linear_entropy(&DensityMatrix::maximally_mixed(SpaceLayout::qubits(1)));
    ensure((sl - 1.0).abs() <= 1e-9, format!("S_L(I/2) = {sl}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for n in [1, 2, 3] {
        for _ in 0..10 {
            let rho = random_density(&mut rng, n);
            let amps = qproc_core::hilbert::CVector::from_fn(1 << n, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let psi = QuantumState::normalized(SpaceLayout::qubits(n), amps).map_err(err)?;
            let u = uhlmann_fidelity(&rho, &psi.to_density()).map_err(err)?;
            let f = state_fidelity(&rho, &psi).map_err(err)?;
            worst = worst.max((u * u - f).abs());
        }
    }
    ensure(worst <= 1e-9, format!("uhlmann^2 vs <psi|rho|psi> differ by {worst:e}"))?;
    Ok(format!("EOF {eof:.12}, C {c:.12}, S_L {sl:.12}, max |F_U^2 - F| {worst:.1e}"))
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .expect("output directory exists")
        .map(|e| {
            let e = e.expect("readable entry");
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("readable file"))
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_qproc-sim"))
            .args(["shor", "--seed", "7", "--out"])
            .arg(&dir)
            .output()
            .map_err(err)?;
        ensure(status.status.success(), format!("run {run} failed: {}", String::from_utf8_lossy(&status.stderr)))?;
        outputs.push(read_dir_bytes(&dir));
    }
    ensure(!outputs[0].is_empty(), "no files written")?;
    let names: Vec<&String> = outputs[0].keys().collect();
    ensure(outputs[0] == outputs[1], "outputs differ between runs")?;
    Ok(format!("{} files identical: {names:?}", names.len()))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: 1, name: "sqrt(N) scaling", limit: secs(10), run: sqrt_n_scaling },
        Criterion { id: 2, name: "iSWAP timing", limit: secs(1), run: iswap_timing },
        Criterion { id: 3, name: "swap spectroscopy", limit: secs(60), run: spectroscopy },
        Criterion { id: 4, name: "entanglement preparation", limit: secs(5), run: entanglement },
        Criterion { id: 5, name: "Shor ideal", limit: secs(5), run: shor_ideal },
        Criterion { id: 6, name: "control experiment", limit: secs(5), run: control },
        Criterion { id: 7, name: "tomography round-trip", limit: secs(30), run: tomography_round_trip },
        Criterion { id: 8, name: "Taylor oracle", limit: secs(10), run: taylor_oracle },
        Criterion { id: 9, name: "metric identities", limit: None, run: metric_identities },
        Criterion { id: 10, name: "determinism", limit: None, run: determinism },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS  {:>2} {} ({elapsed:.2?}): {detail}", c.id, c.name),
            Err(why) => {
                failures += 1;
                println!("FAIL  {:>2} {} ({elapsed:.2?}): {why}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
