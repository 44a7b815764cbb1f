//! Jaynes-Cummings dynamics of tunable qubits coupled to a resonator.
//!
//! Hamiltonians are written in the frame rotating at a reference frequency
//! and carry frequency units (GHz); [`hermitian_exponential`] supplies the
//! 2π. Layouts list resonators first, then qubits, matching kets written as
//! `|n⟩ ⊗ |q1 q2 ...⟩`.
//!
//! [`hermitian_exponential`]: crate::hilbert::hermitian_exponential

mod config;
mod fit;

pub use config::{CouplingMode, DeviceConfig, Severity, Violation, COUPLING_OFF_RATIO, OPERATING_HALF_RANGE_GHZ};
pub use fit::{fit_oscillation, OscillationFit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    CMatrix, Factor, QuantumOperator, QuantumState, SpaceLayout, SpectralPropagator, State, C64, ONE, ZERO,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resonator {
    Bus,
    /// Memory resonator attached to the given (0-based) qubit.
    Memory(usize),
}

fn lowering(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    a
}

fn number(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| if i == j { C64::from(i as f64) } else { ZERO })
}

fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

/// Resonators followed by qubits, each resonator truncated at `n_max`.
struct Model {
    layout: SpaceLayout,
    n_resonators: usize,
}

impl Model {
    fn new(n_resonators: usize, n_qubits: usize, n_max: usize) -> Result<Self> {
        let mut factors = vec![Factor::resonator(n_max)?; n_resonators];
        factors.extend(std::iter::repeat_n(Factor::qubit(), n_qubits));
        Ok(Self { layout: SpaceLayout::new(factors)?, n_resonators })
    }

    fn qubit_factor(&self, q: usize) -> usize {
        self.n_resonators + q
    }

    /// H = Σ_r (f_r - f_frame) a†a + Σ_q (f_q - f_frame) σ⁺σ⁻ + Σ (g/2)(a†σ⁻ + aσ⁺)
    fn hamiltonian(
        &self,
        resonator_freqs: &[f64],
        qubit_freqs: &[f64],
        couplings: &[(usize, usize, f64)],
        frame: f64,
    ) -> Result<QuantumOperator> {
        let l = &self.layout;
        let mut h = CMatrix::zeros(l.total_dim(), l.total_dim());
        let mut annihilators = Vec::with_capacity(self.n_resonators);
        for (r, f) in resonator_freqs.iter().enumerate() {
            let dim = l.factors()[r].dim;
            let a = QuantumOperator::embed(l, r, &lowering(dim))?;
            let detuning = f - frame;
            if detuning != 0.0 {
                h += QuantumOperator::embed(l, r, &number(dim))?.elements() * C64::from(detuning);
            }
            annihilators.push(a);
        }
        let mut lowerings = Vec::with_capacity(qubit_freqs.len());
        for (q, f) in qubit_freqs.iter().enumerate() {
            let k = self.qubit_factor(q);
            let detuning = f - frame;
            if detuning != 0.0 {
                h += QuantumOperator::embed(l, k, &number(2))?.elements() * C64::from(detuning);
            }
            lowerings.push(QuantumOperator::embed(l, k, &sigma_minus())?);
        }
        for &(q, r, g) in couplings {
            if g == 0.0 {
                continue;
            }
            let a = annihilators[r].elements();
            let sm = lowerings[q].elements();
            let term = a.adjoint() * sm;
            h += (&term + term.adjoint()) * C64::from(g / 2.0);
        }
        QuantumOperator::new(l.clone(), h)
    }
}

/// Layout used for bus (or single-memory) dynamics: `[resonator, Q1, ..., Qn]`.
pub fn jc_layout(config: &DeviceConfig) -> Result<SpaceLayout> {
    Ok(Model::new(1, config.n_qubits, config.n_max)?.layout)
}

fn coupling_active(mode: CouplingMode, detuning: f64, g: f64) -> bool {
    match mode {
        CouplingMode::AlwaysOn => true,
        CouplingMode::Switched => detuning.abs() < COUPLING_OFF_RATIO * g,
    }
}

/// Rotating-frame Jaynes-Cummings Hamiltonian (GHz) for all qubits and one resonator.
///
/// `H = Σᵢ Δᵢ σᵢ⁺σᵢ⁻ + Σᵢ (gᵢ/2)(a†σᵢ⁻ + aσᵢ⁺)` with `Δᵢ = fᵢ − f_res`.
pub fn build_jc_hamiltonian(config: &DeviceConfig, qubit_freqs: &[f64], resonator: Resonator) -> Result<QuantumOperator> {
    if qubit_freqs.len() != config.n_qubits {
        return Err(Error::LayoutMismatch(format!(
            "{} qubit frequencies for {} qubits",
            qubit_freqs.len(),
            config.n_qubits
        )));
    }
    let model = Model::new(1, config.n_qubits, config.n_max)?;
    let f_res = match resonator {
        Resonator::Bus => config.f_bus,
        Resonator::Memory(m) => {
            config.check_qubit(m).map_err(|_| Error::InvalidArgument(format!("unknown memory resonator {m}")))?;
            config.f_memory[m]
        }
    };
    let couplings: Vec<(usize, usize, f64)> = (0..config.n_qubits)
        .filter_map(|q| {
            let g = match resonator {
                Resonator::Bus => config.g_bus_ghz(q),
                Resonator::Memory(m) if m == q => config.g_mem_ghz(q),
                Resonator::Memory(_) => 0.0,
            };
            coupling_active(config.coupling_mode, qubit_freqs[q] - f_res, g).then_some((q, 0, g))
        })
        .collect();
    model.hamiltonian(&[f_res], qubit_freqs, &couplings, f_res)
}

/// Σᵢ σᵢ⁺σᵢ⁻ + Σ_r a†a on a resonators-then-qubits layout.
pub fn excitation_number(layout: &SpaceLayout) -> Result<QuantumOperator> {
    let mut total = QuantumOperator::zeros(layout.clone());
    for (k, f) in layout.factors().iter().enumerate() {
        total = total.add(&QuantumOperator::embed(layout, k, &number(f.dim))?)?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration_ns: f64,
    /// One frequency per qubit, GHz.
    pub qubit_freqs: Vec<f64>,
    /// Qubits receiving an ideal π-pulse at the start of the segment.
    #[serde(default)]
    pub pi_pulses: Vec<usize>,
}

/// Piecewise-constant qubit frequencies against one resonator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySchedule {
    pub resonator: Resonator,
    pub segments: Vec<Segment>,
}

impl FrequencySchedule {
    pub fn new(resonator: Resonator) -> Self {
        Self { resonator, segments: Vec::new() }
    }

    pub fn segment(mut self, duration_ns: f64, qubit_freqs: Vec<f64>) -> Self {
        self.segments.push(Segment { duration_ns, qubit_freqs, pi_pulses: Vec::new() });
        self
    }

    pub fn pulsed_segment(mut self, duration_ns: f64, qubit_freqs: Vec<f64>, pi_pulses: Vec<usize>) -> Self {
        self.segments.push(Segment { duration_ns, qubit_freqs, pi_pulses });
        self
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_ns).sum()
    }

    pub fn validate(&self, config: &DeviceConfig) -> Result<()> {
        for (k, s) in self.segments.iter().enumerate() {
            if !(s.duration_ns >= 0.0 && s.duration_ns.is_finite()) {
                return Err(Error::InvalidArgument(format!("segment {k}: duration {} ns", s.duration_ns)));
            }
            if s.qubit_freqs.len() != config.n_qubits {
                return Err(Error::LayoutMismatch(format!("segment {k}: {} frequencies", s.qubit_freqs.len())));
            }
            for (q, (f, idle)) in s.qubit_freqs.iter().zip(&config.f_idle).enumerate() {
                if (f - idle).abs() > OPERATING_HALF_RANGE_GHZ + 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "segment {k}: qubit {q} at {f} GHz is outside its operating range around {idle} GHz"
                    )));
                }
            }
            if let Some(&q) = s.pi_pulses.iter().find(|&&q| q >= config.n_qubits) {
                return Err(Error::IndexOutOfRange { index: q, len: config.n_qubits });
            }
        }
        Ok(())
    }
}

/// Occupation probabilities sampled during a schedule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OccupationTrace {
    pub times: Vec<f64>,
    /// `p_qubit[i][t]`: probability qubit i is excited.
    pub p_qubit: Vec<Vec<f64>>,
    /// Probability the resonator holds exactly one photon.
    pub p_bus: Vec<f64>,
    /// Probability of no excitation anywhere.
    pub p_vacuum: Vec<f64>,
}

impl OccupationTrace {
    fn with_qubits(n: usize) -> Self {
        Self { p_qubit: vec![Vec::new(); n], ..Default::default() }
    }

    fn push(&mut self, t: f64, occ: Occupation) {
        self.times.push(t);
        for (series, p) in self.p_qubit.iter_mut().zip(occ.qubits) {
            series.push(p);
        }
        self.p_bus.push(occ.bus);
        self.p_vacuum.push(occ.vacuum);
    }

    fn replace_last(&mut self, occ: Occupation) {
        if self.times.is_empty() {
            return;
        }
        for (series, p) in self.p_qubit.iter_mut().zip(occ.qubits) {
            *series.last_mut().expect("series aligned with times") = p;
        }
        *self.p_bus.last_mut().expect("aligned") = occ.bus;
        *self.p_vacuum.last_mut().expect("aligned") = occ.vacuum;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

struct Occupation {
    qubits: Vec<f64>,
    bus: f64,
    vacuum: f64,
}

/// Marginal occupations on a `[resonator, qubits...]` layout.
struct OccupationReader {
    digits: Vec<Vec<usize>>,
    n_qubits: usize,
}

impl OccupationReader {
    fn new(layout: &SpaceLayout) -> Self {
        Self {
            digits: (0..layout.total_dim()).map(|i| layout.digits(i)).collect(),
            n_qubits: layout.len() - 1,
        }
    }

    fn read(&self, probs: &[f64]) -> Occupation {
        let mut occ = Occupation { qubits: vec![0.0; self.n_qubits], bus: 0.0, vacuum: 0.0 };
        for (d, &p) in self.digits.iter().zip(probs) {
            if d[0] == 1 {
                occ.bus += p;
            }
            for (q, &bit) in d[1..].iter().enumerate() {
                if bit == 1 {
                    occ.qubits[q] += p;
                }
            }
            if d.iter().all(|&x| x == 0) {
                occ.vacuum += p;
            }
        }
        occ
    }
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub trace: OccupationTrace,
    pub final_state: State,
}

fn sample_times(duration: f64, dt: f64) -> Vec<f64> {
    if duration <= 0.0 {
        return Vec::new();
    }
    let eps = 1e-9 * dt.max(1.0);
    let steps = (duration / dt + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (1..=steps).map(|k| k as f64 * dt).collect();
    if out.last().is_none_or(|&t| t < duration - eps) {
        out.push(duration);
    } else if let Some(last) = out.last_mut() {
        *last = duration;
    }
    out
}

/// Evolve `state` through `schedule`, sampling occupations every `sample_dt`.
///
/// A segment shorter than `sample_dt` contributes a single sample at its end.
/// π-pulses act instantaneously at the start of their segment; a sample taken
/// at that instant shows the post-pulse state.
pub fn propagate(state: &State, schedule: &FrequencySchedule, config: &DeviceConfig, sample_dt: f64) -> Result<Propagation> {
    if !(sample_dt > 0.0) {
        return Err(Error::InvalidArgument(format!("sample_dt must be positive, got {sample_dt}")));
    }
    schedule.validate(config)?;
    let layout = jc_layout(config)?;
    if state.layout() != &layout {
        return Err(Error::LayoutMismatch("state layout does not match the device model".into()));
    }
    let reader = OccupationReader::new(&layout);
    let mut trace = OccupationTrace::with_qubits(config.n_qubits);
    let mut current = state.clone();
    let mut elapsed = 0.0;

    for (k, seg) in schedule.segments.iter().enumerate() {
        for &q in &seg.pi_pulses {
            let x = QuantumOperator::embed(&layout, q + 1, &pauli_x())?;
            current = current.evolve(&x)?;
        }
        if k == 0 {
            trace.push(0.0, reader.read(&current.probabilities()));
        } else if !seg.pi_pulses.is_empty() {
            trace.replace_last(reader.read(&current.probabilities()));
        }
        if seg.duration_ns == 0.0 {
            continue;
        }
        let h = build_jc_hamiltonian(config, &seg.qubit_freqs, schedule.resonator)?;
        let spectral = SpectralPropagator::new(&h)?;
        let start = current.clone();
        for t in sample_times(seg.duration_ns, sample_dt) {
            current = match &start {
                State::Pure(psi) => State::Pure(spectral.evolve(psi, t)?),
                State::Mixed(rho) => State::Mixed(rho.conjugate_by(&spectral.unitary(t))?),
            };
            trace.push(elapsed + t, reader.read(&current.probabilities()));
        }
        elapsed += seg.duration_ns;
    }
    if trace.is_empty() {
        trace.push(0.0, reader.read(&current.probabilities()));
    }
    Ok(Propagation { trace, final_state: current })
}

/// Resonator vacuum with every qubit in |g⟩.
pub fn ground_state(config: &DeviceConfig) -> Result<QuantumState> {
    let layout = jc_layout(config)?;
    let digits = vec![0; layout.len()];
    QuantumState::basis(layout, &digits)
}

/// iSWAP time `1 / (2 g)` in ns for a coupling in MHz.
pub fn swap_time_ns(g_mhz: f64) -> f64 {
    1.0 / (2.0 * g_mhz * 1e-3)
}

fn pump_for(config: &DeviceConfig, duration_ns: f64) -> Result<QuantumState> {
    config.validate()?;
    let schedule = FrequencySchedule::new(Resonator::Bus).pulsed_segment(
        duration_ns,
        config.tuned(&[0], config.f_bus),
        vec![0],
    );
    let out = propagate(&ground_state(config)?.into(), &schedule, config, duration_ns.max(1e-9))?;
    match out.final_state {
        State::Pure(psi) => Ok(psi),
        State::Mixed(_) => unreachable!("pure input stays pure"),
    }
}

/// Load one photon into the bus: π-pulse Q1, then hold it on resonance for
/// `1 / (2 g₁)`, mapping `|0⟩⊗|eggg⟩ → |1⟩⊗|gggg⟩`.
pub fn pump_fock(config: &DeviceConfig) -> Result<QuantumState> {
    pump_for(config, swap_time_ns(config.g_bus[0]))
}

/// [`pump_fock`] with an explicit swap duration.
pub fn pump_fock_for(config: &DeviceConfig, duration_ns: f64) -> Result<QuantumState> {
    pump_for(config, duration_ns)
}

fn check_participants(config: &DeviceConfig, participants: &[usize]) -> Result<Vec<usize>> {
    if participants.is_empty() {
        return Err(Error::Empty("participant set"));
    }
    let mut sorted = participants.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != participants.len() {
        return Err(Error::InvalidArgument(format!("duplicate participants in {participants:?}")));
    }
    for &q in &sorted {
        config.check_qubit(q)?;
    }
    Ok(sorted)
}

/// √(Σ gᵢ²) over the participants in MHz, i.e. `√N ḡ`.
pub fn collective_coupling_mhz(config: &DeviceConfig, participants: &[usize]) -> f64 {
    participants.iter().map(|&q| config.g_bus[q].powi(2)).sum::<f64>().sqrt()
}

/// RMS coupling `ḡ = [Σ gᵢ² / N]^{1/2}` in MHz.
pub fn mean_coupling_mhz(config: &DeviceConfig, participants: &[usize]) -> f64 {
    collective_coupling_mhz(config, participants) / (participants.len() as f64).sqrt()
}

/// Pump the bus, then put every participant on resonance for `dtau_max`.
pub fn simultaneous_resonance(
    config: &DeviceConfig,
    participants: &[usize],
    dtau_max: f64,
    sample_dt: f64,
) -> Result<OccupationTrace> {
    let participants = check_participants(config, participants)?;
    let pumped = pump_fock(config)?;
    let schedule = FrequencySchedule::new(Resonator::Bus).segment(dtau_max, config.tuned(&participants, config.f_bus));
    Ok(propagate(&pumped.into(), &schedule, config, sample_dt)?.trace)
}

#[derive(Clone, Debug)]
pub struct SharedExcitation {
    /// Register state over the participants, ascending qubit order.
    pub state: QuantumState,
    pub participants: Vec<usize>,
    pub stop_time_ns: f64,
    /// Population outside the single-excitation register subspace.
    pub residual: f64,
}

/// Stop simultaneous resonance at the first P_B minimum, `1 / (2 ḡ_N)`,
/// leaving the excitation spread evenly over the participants.
pub fn prepare_shared_excitation(config: &DeviceConfig, participants: &[usize]) -> Result<SharedExcitation> {
    let participants = check_participants(config, participants)?;
    if participants.len() < 2 {
        return Err(Error::InvalidArgument("shared excitation needs at least two participants".into()));
    }
    let stop = swap_time_ns(collective_coupling_mhz(config, &participants));
    let pumped = pump_fock(config)?;
    let schedule = FrequencySchedule::new(Resonator::Bus).segment(stop, config.tuned(&participants, config.f_bus));
    let out = propagate(&pumped.into(), &schedule, config, stop)?;
    let State::Pure(full) = out.final_state else {
        unreachable!("pure input stays pure")
    };

    let layout = full.layout().clone();
    let n = participants.len();
    let mut amps = crate::hilbert::CVector::zeros(1 << n);
    for (reg, amp) in amps.iter_mut().enumerate() {
        let mut digits = vec![0; layout.len()];
        for (k, &q) in participants.iter().enumerate() {
            digits[1 + q] = (reg >> (n - 1 - k)) & 1;
        }
        *amp = full.amplitudes()[layout.index(&digits)];
    }
    let kept = amps.norm_squared();
    let state = QuantumState::normalized(SpaceLayout::qubits(n), amps)?;
    Ok(SharedExcitation { state, participants, stop_time_ns: stop, residual: 1.0 - kept })
}

/// Excited-state probability over (frequency, interaction time).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyMap {
    pub qubit: usize,
    pub freqs: Vec<f64>,
    pub taus: Vec<f64>,
    /// `p_e[f][t]`
    pub p_e: Vec<Vec<f64>>,
}

/// Excite `qubit`, park it at each frequency in `freq_grid` and record its
/// excited-state probability after each interaction time in `tau_grid`.
///
/// The scanned qubit sees the bus and its own memory resonator with
/// couplings always on; other qubits stay idle and decoupled.
pub fn swap_spectroscopy(config: &DeviceConfig, qubit: usize, freq_grid: &[f64], tau_grid: &[f64]) -> Result<SpectroscopyMap> {
    config.validate()?;
    config.check_qubit(qubit)?;
    if freq_grid.is_empty() || tau_grid.is_empty() {
        return Err(Error::Empty("spectroscopy grid"));
    }
    if tau_grid.iter().any(|t| *t < 0.0) {
        return Err(Error::InvalidArgument("interaction times must be non-negative".into()));
    }
    let model = Model::new(2, 1, config.n_max)?;
    let resonators = [config.f_bus, config.f_memory[qubit]];
    let couplings = [(0, 0, config.g_bus_ghz(qubit)), (0, 1, config.g_mem_ghz(qubit))];
    let mut digits = vec![0; model.layout.len()];
    digits[model.qubit_factor(0)] = 1;
    let excited = QuantumState::basis(model.layout.clone(), &digits)?;
    let qubit_stride = model.layout.stride(model.qubit_factor(0));

    let rows = crate::par_map(freq_grid, |&f| -> Result<Vec<f64>> {
        let h = model.hamiltonian(&resonators, &[f], &couplings, f)?;
        let spectral = SpectralPropagator::new(&h)?;
        tau_grid
            .iter()
            .map(|&t| {
                let psi = spectral.evolve(&excited, t)?;
                Ok(psi
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (i / qubit_stride) % 2 == 1)
                    .map(|(_, a)| a.norm_sqr())
                    .sum())
            })
            .collect()
    });
    let p_e = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SpectroscopyMap { qubit, freqs: freq_grid.to_vec(), taus: tau_grid.to_vec(), p_e })
}

impl SpectroscopyMap {
    /// Time-averaged P_e per frequency.
    pub fn mean_profile(&self) -> Vec<f64> {
        self.p_e.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect()
    }

    /// Chevron centres: the deepest point of each contiguous run of
    /// frequencies whose time-averaged P_e falls below `threshold`.
    pub fn chevron_centers(&self, threshold: f64) -> Vec<f64> {
        let profile = self.mean_profile();
        let mut centers = Vec::new();
        let mut best: Option<(usize, f64)> = None;
        for (i, &p) in profile.iter().enumerate() {
            if p < threshold {
                if best.is_none_or(|(_, b)| p < b) {
                    best = Some((i, p));
                }
            } else if let Some((j, _)) = best.take() {
                centers.push(self.freqs[j]);
            }
        }
        if let Some((j, _)) = best {
            centers.push(self.freqs[j]);
        }
        centers
    }
}
