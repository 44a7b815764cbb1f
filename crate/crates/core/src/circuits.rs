//! Ideal gate circuits, the compiled order-finding circuits for N = 15,
//! sampling of the output register and classical post-processing.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, QuantumOperator, QuantumState, SpaceLayout, State, C64, I, ONE, ZERO};
use crate::noise::{apply_noise_step, NoiseParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    XHalf,
    YHalf,
    CZ,
    CNOT,
    ISwap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::CZ | GateKind::CNOT | GateKind::ISwap => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::XHalf => "X/2",
            GateKind::YHalf => "Y/2",
            GateKind::CZ => "CZ",
            GateKind::CNOT => "CNOT",
            GateKind::ISwap => "ISWAP",
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "H" => GateKind::H,
            "X/2" | "X_HALF" => GateKind::XHalf,
            "Y/2" | "Y_HALF" => GateKind::YHalf,
            "CZ" => GateKind::CZ,
            "CNOT" => GateKind::CNOT,
            "ISWAP" => GateKind::ISwap,
            other => return Err(Error::InvalidArgument(format!("unknown gate {other:?}"))),
        })
    }
}

/// A gate on register indices. For CNOT the targets are (control, target).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidArgument(format!(
                "{} takes {} qubit(s), got {}",
                kind.name(),
                kind.arity(),
                targets.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidArgument(format!("{} with duplicate target {}", kind.name(), targets[0])));
        }
        Ok(Self { kind, targets })
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Self::new(kind, vec![q]).expect("single-qubit gate")
    }

    pub fn pair(kind: GateKind, a: usize, b: usize) -> Self {
        Self::new(kind, vec![a, b]).expect("two-qubit gate on distinct qubits")
    }
}

fn c(re: f64) -> C64 {
    C64::from(re)
}

fn local_matrix(kind: GateKind) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        GateKind::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        GateKind::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        GateKind::H => CMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]),
        // exp(-i π X / 4)
        GateKind::XHalf => CMatrix::from_row_slice(2, 2, &[c(s), -I * s, -I * s, c(s)]),
        // exp(-i π Y / 4)
        GateKind::YHalf => CMatrix::from_row_slice(2, 2, &[c(s), c(-s), c(s), c(s)]),
        GateKind::CZ => CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ONE, ONE, -ONE])),
        GateKind::CNOT => {
            // (I ⊗ H) · CZ · (I ⊗ H)
            let ih = CMatrix::identity(2, 2).kronecker(&local_matrix(GateKind::H));
            &ih * local_matrix(GateKind::CZ) * &ih
        }
        GateKind::ISwap => {
            let mut m = CMatrix::zeros(4, 4);
            m[(0, 0)] = ONE;
            m[(1, 2)] = I;
            m[(2, 1)] = I;
            m[(3, 3)] = ONE;
            m
        }
    }
}

/// Place a 2- or 4-dimensional unitary on `targets` of an `n`-qubit register.
fn embed_gate(local: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let mask: usize = targets.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let sub = |idx: usize| targets.iter().fold(0, |acc, &q| (acc << 1) | bit(idx, q));
    CMatrix::from_fn(dim, dim, |r, col| {
        if r & !mask != col & !mask {
            ZERO
        } else {
            local[(sub(r), sub(col))]
        }
    })
}

/// Full-register unitary for `gate`.
pub fn gate_unitary(gate: &Gate, n_qubits: usize) -> Result<QuantumOperator> {
    let gate = Gate::new(gate.kind, gate.targets.clone())?;
    if let Some(&q) = gate.targets.iter().find(|&&q| q >= n_qubits) {
        return Err(Error::IndexOutOfRange { index: q, len: n_qubits });
    }
    QuantumOperator::new(SpaceLayout::qubits(n_qubits), embed_gate(&local_matrix(gate.kind), &gate.targets, n_qubits))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitDuration {
    OneQubitGate,
    TwoQubitGate,
    Ns(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instruction {
    Gate(Gate),
    /// Idle time on every qubit; identity in ideal mode.
    Wait(WaitDuration),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub name: String,
    /// Number of instructions executed before the snapshot.
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    /// Device qubit (0-based) behind each register index.
    pub device_qubits: Vec<usize>,
    pub ops: Vec<Instruction>,
    pub breakpoints: Vec<Breakpoint>,
    /// Register indices read out, most significant bit first.
    pub measured_register: Vec<usize>,
    /// Constant-zero bits appended after the measured register bits.
    pub output_padding: usize,
}

impl Circuit {
    pub fn n_qubits(&self) -> usize {
        self.device_qubits.len()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.ops.iter().filter_map(|op| match op {
            Instruction::Gate(g) => Some(g),
            Instruction::Wait(_) => None,
        })
    }

    pub fn output_bits(&self) -> usize {
        self.measured_register.len() + self.output_padding
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        if n == 0 {
            return Err(Error::Empty("circuit register"));
        }
        for g in self.gates() {
            Gate::new(g.kind, g.targets.clone())?;
            if let Some(&q) = g.targets.iter().find(|&&q| q >= n) {
                return Err(Error::IndexOutOfRange { index: q, len: n });
            }
        }
        if let Some(b) = self.breakpoints.iter().find(|b| b.position > self.ops.len()) {
            return Err(Error::InvalidArgument(format!("breakpoint {} past the end of the circuit", b.name)));
        }
        if let Some(&q) = self.measured_register.iter().find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange { index: q, len: n });
        }
        Ok(())
    }

    /// Ordered product of every gate unitary.
    pub fn unitary(&self) -> Result<QuantumOperator> {
        let n = self.n_qubits();
        self.gates().try_fold(QuantumOperator::identity(SpaceLayout::qubits(n)), |acc, g| {
            gate_unitary(g, n)?.compose(&acc)
        })
    }

    /// Line-oriented text form; gates name device qubits 1-based.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        text.parse()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = |q: usize| self.device_qubits[q] + 1;
        let labels: Vec<String> = self.device_qubits.iter().map(|q| (q + 1).to_string()).collect();
        writeln!(f, "QUBITS {}", labels.join(" "))?;
        let mut breaks = self.breakpoints.iter().peekable();
        for (k, op) in self.ops.iter().enumerate() {
            while let Some(b) = breaks.next_if(|b| b.position == k) {
                writeln!(f, "BREAK {}", b.name)?;
            }
            match op {
                Instruction::Gate(g) => {
                    let qs: Vec<String> = g.targets.iter().map(|&q| label(q).to_string()).collect();
                    writeln!(f, "{} {}", g.kind.name(), qs.join(" "))?;
                }
                Instruction::Wait(WaitDuration::OneQubitGate) => writeln!(f, "WAIT 1q")?,
                Instruction::Wait(WaitDuration::TwoQubitGate) => writeln!(f, "WAIT 2q")?,
                Instruction::Wait(WaitDuration::Ns(t)) => writeln!(f, "WAIT {t}")?,
            }
        }
        for b in breaks {
            writeln!(f, "BREAK {}", b.name)?;
        }
        let measured: Vec<String> = self.measured_register.iter().map(|&q| label(q).to_string()).collect();
        writeln!(f, "MEASURE {}", measured.join(" "))?;
        if self.output_padding > 0 {
            writeln!(f, "PAD {}", self.output_padding)?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Circuit> {
        let mut circuit = Circuit {
            device_qubits: Vec::new(),
            ops: Vec::new(),
            breakpoints: Vec::new(),
            measured_register: Vec::new(),
            output_padding: 0,
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: lineno + 1, message };
            let mut words = line.split_whitespace();
            let head = words.next().expect("non-empty line");
            let args: Vec<&str> = words.collect();
            let device_index = |w: &str, c: &Circuit| -> Result<usize> {
                let d: usize = w.parse().map_err(|_| err(format!("bad qubit number {w:?}")))?;
                c.device_qubits
                    .iter()
                    .position(|&q| q + 1 == d)
                    .ok_or_else(|| err(format!("qubit {d} not declared in QUBITS")))
            };
            match head.to_ascii_uppercase().as_str() {
                "QUBITS" => {
                    circuit.device_qubits = args
                        .iter()
                        .map(|w| match w.parse::<usize>() {
                            Ok(d) if d >= 1 => Ok(d - 1),
                            _ => Err(err(format!("bad qubit number {w:?}"))),
                        })
                        .collect::<Result<_>>()?;
                }
                "BREAK" => {
                    let name = args.first().ok_or_else(|| err("BREAK needs a name".into()))?;
                    circuit.breakpoints.push(Breakpoint { name: name.to_string(), position: circuit.ops.len() });
                }
                "WAIT" => {
                    let d = match args.first().copied() {
                        Some("1q") => WaitDuration::OneQubitGate,
                        Some("2q") => WaitDuration::TwoQubitGate,
                        Some(w) => WaitDuration::Ns(w.parse().map_err(|_| err(format!("bad duration {w:?}")))?),
                        None => return Err(err("WAIT needs a duration".into())),
                    };
                    circuit.ops.push(Instruction::Wait(d));
                }
                "MEASURE" => {
                    circuit.measured_register =
                        args.iter().map(|w| device_index(w, &circuit)).collect::<Result<_>>()?;
                }
                "PAD" => {
                    let w = args.first().ok_or_else(|| err("PAD needs a count".into()))?;
                    circuit.output_padding = w.parse().map_err(|_| err(format!("bad padding {w:?}")))?;
                }
                name => {
                    let kind: GateKind = name.parse().map_err(|e: Error| err(e.to_string()))?;
                    let targets = args.iter().map(|w| device_index(w, &circuit)).collect::<Result<Vec<_>>>()?;
                    let gate = Gate::new(kind, targets).map_err(|e| err(e.to_string()))?;
                    circuit.ops.push(Instruction::Gate(gate));
                }
            }
        }
        circuit.validate()?;
        Ok(circuit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShorVariant {
    FourQubit,
    ThreeQubit,
    Control,
}

impl FromStr for ShorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four_qubit" => Ok(ShorVariant::FourQubit),
            "three_qubit" => Ok(ShorVariant::ThreeQubit),
            "control" => Ok(ShorVariant::Control),
            other => Err(Error::InvalidArgument(format!("unknown Shor variant {other:?}"))),
        }
    }
}

/// Compiled order-finding circuit for N = 15, a = 4 on device qubits Q2-Q4
/// (plus Q1 for the four-qubit form).
///
/// Breakpoints `step1`, `step2`, `step3` follow the first CNOT, the second
/// CNOT and the final Hadamard. Output strings read the Q2 bit then the
/// redundant Q1 bit, so `"10"` reports period 2.
pub fn build_shor(variant: ShorVariant) -> Circuit {
    use GateKind::*;
    let g = |kind, q| Instruction::Gate(Gate::single(kind, q));
    let g2 = |kind, a, b| Instruction::Gate(Gate::pair(kind, a, b));
    let bp = |name: &str, position| Breakpoint { name: name.to_string(), position };
    match variant {
        ShorVariant::ThreeQubit => Circuit {
            device_qubits: vec![1, 2, 3],
            ops: vec![g(H, 0), g2(CNOT, 0, 1), g2(CNOT, 0, 2), g(H, 0)],
            breakpoints: vec![bp("step1", 2), bp("step2", 3), bp("step3", 4)],
            measured_register: vec![0],
            output_padding: 1,
        },
        ShorVariant::FourQubit => Circuit {
            device_qubits: vec![0, 1, 2, 3],
            ops: vec![g(H, 0), g(H, 0), g(H, 1), g2(CNOT, 1, 2), g2(CNOT, 1, 3), g(H, 1)],
            breakpoints: vec![bp("step1", 4), bp("step2", 5), bp("step3", 6)],
            measured_register: vec![1, 0],
            output_padding: 0,
        },
        ShorVariant::Control => Circuit {
            device_qubits: vec![1, 2, 3],
            ops: vec![
                g(H, 0),
                Instruction::Wait(WaitDuration::TwoQubitGate),
                Instruction::Wait(WaitDuration::TwoQubitGate),
                g(H, 0),
            ],
            breakpoints: vec![bp("step1", 2), bp("step2", 3), bp("step3", 4)],
            measured_register: vec![0],
            output_padding: 1,
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    IdealPure,
    NoisyDensity,
}

#[derive(Clone, Debug)]
pub struct CircuitRun {
    pub breakpoints: Vec<(String, State)>,
    pub final_state: State,
}

impl CircuitRun {
    pub fn breakpoint(&self, name: &str) -> Option<&State> {
        self.breakpoints.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

/// Run from |g…g⟩.
pub fn run_circuit(circuit: &Circuit, mode: RunMode, noise: Option<&NoiseParams>) -> Result<CircuitRun> {
    let n = circuit.n_qubits();
    let ground = QuantumState::basis(SpaceLayout::qubits(n), &vec![0; n])?;
    let initial = match mode {
        RunMode::IdealPure => State::Pure(ground),
        RunMode::NoisyDensity => State::Mixed(ground.to_density()),
    };
    run_circuit_from(circuit, initial, mode, noise)
}

pub fn run_circuit_from(circuit: &Circuit, initial: State, mode: RunMode, noise: Option<&NoiseParams>) -> Result<CircuitRun> {
    circuit.validate()?;
    let n = circuit.n_qubits();
    if initial.layout() != &SpaceLayout::qubits(n) {
        return Err(Error::LayoutMismatch("initial state does not match the circuit register".into()));
    }
    let register_noise = match mode {
        RunMode::IdealPure => None,
        RunMode::NoisyDensity => {
            let params = noise.ok_or_else(|| Error::InvalidArgument("noisy mode needs noise parameters".into()))?;
            params.validate()?;
            Some(params.select(&circuit.device_qubits)?)
        }
    };
    let mut state = match (mode, initial) {
        (RunMode::NoisyDensity, State::Pure(psi)) => State::Mixed(psi.to_density()),
        (_, s) => s,
    };
    let all: Vec<usize> = (0..n).collect();
    let mut snapshots = Vec::with_capacity(circuit.breakpoints.len());
    let snap = |k: usize, state: &State, out: &mut Vec<(String, State)>| {
        for b in circuit.breakpoints.iter().filter(|b| b.position == k) {
            out.push((b.name.clone(), state.clone()));
        }
    };
    snap(0, &state, &mut snapshots);
    for (k, op) in circuit.ops.iter().enumerate() {
        let duration = match op {
            Instruction::Gate(g) => {
                state = state.evolve(&gate_unitary(g, n)?)?;
                register_noise.as_ref().map(|p| if g.kind.arity() == 2 { p.gate_time_2q } else { p.gate_time_1q })
            }
            Instruction::Wait(w) => register_noise.as_ref().map(|p| match w {
                WaitDuration::OneQubitGate => p.gate_time_1q,
                WaitDuration::TwoQubitGate => p.gate_time_2q,
                WaitDuration::Ns(t) => *t,
            }),
        };
        if let (Some(params), Some(dt), State::Mixed(rho)) = (&register_noise, duration, &state) {
            state = State::Mixed(apply_noise_step(rho, params, dt, &all)?);
        }
        snap(k + 1, &state, &mut snapshots);
    }
    Ok(CircuitRun { breakpoints: snapshots, final_state: state })
}

fn marginal(state: &State, register: &[usize]) -> Result<Vec<f64>> {
    if register.is_empty() {
        return Err(Error::Empty("measured register"));
    }
    let layout = state.layout();
    if !layout.is_all_qubits() {
        return Err(Error::InvalidArgument("sampling needs a qubit-only state".into()));
    }
    let n = layout.len();
    if let Some(&q) = register.iter().find(|&&q| q >= n) {
        return Err(Error::IndexOutOfRange { index: q, len: n });
    }
    let mut out = vec![0.0; 1 << register.len()];
    for (idx, p) in state.probabilities().into_iter().enumerate() {
        let key = register.iter().fold(0, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1));
        out[key] += p.max(0.0);
    }
    Ok(out)
}

fn outcome_label(value: usize, bits: usize, padding: usize) -> String {
    let mut s: String = (0..bits).rev().map(|b| if (value >> b) & 1 == 1 { '1' } else { '0' }).collect();
    s.push_str(&"0".repeat(padding));
    s
}

/// Exact distribution of the register readout; zero-probability outcomes omitted.
pub fn output_distribution(state: &State, register: &[usize], padding: usize) -> Result<BTreeMap<String, f64>> {
    let probs = marginal(state, register)?;
    Ok(probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-15)
        .map(|(v, &p)| (outcome_label(v, register.len(), padding), p))
        .collect())
}

/// Multinomial draw over `probs` by successive conditional binomials.
pub(crate) fn multinomial(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut remaining_mass = total;
    let mut remaining = shots;
    let mut out = vec![0; probs.len()];
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if k + 1 == probs.len() || remaining_mass <= 0.0 {
            out[k] = remaining;
            break;
        }
        let frac = (p / remaining_mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, frac).expect("probability clamped to [0, 1]").sample(rng);
        out[k] = draw;
        remaining -= draw;
        remaining_mass -= p;
    }
    out
}

/// Sample `shots` readouts of `register` with a seeded generator.
pub fn sample_output(
    state: &State,
    register: &[usize],
    padding: usize,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<String, u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let probs = marginal(state, register)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = multinomial(&probs, shots, &mut rng);
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(v, c)| (outcome_label(v, register.len(), padding), c))
        .collect())
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Period from a readout: `2ⁿ / gcd(m, 2ⁿ)`, or `None` when m = 0.
pub fn extract_period(bits: &str, n_register_bits: usize) -> Result<Option<u64>> {
    if bits.len() != n_register_bits || n_register_bits == 0 || n_register_bits > 63 {
        return Err(Error::InvalidArgument(format!("expected {n_register_bits} bits, got {bits:?}")));
    }
    let m = u64::from_str_radix(bits, 2).map_err(|_| Error::InvalidArgument(format!("not a bitstring: {bits:?}")))?;
    if m == 0 {
        return Ok(None);
    }
    let q = 1u64 << n_register_bits;
    Ok(Some(q / gcd(m, q)))
}

/// Factors of `n` from the period `r` of `a`, when the period is usable.
pub fn classical_factors(a: u64, r: u64, n: u64) -> Result<Option<(u64, u64)>> {
    if !(1 < a && a < n) || gcd(a, n) != 1 {
        return Err(Error::InvalidArgument(format!("need 1 < a < N with gcd(a, N) = 1, got a={a}, N={n}")));
    }
    if r == 0 || r % 2 == 1 {
        return Ok(None);
    }
    let x = mod_pow(a, r / 2, n);
    if x == n - 1 {
        return Ok(None);
    }
    let p = gcd((x + n - 1) % n, n);
    let q = gcd((x + 1) % n, n);
    let nontrivial = |f: u64| 1 < f && f < n;
    if nontrivial(p) && nontrivial(q) && p * q == n {
        Ok(Some((p.min(q), p.max(q))))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoringResult {
    pub composite_n: u64,
    pub coprime_a: u64,
    pub shots: u64,
    pub output_counts: BTreeMap<String, u64>,
    pub period_r: Option<u64>,
    pub factors: Option<(u64, u64)>,
    /// Fraction of shots whose readout leads to a correct factorization.
    pub success_probability: f64,
}

impl FactoringResult {
    /// Classical post-processing of every observed readout.
    pub fn from_counts(counts: BTreeMap<String, u64>, a: u64, n: u64, n_bits: usize) -> Result<Self> {
        let shots: u64 = counts.values().sum();
        if shots == 0 {
            return Err(Error::Empty("output counts"));
        }
        let mut successes = 0;
        let mut best: Option<(u64, u64, (u64, u64))> = None;
        for (bits, &count) in &counts {
            let Some(r) = extract_period(bits, n_bits)? else { continue };
            if let Some(f) = classical_factors(a, r, n)? {
                if f.0 * f.1 != n {
                    return Err(Error::Invariant(format!("factors {f:?} do not multiply to {n}")));
                }
                successes += count;
                if best.is_none_or(|(c, _, _)| count > c) {
                    best = Some((count, r, f));
                }
            }
        }
        Ok(Self {
            composite_n: n,
            coprime_a: a,
            shots,
            output_counts: counts,
            period_r: best.map(|b| b.1),
            factors: best.map(|b| b.2),
            success_probability: successes as f64 / shots as f64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn hadamard_squares_to_identity() {
        for q in 0..3 {
            let h = gate_unitary(&Gate::single(GateKind::H, q), 3).unwrap();
            assert!(close(h.compose(&h).unwrap().elements(), &CMatrix::identity(8, 8), 1e-15));
        }
    }

    #[test]
    fn cnot_from_cz_is_the_permutation() {
        let u = gate_unitary(&Gate::pair(GateKind::CNOT, 0, 1), 2).unwrap();
        let mut perm = CMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            perm[(r, col)] = ONE;
        }
        assert!(close(u.elements(), &perm, 1e-12));
    }

    #[test]
    fn reversed_cnot_on_wider_register() {
        // control 2, target 0: |001> -> |101>
        let u = gate_unitary(&Gate::pair(GateKind::CNOT, 2, 0), 3).unwrap();
        let psi = QuantumState::from_label("gge").unwrap().apply(&u).unwrap();
        assert!((psi.inner(&QuantumState::from_label("ege").unwrap()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_flips_ground() {
        let x = gate_unitary(&Gate::single(GateKind::X, 0), 1).unwrap();
        assert_eq!(QuantumState::from_label("g").unwrap().apply(&x).unwrap(), QuantumState::from_label("e").unwrap());
    }

    #[test]
    fn every_gate_is_unitary() {
        use GateKind::*;
        for kind in [X, Y, Z, H, XHalf, YHalf] {
            assert!(gate_unitary(&Gate::single(kind, 1), 3).unwrap().is_unitary(1e-12));
        }
        for kind in [CZ, CNOT, ISwap] {
            assert!(gate_unitary(&Gate::pair(kind, 2, 0), 3).unwrap().is_unitary(1e-12));
        }
    }

    #[test]
    fn duplicate_targets_rejected() {
        assert!(Gate::new(GateKind::CZ, vec![1, 1]).is_err());
        let bad = Gate { kind: GateKind::CZ, targets: vec![1, 1] };
        assert!(gate_unitary(&bad, 3).is_err());
    }

    #[test]
    fn shor_structure() {
        let three = build_shor(ShorVariant::ThreeQubit);
        assert_eq!(three.gates().count(), 4);
        let positions: Vec<usize> = three.breakpoints.iter().map(|b| b.position).collect();
        assert_eq!(positions, vec![2, 3, 4]);
        let control = build_shor(ShorVariant::Control);
        assert!(control.gates().all(|g| g.kind.arity() == 1));
        assert_eq!(control.ops.len(), three.ops.len());
    }

    #[test]
    fn ideal_breakpoints() {
        let run = run_circuit(&build_shor(ShorVariant::ThreeQubit), RunMode::IdealPure, None).unwrap();
        let overlap = |name: &str, target: &QuantumState| match run.breakpoint(name).unwrap() {
            State::Pure(psi) => psi.inner(target).norm_sqr(),
            State::Mixed(_) => unreachable!(),
        };
        assert!((overlap("step2", &states::ghz(3)) - 1.0).abs() < 1e-12);
        assert!((overlap("step3", &states::psi3()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn control_returns_ground() {
        let run = run_circuit(&build_shor(ShorVariant::Control), RunMode::IdealPure, None).unwrap();
        let dist = output_distribution(&run.final_state, &[0], 1).unwrap();
        assert_eq!(dist.len(), 1);
        assert!((dist["00"] - 1.0).abs() < 1e-12);
        let counts = sample_output(&run.final_state, &[0], 1, 1000, 3).unwrap();
        assert_eq!(counts.get("00"), Some(&1000));
    }

    #[test]
    fn four_and_three_qubit_outputs_agree() {
        let three = build_shor(ShorVariant::ThreeQubit);
        let four = build_shor(ShorVariant::FourQubit);
        let d3 = output_distribution(
            &run_circuit(&three, RunMode::IdealPure, None).unwrap().final_state,
            &three.measured_register,
            three.output_padding,
        )
        .unwrap();
        let d4 = output_distribution(
            &run_circuit(&four, RunMode::IdealPure, None).unwrap().final_state,
            &four.measured_register,
            four.output_padding,
        )
        .unwrap();
        assert_eq!(d3.keys().collect::<Vec<_>>(), d4.keys().collect::<Vec<_>>());
        for (k, p) in &d3 {
            assert!((p - d4[k]).abs() < 1e-12);
        }
        // Q1 bit is the trailing character and always 0
        assert!(d4.keys().all(|k| k.ends_with('0')));
    }

    #[test]
    fn noisy_mode_requires_params() {
        let c = build_shor(ShorVariant::ThreeQubit);
        assert!(run_circuit(&c, RunMode::NoisyDensity, None).is_err());
    }

    #[test]
    fn period_extraction() {
        assert_eq!(extract_period("10", 2).unwrap(), Some(2));
        assert_eq!(extract_period("00", 2).unwrap(), None);
        assert_eq!(extract_period("01", 2).unwrap(), Some(4));
        assert!(extract_period("1", 2).is_err());
    }

    #[test]
    fn factoring_examples() {
        assert_eq!(classical_factors(4, 2, 15).unwrap(), Some((3, 5)));
        assert_eq!(classical_factors(4, 0, 15).unwrap(), None);
        assert_eq!(classical_factors(7, 4, 15).unwrap(), Some((3, 5)));
        assert!(classical_factors(5, 2, 15).is_err());
        assert!(classical_factors(1, 2, 15).is_err());
    }

    #[test]
    fn text_round_trip_and_golden() {
        let c = build_shor(ShorVariant::ThreeQubit);
        let text = c.to_text();
        assert_eq!(
            text,
            "QUBITS 2 3 4\nH 2\nCNOT 2 3\nBREAK step1\nCNOT 2 4\nBREAK step2\nH 2\nBREAK step3\nMEASURE 2\nPAD 1\n"
        );
        for v in [ShorVariant::ThreeQubit, ShorVariant::FourQubit, ShorVariant::Control] {
            let c = build_shor(v);
            assert_eq!(Circuit::from_text(&c.to_text()).unwrap(), c);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Circuit::from_text("QUBITS 1 2\nH 1\nFOO 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Circuit::from_text("QUBITS 1\nH 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn factoring_result_from_counts() {
        let counts: BTreeMap<String, u64> = [("00".to_string(), 52), ("10".to_string(), 48)].into();
        let r = FactoringResult::from_counts(counts, 4, 15, 2).unwrap();
        assert_eq!(r.period_r, Some(2));
        assert_eq!(r.factors, Some((3, 5)));
        assert!((r.success_probability - 0.48).abs() < 1e-15);
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let counts = multinomial(&[0.2, 0.0, 0.5, 0.3], 12345, &mut rng);
        assert_eq!(counts.iter().sum::<u64>(), 12345);
        assert_eq!(counts[1], 0);
    }

    #[test]
    fn run_rejects_wrong_initial_layout() {
        let c = build_shor(ShorVariant::ThreeQubit);
        let wrong = State::Mixed(crate::hilbert::DensityMatrix::maximally_mixed(SpaceLayout::qubits(2)));
        assert!(run_circuit_from(&c, wrong, RunMode::IdealPure, None).is_err());
    }
}
