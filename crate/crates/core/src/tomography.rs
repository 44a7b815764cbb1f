//! Qubit state tomography by linear inversion, and the metrics used to judge
//! the reconstructed states.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::multinomial;
use crate::error::{Error, Result};
use crate::hilbert::{
    floored_sqrt, nearest_density_ls, partial_trace, psd_sqrt, spectral_floor, CMatrix, DensityMatrix, FactorKind, QuantumOperator, QuantumState,
    SpaceLayout, State, C64, I, ONE, ZERO,
};

/// Rotation applied to one qubit before a computational-basis readout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PreRotation {
    #[serde(rename = "I")]
    Identity,
    #[serde(rename = "X/2")]
    XHalf,
    #[serde(rename = "Y/2")]
    YHalf,
}

impl PreRotation {
    pub const ALL: [PreRotation; 3] = [PreRotation::Identity, PreRotation::XHalf, PreRotation::YHalf];

    fn matrix(self) -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            PreRotation::Identity => CMatrix::identity(2, 2),
            PreRotation::XHalf => CMatrix::from_row_slice(2, 2, &[C64::from(s), -I * s, -I * s, C64::from(s)]),
            PreRotation::YHalf => {
                CMatrix::from_row_slice(2, 2, &[C64::from(s), C64::from(-s), C64::from(s), C64::from(s)])
            }
        }
    }

    /// The Pauli (and its sign) that a Z readout after this rotation measures.
    fn measured_pauli(self) -> (Pauli, f64) {
        let u = self.matrix();
        let observed = u.adjoint() * pauli_matrix(Pauli::Z) * &u;
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let overlap = (pauli_matrix(p) * &observed).trace().re / 2.0;
            if (overlap.abs() - 1.0).abs() < 1e-9 {
                return (p, overlap.signum());
            }
        }
        unreachable!("pre-rotations map Z onto a signed Pauli")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pauli {
    I,
    X,
    Y,
    Z,
}

fn pauli_matrix(p: Pauli) -> CMatrix {
    match p {
        Pauli::I => CMatrix::identity(2, 2),
        Pauli::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Pauli::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementSetting {
    pub pre_rotations: Vec<PreRotation>,
}

impl MeasurementSetting {
    fn unitary(&self) -> CMatrix {
        self.pre_rotations
            .iter()
            .fold(CMatrix::identity(1, 1), |acc, r| acc.kronecker(&r.matrix()))
    }
}

/// All 3ⁿ product settings; the first qubit varies slowest.
pub fn all_settings(n: usize) -> Vec<MeasurementSetting> {
    (0..3usize.pow(n as u32))
        .map(|mut k| {
            let mut rot = vec![PreRotation::Identity; n];
            for slot in rot.iter_mut().rev() {
                *slot = PreRotation::ALL[k % 3];
                k /= 3;
            }
            MeasurementSetting { pre_rotations: rot }
        })
        .collect()
}

/// Counts (and, once reconstructed, the estimate) for one tomography run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RecordJson", try_from = "RecordJson")]
pub struct TomographyRecord {
    /// Factors of the source state that were measured.
    pub qubits: Vec<usize>,
    pub settings: Vec<MeasurementSetting>,
    /// `counts[s][outcome]`, outcome bits most-significant-first in `qubits` order.
    pub counts: Vec<Vec<u64>>,
    pub shots_per_setting: u64,
    pub seed: u64,
    pub rho_hat: Option<DensityMatrix>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    qubits: Vec<usize>,
    shots_per_setting: u64,
    seed: u64,
    settings: Vec<MeasurementSetting>,
    counts: Vec<Vec<u64>>,
    rho_hat: Option<Vec<Vec<[f64; 2]>>>,
    metrics: BTreeMap<String, f64>,
}

impl From<TomographyRecord> for RecordJson {
    fn from(r: TomographyRecord) -> Self {
        Self {
            qubits: r.qubits,
            shots_per_setting: r.shots_per_setting,
            seed: r.seed,
            settings: r.settings,
            counts: r.counts,
            rho_hat: r.rho_hat.map(|rho| matrix_to_pairs(rho.elements())),
            metrics: r.metrics,
        }
    }
}

impl TryFrom<RecordJson> for TomographyRecord {
    type Error = Error;

    fn try_from(j: RecordJson) -> Result<Self> {
        let rho_hat = match j.rho_hat {
            Some(pairs) => Some(DensityMatrix::new(SpaceLayout::qubits(j.qubits.len()), pairs_to_matrix(&pairs)?)?),
            None => None,
        };
        Ok(Self {
            qubits: j.qubits,
            settings: j.settings,
            counts: j.counts,
            shots_per_setting: j.shots_per_setting,
            seed: j.seed,
            rho_hat,
            metrics: j.metrics,
        })
    }
}

/// Nested `[re, im]` rows.
pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn pairs_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("matrix rows must form a square".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

fn reduce_to(state: &State, qubits: &[usize]) -> Result<DensityMatrix> {
    if qubits.is_empty() {
        return Err(Error::Empty("tomography qubit set"));
    }
    let layout = state.layout();
    for &q in qubits {
        match layout.factors().get(q) {
            Some(f) if f.kind == FactorKind::Qubit => {}
            Some(_) => return Err(Error::InvalidArgument(format!("factor {q} is not a qubit"))),
            None => return Err(Error::IndexOutOfRange { index: q, len: layout.len() }),
        }
    }
    let rho = state.to_density();
    let mut sorted = qubits.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != qubits.len() || sorted != qubits {
        return Err(Error::InvalidArgument("tomography qubits must be distinct and ascending".into()));
    }
    partial_trace(&rho, qubits)
}

/// Readout probabilities for every setting.
pub fn setting_probabilities(rho: &DensityMatrix, settings: &[MeasurementSetting]) -> Vec<Vec<f64>> {
    settings
        .iter()
        .map(|s| {
            let u = s.unitary();
            let rotated = &u * rho.elements() * u.adjoint();
            rotated.diagonal().iter().map(|z| z.re.max(0.0)).collect()
        })
        .collect()
}

/// Simulated readout counts for every setting. Setting `k` draws from its
/// own ChaCha stream `k` under `seed`.
pub fn simulate_tomography(state: &State, qubits: &[usize], shots_per_setting: u64, seed: u64) -> Result<TomographyRecord> {
    if shots_per_setting == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let rho = reduce_to(state, qubits)?;
    let settings = all_settings(qubits.len());
    let probs = setting_probabilities(&rho, &settings);
    let indexed: Vec<(usize, &Vec<f64>)> = probs.iter().enumerate().collect();
    let counts = crate::par_map(&indexed, |&(k, p)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        multinomial(p, shots_per_setting, &mut rng)
    });
    Ok(TomographyRecord {
        qubits: qubits.to_vec(),
        settings,
        counts,
        shots_per_setting,
        seed,
        rho_hat: None,
        metrics: BTreeMap::new(),
    })
}

/// Linear-inversion estimate of the measured state, projected to a density matrix.
pub fn reconstruct(record: &TomographyRecord) -> Result<DensityMatrix> {
    let n = record.qubits.len();
    let expected = all_settings(n);
    if record.settings != expected || record.counts.len() != expected.len() {
        return Err(Error::InvalidArgument(format!(
            "tomography record must cover all {} settings, found {}",
            expected.len(),
            record.counts.len()
        )));
    }
    let freqs = record
        .counts
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let total: u64 = c.iter().sum();
            if c.len() != 1 << n || total != record.shots_per_setting {
                return Err(Error::InvalidArgument(format!("setting {k} histogram is incomplete")));
            }
            Ok(c.iter().map(|&x| x as f64 / total as f64).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    reconstruct_from_frequencies(n, &expected, &freqs)
}

/// Linear inversion from per-setting outcome frequencies (or exact probabilities).
pub fn reconstruct_from_frequencies(n: usize, settings: &[MeasurementSetting], freqs: &[Vec<f64>]) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::Empty("tomography qubit set"));
    }
    if settings.len() != freqs.len() {
        return Err(Error::InvalidArgument("settings and frequency tables differ in length".into()));
    }
    let measured: Vec<Vec<(Pauli, f64)>> =
        settings.iter().map(|s| s.pre_rotations.iter().map(|r| r.measured_pauli()).collect()).collect();
    let dim = 1usize << n;
    let mut raw = CMatrix::zeros(dim, dim);
    for code in 0..4usize.pow(n as u32) {
        let paulis: Vec<Pauli> = (0..n)
            .map(|k| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][(code / 4usize.pow((n - 1 - k) as u32)) % 4])
            .collect();
        let mut sum = 0.0;
        let mut hits = 0usize;
        for (m, f) in measured.iter().zip(freqs) {
            if !paulis.iter().zip(m).all(|(p, (b, _))| *p == Pauli::I || p == b) {
                continue;
            }
            hits += 1;
            sum += f
                .iter()
                .enumerate()
                .map(|(outcome, &p)| {
                    let parity = paulis.iter().zip(m).enumerate().fold(1.0, |acc, (k, (pk, (_, sign)))| {
                        if *pk == Pauli::I {
                            acc
                        } else {
                            let bit = (outcome >> (n - 1 - k)) & 1;
                            acc * sign * if bit == 1 { -1.0 } else { 1.0 }
                        }
                    });
                    parity * p
                })
                .sum::<f64>();
        }
        if hits == 0 {
            return Err(Error::InvalidArgument("settings are not informationally complete".into()));
        }
        let expectation = sum / hits as f64;
        let op = paulis.iter().fold(CMatrix::identity(1, 1), |acc, p| acc.kronecker(&pauli_matrix(*p)));
        raw += op * C64::from(expectation / dim as f64);
    }
    nearest_density_ls(&QuantumOperator::new(SpaceLayout::qubits(n), raw)?)
}

/// Reconstruct from noiseless probabilities, skipping sampling.
pub fn reconstruct_exact(state: &State, qubits: &[usize]) -> Result<DensityMatrix> {
    let rho = reduce_to(state, qubits)?;
    let settings = all_settings(qubits.len());
    let probs = setting_probabilities(&rho, &settings);
    reconstruct_from_frequencies(qubits.len(), &settings, &probs)
}

fn check_dims(rho: &DensityMatrix, d: usize) -> Result<()> {
    if rho.dim() != d {
        return Err(Error::LayoutMismatch(format!("dimension {} vs {d}", rho.dim())));
    }
    Ok(())
}

/// ⟨ψ|ρ|ψ⟩
pub fn state_fidelity(rho: &DensityMatrix, target: &QuantumState) -> Result<f64> {
    check_dims(rho, target.amplitudes().len())?;
    let v = target.amplitudes();
    let f = (v.adjoint() * rho.elements() * v)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0))
}

/// Tr √(√ρ σ √ρ)
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma.dim())?;
    for m in [rho, sigma] {
        let min = m.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    let (sqrt_rho, _) = psd_sqrt(rho.elements());
    let inner = &sqrt_rho * sigma.elements() * &sqrt_rho;
    let (root, _) = psd_sqrt(&inner);
    Ok(root.trace().re.clamp(0.0, 1.0))
}

fn binary_entropy(x: f64) -> f64 {
    [x, 1.0 - x].iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entanglement {
    pub concurrence: f64,
    pub eof: f64,
}

/// Wootters concurrence and entanglement of formation of a two-qubit state.
pub fn concurrence_eof(rho: &DensityMatrix) -> Result<Entanglement> {
    check_dims(rho, 4)?;
    let yy = pauli_matrix(Pauli::Y).kronecker(&pauli_matrix(Pauli::Y));
    let flipped = &yy * rho.elements().conjugate() * &yy;
    // ρ ρ̃ shares its spectrum with √ρ ρ̃ √ρ, which is Hermitian and PSD
    let (sqrt_rho, _) = psd_sqrt(rho.elements());
    let m = &sqrt_rho * flipped * &sqrt_rho;
    let eig = nalgebra::SymmetricEigen::new(crate::hilbert::symmetrize(&m));
    let floor = spectral_floor(4, eig.eigenvalues.max());
    let mut lambdas: Vec<f64> = eig.eigenvalues.iter().map(|&l| floored_sqrt(l, floor)).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let concurrence = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0);
    let x = (1.0 + (1.0 - concurrence * concurrence).max(0.0).sqrt()) / 2.0;
    Ok(Entanglement { concurrence, eof: binary_entropy(x).clamp(0.0, 1.0) })
}

/// d/(d−1)·[1 − Tr ρ²], so that a maximally mixed state scores 1.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    let d = rho.dim() as f64;
    if d < 2.0 {
        return 0.0;
    }
    d / (d - 1.0) * (1.0 - rho.purity())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessClass {
    W,
    #[serde(rename = "GHZ")]
    Ghz,
}

impl WitnessClass {
    /// Fidelity above which genuine three-qubit entanglement is certified.
    pub fn threshold(self) -> f64 {
        match self {
            WitnessClass::W => 2.0 / 3.0,
            WitnessClass::Ghz => 0.5,
        }
    }
}

impl FromStr for WitnessClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "W" => Ok(WitnessClass::W),
            "GHZ" => Ok(WitnessClass::Ghz),
            other => Err(Error::InvalidArgument(format!("unknown witness class {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessOutcome {
    pub class: WitnessClass,
    pub fidelity: f64,
    pub threshold: f64,
    pub passed: bool,
    /// fidelity − threshold
    pub margin: f64,
}

pub fn witness_check(rho: &DensityMatrix, class: WitnessClass, target: &QuantumState) -> Result<WitnessOutcome> {
    check_dims(rho, 8)?;
    let fidelity = state_fidelity(rho, target)?;
    let threshold = class.threshold();
    Ok(WitnessOutcome { class, fidelity, threshold, passed: fidelity > threshold, margin: fidelity - threshold })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugedFidelity {
    pub raw: f64,
    pub gauged: f64,
    /// Z phase applied to each qubit (radians).
    pub phases: Vec<f64>,
    pub gauged_state: QuantumState,
}

/// Apply `diag(1, e^{iφ_k})` to each qubit k.
pub fn apply_z_phases(state: &QuantumState, phases: &[f64]) -> Result<QuantumState> {
    let n = state.layout().len();
    if !state.layout().is_all_qubits() || phases.len() != n {
        return Err(Error::LayoutMismatch("one phase per qubit required".into()));
    }
    let amps = state.amplitudes().map_with_location(|idx, _, a| {
        let phase: f64 = (0..n).filter(|k| (idx >> (n - 1 - k)) & 1 == 1).map(|k| phases[k]).sum();
        a * C64::from_polar(1.0, phase)
    });
    QuantumState::new(state.layout().clone(), amps)
}

/// Fidelity to `target` after the best choice of one Z phase per qubit.
///
/// Closed form: when the target's support allows every relative phase to be
/// set independently, the optimum is (Σ |cₓ aₓ|)². Targets such as W, Bell
/// and GHZ states qualify.
pub fn gauged_fidelity(state: &QuantumState, target: &QuantumState) -> Result<GaugedFidelity> {
    if state.layout() != target.layout() || !state.layout().is_all_qubits() {
        return Err(Error::LayoutMismatch("gauge fidelity needs matching qubit registers".into()));
    }
    let n = state.layout().len();
    let raw = state.inner(target).norm_sqr();
    let support: Vec<usize> = target.amplitudes().iter().enumerate().filter(|(_, c)| c.norm() > 1e-12).map(|(i, _)| i).collect();
    let (&reference, rest) = support.split_first().ok_or(Error::Empty("target support"))?;
    let bits = |idx: usize| (0..n).map(move |k| ((idx >> (n - 1 - k)) & 1) as f64);

    let a = state.amplitudes();
    let c = target.amplitudes();
    let arg = |i: usize| (c[i].conj() * a[i]).arg();
    let phases = if rest.is_empty() {
        vec![0.0; n]
    } else {
        let rows = rest.len();
        let d = DMatrix::from_fn(rows, n, |r, k| {
            let x: Vec<f64> = bits(rest[r]).collect();
            let x0: Vec<f64> = bits(reference).collect();
            x[k] - x0[k]
        });
        let svd = d.clone().svd(true, true);
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-9).count();
        if rank < rows {
            return Err(Error::InvalidArgument("target phases are not independently adjustable by Z rotations".into()));
        }
        // choose φ so that every term conj(c)·a·e^{iφ·x} shares the reference phase
        let wanted = DVector::from_fn(rows, |r, _| {
            let mut delta = arg(reference) - arg(rest[r]);
            delta = (delta + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            delta
        });
        let phi = svd.solve(&wanted, 1e-12).map_err(|e| Error::Invariant(e.to_string()))?;
        phi.iter().copied().collect()
    };
    let gauged_state = apply_z_phases(state, &phases)?;
    let gauged = gauged_state.inner(target).norm_sqr();
    Ok(GaugedFidelity { raw, gauged, phases, gauged_state })
}

/// Standard metric bundle for a reconstructed state against a pure target.
pub fn summarize(rho: &DensityMatrix, target: &QuantumState) -> Result<BTreeMap<String, f64>> {
    let mut m = BTreeMap::new();
    m.insert("fidelity".into(), state_fidelity(rho, target)?);
    m.insert("max_abs_imag".into(), rho.max_imag());
    m.insert("trace".into(), rho.trace());
    m.insert("min_eigenvalue".into(), rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min));
    m.insert("purity".into(), rho.purity());
    if rho.dim() == 4 {
        let e = concurrence_eof(rho)?;
        m.insert("concurrence".into(), e.concurrence);
        m.insert("eof".into(), e.eof);
    }
    if rho.dim() == 2 {
        m.insert("linear_entropy".into(), linear_entropy(rho));
    }
    Ok(m)
}
