//! Qubit relaxation and pure dephasing as Kraus channels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, DensityMatrix, FactorKind, QuantumOperator, C64, ONE, ZERO};

/// Per-qubit coherence times and nominal gate durations, all in ns.
///
/// Infinite times mean the corresponding process is absent; in JSON they are
/// written as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    #[serde(with = "infinite_as_null")]
    pub t1: Vec<f64>,
    #[serde(with = "infinite_as_null")]
    pub t_phi: Vec<f64>,
    #[serde(default = "default_gate_time_1q")]
    pub gate_time_1q: f64,
    #[serde(default = "default_gate_time_2q")]
    pub gate_time_2q: f64,
    /// Set when the values are placeholders rather than measured device data.
    #[serde(default)]
    pub invented_default: bool,
}

fn default_gate_time_1q() -> f64 {
    10.0
}

fn default_gate_time_2q() -> f64 {
    50.0
}

impl NoiseParams {
    /// Placeholder coherence (T1 = 400 ns, T_phi = 200 ns) for `n` qubits.
    pub fn invented_default(n: usize) -> Self {
        Self {
            t1: vec![400.0; n],
            t_phi: vec![200.0; n],
            gate_time_1q: default_gate_time_1q(),
            gate_time_2q: default_gate_time_2q(),
            invented_default: true,
        }
    }

    /// No decay at all.
    pub fn ideal(n: usize) -> Self {
        Self {
            t1: vec![f64::INFINITY; n],
            t_phi: vec![f64::INFINITY; n],
            gate_time_1q: default_gate_time_1q(),
            gate_time_2q: default_gate_time_2q(),
            invented_default: false,
        }
    }

    /// Relaxation only, with identical T1 on `n` qubits.
    pub fn damping_only(n: usize, t1: f64) -> Self {
        Self { t1: vec![t1; n], ..Self::ideal(n) }
    }

    pub fn n_qubits(&self) -> usize {
        self.t1.len()
    }

    /// Parameters for a sub-register, in the given order.
    pub fn select(&self, qubits: &[usize]) -> Result<NoiseParams> {
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.t1.len() || q >= self.t_phi.len()) {
            return Err(Error::IndexOutOfRange { index: q, len: self.t1.len().min(self.t_phi.len()) });
        }
        Ok(Self {
            t1: qubits.iter().map(|&q| self.t1[q]).collect(),
            t_phi: qubits.iter().map(|&q| self.t_phi[q]).collect(),
            ..self.clone()
        })
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.t1.len() != self.t_phi.len() {
            out.push(format!("noise.t1 has {} entries but noise.t_phi has {}", self.t1.len(), self.t_phi.len()));
        }
        for (name, v) in [("t1", &self.t1), ("t_phi", &self.t_phi)] {
            for (i, t) in v.iter().enumerate() {
                if t.is_nan() || *t <= 0.0 {
                    out.push(format!("noise.{name}[{i}] must be positive, got {t}"));
                }
            }
        }
        for (name, t) in [("gate_time_1q", self.gate_time_1q), ("gate_time_2q", self.gate_time_2q)] {
            if !(t.is_finite() && t >= 0.0) {
                out.push(format!("noise.{name} must be a non-negative duration, got {t}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(v) => Err(Error::InvalidConfig(v)),
            None => Ok(()),
        }
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| if x.is_infinite() { None } else { Some(*x) })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw = Vec::<Option<f64>>::deserialize(d)?;
        Ok(raw.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("elapsed time must be non-negative, got {dt}")));
    }
    Ok(())
}

/// Amplitude damping over `dt`: γ = 1 − exp(−dt/T1),
/// K₀ = diag(1, √(1−γ)), K₁ = √γ |g⟩⟨e|.
pub fn damping_kraus(dt: f64, t1: f64) -> Result<[CMatrix; 2]> {
    check_dt(dt)?;
    let gamma = if t1.is_infinite() { 0.0 } else { 1.0 - (-dt / t1).exp() };
    let k0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, C64::from((1.0 - gamma).sqrt())]);
    let k1 = CMatrix::from_row_slice(2, 2, &[ZERO, C64::from(gamma.sqrt()), ZERO, ZERO]);
    Ok([k0, k1])
}

/// Pure dephasing over `dt`: coherences shrink by λ = exp(−dt/T_φ).
/// K₀ = √((1+λ)/2) I, K₁ = √((1−λ)/2) Z.
pub fn dephasing_kraus(dt: f64, t_phi: f64) -> Result<[CMatrix; 2]> {
    check_dt(dt)?;
    let lambda = if t_phi.is_infinite() { 1.0 } else { (-dt / t_phi).exp() };
    let a = C64::from(((1.0 + lambda) / 2.0).sqrt());
    let b = C64::from(((1.0 - lambda) / 2.0).sqrt());
    let k0 = CMatrix::from_row_slice(2, 2, &[a, ZERO, ZERO, a]);
    let k1 = CMatrix::from_row_slice(2, 2, &[b, ZERO, ZERO, -b]);
    Ok([k0, k1])
}

/// Σ K ρ K† with each K acting on factor `k`.
pub fn apply_local_channel(rho: &DensityMatrix, k: usize, kraus: &[CMatrix]) -> Result<DensityMatrix> {
    let layout = rho.layout();
    let mut out = CMatrix::zeros(rho.dim(), rho.dim());
    for op in kraus {
        let full = QuantumOperator::embed(layout, k, op)?;
        out += full.elements() * rho.elements() * full.elements().adjoint();
    }
    DensityMatrix::new_unchecked(layout.clone(), out)
}

/// Damping then dephasing on each listed qubit for a duration `dt`.
///
/// `qubits` index factors of `rho`'s layout, and the same index selects the
/// qubit's entry in `params`.
pub fn apply_noise_step(rho: &DensityMatrix, params: &NoiseParams, dt: f64, qubits: &[usize]) -> Result<DensityMatrix> {
    check_dt(dt)?;
    let mut out = rho.clone();
    if dt == 0.0 {
        return Ok(out);
    }
    for &q in qubits {
        let factor = rho.layout().factors().get(q).ok_or(Error::IndexOutOfRange { index: q, len: rho.layout().len() })?;
        if factor.kind != FactorKind::Qubit {
            return Err(Error::InvalidArgument(format!("factor {q} is not a qubit")));
        }
        let (t1, t_phi) = match (params.t1.get(q), params.t_phi.get(q)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::IndexOutOfRange { index: q, len: params.n_qubits() }),
        };
        if t1.is_finite() {
            out = apply_local_channel(&out, q, &damping_kraus(dt, t1)?)?;
        }
        if t_phi.is_finite() {
            out = apply_local_channel(&out, q, &dephasing_kraus(dt, t_phi)?)?;
        }
    }
    Ok(out)
}
