use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum |f_idle - f_bus| in units of the largest bus coupling.
pub const COUPLING_OFF_RATIO: f64 = 5.0;

/// Half-width of each qubit's tunable range around its idle point, GHz.
pub const OPERATING_HALF_RANGE_GHZ: f64 = 1.0;

/// How qubit-resonator couplings respond to detuning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// A qubit detuned by at least `COUPLING_OFF_RATIO * g` from the resonator
    /// is treated as decoupled ("coupling off"), as in ideal tunable-coupling
    /// control. Closer qubits keep their full coupling.
    #[default]
    Switched,
    /// Every coupling stays on regardless of detuning.
    AlwaysOn,
}

/// Static description of the processor. Frequencies in GHz, couplings in MHz.
///
/// Couplings are vacuum-Rabi splittings: a resonant qubit swaps a single
/// excitation with its resonator in `1 / (2 g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub n_qubits: usize,
    pub f_bus: f64,
    pub f_memory: Vec<f64>,
    pub f_idle: Vec<f64>,
    pub g_bus: Vec<f64>,
    pub g_mem: Vec<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub coupling_mode: CouplingMode,
}

fn default_n_max() -> usize {
    3
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            n_qubits: 4,
            f_bus: 6.1,
            f_memory: vec![6.8, 7.2, 7.1, 6.9],
            f_idle: vec![6.6; 4],
            g_bus: vec![55.0; 4],
            g_mem: vec![20.0; 4],
            n_max: default_n_max(),
            coupling_mode: CouplingMode::Switched,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
    pub severity: Severity,
}

impl Violation {
    fn error(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into(), severity: Severity::Error }
    }
}

impl DeviceConfig {
    /// Same couplings on every qubit-bus pair.
    pub fn with_uniform_bus_coupling(mut self, g_mhz: f64) -> Self {
        self.g_bus = vec![g_mhz; self.n_qubits];
        self
    }

    pub fn g_bus_ghz(&self, q: usize) -> f64 {
        self.g_bus[q] * 1e-3
    }

    pub fn g_mem_ghz(&self, q: usize) -> f64 {
        self.g_mem[q] * 1e-3
    }

    /// Every invariant breach, in field order.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n_qubits;
        if n == 0 {
            out.push(Violation::error("n_qubits", "must be at least 1"));
        }
        for (name, v) in [
            ("f_memory", &self.f_memory),
            ("f_idle", &self.f_idle),
            ("g_bus", &self.g_bus),
            ("g_mem", &self.g_mem),
        ] {
            if v.len() != n {
                out.push(Violation::error(name, format!("has {} entries, expected n_qubits = {n}", v.len())));
            }
            for (i, x) in v.iter().enumerate() {
                if !x.is_finite() {
                    out.push(Violation::error(format!("{name}[{i}]"), "must be finite"));
                }
            }
        }
        for (name, v) in [("g_bus", &self.g_bus), ("g_mem", &self.g_mem)] {
            for (i, g) in v.iter().enumerate() {
                if *g <= 0.0 {
                    out.push(Violation::error(format!("{name}[{i}]"), format!("coupling must be positive, got {g} MHz")));
                }
            }
        }
        if !(self.f_bus.is_finite() && self.f_bus > 0.0) {
            out.push(Violation::error("f_bus", "must be a positive frequency"));
        }
        for (i, f) in self.f_memory.iter().chain(&self.f_idle).enumerate() {
            if *f <= 0.0 {
                out.push(Violation::error(format!("frequency[{i}]"), "must be positive"));
            }
        }
        if self.n_max < 1 {
            out.push(Violation::error("n_max", "Fock truncation must be >= 1"));
        }
        let g_max = self.g_bus.iter().copied().fold(0.0, f64::max) * 1e-3;
        for (i, f) in self.f_idle.iter().enumerate() {
            let detuning = (f - self.f_bus).abs();
            if detuning < COUPLING_OFF_RATIO * g_max {
                out.push(Violation {
                    field: format!("f_idle[{i}]"),
                    message: format!(
                        "coupling-off regime violated: idle detuning {:.1} MHz is below {COUPLING_OFF_RATIO}x the largest bus coupling ({:.1} MHz)",
                        detuning * 1e3,
                        g_max * 1e3
                    ),
                    severity: Severity::Warning,
                });
            }
        }
        out
    }

    /// Fails on the first error-severity violation; warnings pass.
    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().find(|v| v.severity == Severity::Error) {
            Some(v) => Err(Error::InvalidConfig(format!("{}: {}", v.field, v.message))),
            None => Ok(()),
        }
    }

    pub fn idle_freqs(&self) -> Vec<f64> {
        self.f_idle.clone()
    }

    /// Idle frequencies with `qubits` moved to `freq`.
    pub fn tuned(&self, qubits: &[usize], freq: f64) -> Vec<f64> {
        let mut f = self.idle_freqs();
        for &q in qubits {
            f[q] = freq;
        }
        f
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::IndexOutOfRange { index: q, len: self.n_qubits });
        }
        Ok(())
    }
}
