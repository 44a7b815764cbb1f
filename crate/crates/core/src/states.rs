//! Named target states. Labels read left to right in ascending qubit order.

use crate::hilbert::{QuantumState, C64};

fn build(terms: &[(&str, f64)]) -> QuantumState {
    let terms: Vec<(&str, C64)> = terms.iter().map(|&(l, c)| (l, C64::from(c))).collect();
    QuantumState::superposition(&terms).expect("static labels are valid")
}

/// (|ge⟩ − |eg⟩)/√2
pub fn singlet() -> QuantumState {
    build(&[("ge", 1.0), ("eg", -1.0)])
}

/// (|gg⟩ + |ee⟩)/√2
pub fn phi_plus() -> QuantumState {
    build(&[("gg", 1.0), ("ee", 1.0)])
}

/// Equal superposition of every single-excitation label on `n` qubits.
pub fn w_state(n: usize) -> QuantumState {
    let labels: Vec<String> = (0..n)
        .map(|k| (0..n).map(|j| if j == k { 'e' } else { 'g' }).collect())
        .collect();
    let terms: Vec<(&str, f64)> = labels.iter().map(|l| (l.as_str(), 1.0)).collect();
    build(&terms)
}

/// (|g…g⟩ + |e…e⟩)/√2
pub fn ghz(n: usize) -> QuantumState {
    let g = "g".repeat(n);
    let e = "e".repeat(n);
    build(&[(&g, 1.0), (&e, 1.0)])
}

/// H on the first qubit of a three-qubit GHZ state:
/// (|ggg⟩ + |egg⟩ + |gee⟩ − |eee⟩)/2.
pub fn psi3() -> QuantumState {
    build(&[("ggg", 1.0), ("egg", 1.0), ("gee", 1.0), ("eee", -1.0)])
}

pub fn ground(n: usize) -> QuantumState {
    QuantumState::from_label(&"g".repeat(n)).expect("valid label")
}
