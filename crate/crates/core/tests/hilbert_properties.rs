use proptest::prelude::*;
use qproc_core::hilbert::{
    hermitian_exponential, nearest_density_ls, nearest_psd, partial_trace, tensor_product, CMatrix, DensityMatrix,
    Factor, QuantumOperator, SpaceLayout, C64,
};

fn complex_entries(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
}

fn matrix(d: usize, entries: &[(f64, f64)]) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| C64::new(entries[i * d + j].0, entries[i * d + j].1))
}

fn hermitian(d: usize, entries: &[(f64, f64)]) -> CMatrix {
    let m = matrix(d, entries);
    (&m + m.adjoint()) * C64::from(0.5)
}

fn density(n_qubits: usize, entries: &[(f64, f64)]) -> DensityMatrix {
    let d = 1 << n_qubits;
    let g = matrix(d, entries);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(SpaceLayout::qubits(n_qubits), m / tr).unwrap()
}

fn resonator_layout(d: usize) -> SpaceLayout {
    SpaceLayout::new(vec![Factor::resonator(d - 1).unwrap()]).unwrap()
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn taylor_exponential(h: &CMatrix, t: f64) -> CMatrix {
    let d = h.nrows();
    let m = h * C64::new(0.0, -2.0 * std::f64::consts::PI * t);
    let norm = m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m * C64::from(0.5f64.powi(s));
    let (mut sum, mut term) = (CMatrix::identity(d, d), CMatrix::identity(d, d));
    for k in 1..=40 {
        term = &term * &a * C64::from(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_product_is_associative(e in complex_entries(4 + 9 + 4)) {
        let a = QuantumOperator::new(SpaceLayout::qubits(1), matrix(2, &e[..4])).unwrap();
        let b = QuantumOperator::new(resonator_layout(3), matrix(3, &e[4..13])).unwrap();
        let c = QuantumOperator::new(SpaceLayout::qubits(1), matrix(2, &e[13..])).unwrap();
        let left = tensor_product(&[tensor_product(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = tensor_product(&[a, tensor_product(&[b, c]).unwrap()]).unwrap();
        prop_assert!(max_diff(left.elements(), right.elements()) <= 1e-14);
        prop_assert_eq!(left.layout(), right.layout());
    }

    #[test]
    fn partial_traces_compose(e in complex_entries(64)) {
        let rho = density(3, &e);
        let all = partial_trace(&rho, &[0, 1, 2]).unwrap();
        prop_assert!(max_diff(all.elements(), rho.elements()) <= 1e-15);
        let direct = partial_trace(&rho, &[2]).unwrap();
        let stepwise = partial_trace(&partial_trace(&rho, &[1, 2]).unwrap(), &[1]).unwrap();
        prop_assert!(max_diff(direct.elements(), stepwise.elements()) <= 1e-14);
        prop_assert!((direct.trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn exponential_is_a_one_parameter_group(e in complex_entries(25), t1 in 0.0..10.0f64, t2 in 0.0..10.0f64) {
        let h = QuantumOperator::new(resonator_layout(5), hermitian(5, &e)).unwrap();
        let u1 = hermitian_exponential(&h, t1).unwrap();
        let u2 = hermitian_exponential(&h, t2).unwrap();
        let u12 = hermitian_exponential(&h, t1 + t2).unwrap();
        prop_assert!(max_diff(u1.compose(&u2).unwrap().elements(), u12.elements()) <= 1e-9);
        prop_assert!(u12.is_unitary(1e-10));
    }

    #[test]
    fn exponential_matches_taylor_oracle(d in 2usize..9, e in complex_entries(64), t in 0.0..5.0f64) {
        let h = hermitian(d, &e[..d * d]);
        let op = QuantumOperator::new(resonator_layout(d), h.clone()).unwrap();
        let u = hermitian_exponential(&op, t).unwrap();
        prop_assert!(max_diff(u.elements(), &taylor_exponential(&h, t)) <= 1e-9);
    }

    #[test]
    fn projections_are_idempotent(e in complex_entries(16)) {
        let raw = QuantumOperator::new(SpaceLayout::qubits(2), hermitian(4, &e) + CMatrix::identity(4, 4) * C64::from(0.25)).unwrap();
        for project in [nearest_psd, nearest_density_ls] {
            let Ok(once) = project(&raw) else { continue };
            prop_assert!((once.trace() - 1.0).abs() <= 1e-12);
            prop_assert!(once.eigenvalues().iter().all(|l| *l >= -1e-12));
            let again = project(&QuantumOperator::new(SpaceLayout::qubits(2), once.elements().clone()).unwrap()).unwrap();
            prop_assert!(max_diff(once.elements(), again.elements()) <= 1e-12);
        }
    }

    #[test]
    fn least_squares_projection_is_no_farther_than_clipping(e in complex_entries(16)) {
        // unit-trace Hermitian input
        let h = hermitian(4, &e);
        let shift = (C64::from(1.0) - h.trace()) / C64::from(4.0);
        let raw_m = h + CMatrix::identity(4, 4) * shift;
        let raw = QuantumOperator::new(SpaceLayout::qubits(2), raw_m.clone()).unwrap();
        if let (Ok(clip), Ok(ls)) = (nearest_psd(&raw), nearest_density_ls(&raw)) {
            let dist = |m: &CMatrix| (m - &raw_m).norm();
            prop_assert!(dist(ls.elements()) <= dist(clip.elements()) + 1e-12);
        }
    }
}
