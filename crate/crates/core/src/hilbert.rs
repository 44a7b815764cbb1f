//! Dense linear algebra over composite qubit/resonator spaces.
//!
//! Basis indices are row-major over the factor list: the leftmost factor is
//! the most significant digit, so a label like `eggg` reads left to right in
//! factor order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

const HERMITIAN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Qubit,
    Resonator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub kind: FactorKind,
    pub dim: usize,
}

impl Factor {
    pub const fn qubit() -> Self {
        Self { kind: FactorKind::Qubit, dim: 2 }
    }

    /// A resonator truncated at `n_max` photons.
    pub fn resonator(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument("resonator truncation n_max must be >= 1".into()));
        }
        Ok(Self { kind: FactorKind::Resonator, dim: n_max + 1 })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceLayout {
    factors: Vec<Factor>,
}

impl SpaceLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Empty("layout factors"));
        }
        for f in &factors {
            match f.kind {
                FactorKind::Qubit if f.dim != 2 => {
                    return Err(Error::InvalidArgument(format!("qubit factor with dimension {}", f.dim)))
                }
                FactorKind::Resonator if f.dim < 2 => {
                    return Err(Error::InvalidArgument(format!("resonator factor with dimension {}", f.dim)))
                }
                _ => {}
            }
        }
        Ok(Self { factors })
    }

    pub fn qubits(n: usize) -> Self {
        Self { factors: vec![Factor::qubit(); n.max(1)] }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn is_all_qubits(&self) -> bool {
        self.factors.iter().all(|f| f.kind == FactorKind::Qubit)
    }

    pub fn concat(&self, other: &SpaceLayout) -> SpaceLayout {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        SpaceLayout { factors }
    }

    pub fn select(&self, keep: &[usize]) -> SpaceLayout {
        SpaceLayout { factors: keep.iter().map(|&k| self.factors[k]).collect() }
    }

    /// Per-factor digits of a composite basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.dim;
            index /= f.dim;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.factors).fold(0, |acc, (&d, f)| acc * f.dim + d)
    }

    /// Stride of factor `k` in the composite index.
    pub fn stride(&self, k: usize) -> usize {
        self.factors[k + 1..].iter().map(|f| f.dim).product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    layout: SpaceLayout,
    amplitudes: CVector,
}

impl QuantumState {
    pub fn new(layout: SpaceLayout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Normalizes the amplitudes after construction.
    pub fn normalized(layout: SpaceLayout, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero vector cannot be normalized".into()));
        }
        Self::new(layout, amplitudes / C64::from(norm))
    }

    pub fn basis(layout: SpaceLayout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.len() || digits.iter().zip(layout.factors()).any(|(&d, f)| d >= f.dim) {
            return Err(Error::InvalidArgument(format!("basis digits {digits:?} do not fit layout")));
        }
        let mut amps = CVector::zeros(layout.total_dim());
        amps[layout.index(digits)] = ONE;
        Ok(Self { layout, amplitudes: amps })
    }

    /// Qubit register state from a `g`/`e` (or `0`/`1`) label, e.g. `"egg"`.
    pub fn from_label(label: &str) -> Result<Self> {
        let digits = label
            .chars()
            .map(|c| match c {
                'g' | '0' => Ok(0),
                'e' | '1' => Ok(1),
                other => Err(Error::InvalidArgument(format!("bad qubit label character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::basis(SpaceLayout::qubits(digits.len()), &digits)
    }

    /// Normalized superposition of labelled basis states with the given weights.
    pub fn superposition(terms: &[(&str, C64)]) -> Result<Self> {
        let (first, _) = terms.first().ok_or(Error::Empty("superposition terms"))?;
        let mut amps = CVector::zeros(1 << first.len());
        for (label, c) in terms {
            let s = Self::from_label(label)?;
            if s.amplitudes.len() != amps.len() {
                return Err(Error::LayoutMismatch("superposition labels of different length".into()));
            }
            amps += s.amplitudes * *c;
        }
        Self::normalized(SpaceLayout::qubits(first.len()), amps)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &QuantumState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&self, op: &QuantumOperator) -> Result<QuantumState> {
        if op.layout != self.layout {
            return Err(Error::LayoutMismatch("operator and state layouts differ".into()));
        }
        Ok(QuantumState { layout: self.layout.clone(), amplitudes: &op.elements * &self.amplitudes })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            layout: self.layout.clone(),
            elements: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    elements: CMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity (1e-10), unit trace (1e-10) and eigenvalues >= -1e-9.
    pub fn new(layout: SpaceLayout, elements: CMatrix) -> Result<Self> {
        let rho = Self::new_unchecked(layout, elements)?;
        let dev = hermitian_deviation(&rho.elements);
        if dev > 1e-10 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Invariant(format!("density matrix trace {tr}")));
        }
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(rho)
    }

    /// Only checks the shape.
    pub fn new_unchecked(layout: SpaceLayout, elements: CMatrix) -> Result<Self> {
        let d = layout.total_dim();
        if elements.nrows() != d || elements.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} matrix for a space of dimension {d}",
                elements.nrows(),
                elements.ncols()
            )));
        }
        Ok(Self { layout, elements })
    }

    pub fn maximally_mixed(layout: SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, elements: CMatrix::identity(d, d) / C64::from(d as f64) }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_elements(self) -> CMatrix {
        self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.elements.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(symmetrize(&self.elements)).eigenvalues.iter().copied().collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.elements.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn expectation(&self, op: &QuantumOperator) -> Result<C64> {
        if op.layout != self.layout {
            return Err(Error::LayoutMismatch("operator and density matrix layouts differ".into()));
        }
        Ok((&self.elements * &op.elements).trace())
    }

    /// U rho U^dagger.
    pub fn conjugate_by(&self, u: &QuantumOperator) -> Result<DensityMatrix> {
        if u.layout != self.layout {
            return Err(Error::LayoutMismatch("operator and density matrix layouts differ".into()));
        }
        Ok(DensityMatrix {
            layout: self.layout.clone(),
            elements: &u.elements * &self.elements * u.elements.adjoint(),
        })
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("trace distance between different layouts".into()));
        }
        let diff = symmetrize(&(&self.elements - &other.elements));
        Ok(0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumOperator {
    layout: SpaceLayout,
    elements: CMatrix,
}

impl QuantumOperator {
    pub fn new(layout: SpaceLayout, elements: CMatrix) -> Result<Self> {
        let d = layout.total_dim();
        if elements.nrows() != d || elements.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} operator for a space of dimension {d}",
                elements.nrows(),
                elements.ncols()
            )));
        }
        Ok(Self { layout, elements })
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, elements: CMatrix::identity(d, d) }
    }

    pub fn zeros(layout: SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, elements: CMatrix::zeros(d, d) }
    }

    /// `local` acting on factor `k`, identity elsewhere.
    pub fn embed(layout: &SpaceLayout, k: usize, local: &CMatrix) -> Result<Self> {
        if k >= layout.len() {
            return Err(Error::IndexOutOfRange { index: k, len: layout.len() });
        }
        let dk = layout.factors()[k].dim;
        if local.nrows() != dk || local.ncols() != dk {
            return Err(Error::LayoutMismatch(format!("local operator for factor {k} must be {dk}x{dk}")));
        }
        let left: usize = layout.factors()[..k].iter().map(|f| f.dim).product();
        let right = layout.stride(k);
        let elements = CMatrix::identity(left, left).kronecker(local).kronecker(&CMatrix::identity(right, right));
        Ok(Self { layout: layout.clone(), elements })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), elements: self.elements.adjoint() }
    }

    pub fn compose(&self, rhs: &QuantumOperator) -> Result<QuantumOperator> {
        if self.layout != rhs.layout {
            return Err(Error::LayoutMismatch("composing operators on different layouts".into()));
        }
        Ok(Self { layout: self.layout.clone(), elements: &self.elements * &rhs.elements })
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { layout: self.layout.clone(), elements: &self.elements * s }
    }

    pub fn add(&self, rhs: &QuantumOperator) -> Result<QuantumOperator> {
        if self.layout != rhs.layout {
            return Err(Error::LayoutMismatch("adding operators on different layouts".into()));
        }
        Ok(Self { layout: self.layout.clone(), elements: &self.elements + &rhs.elements })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermitian_deviation(&self.elements) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let d = self.dim();
        let prod = self.elements.adjoint() * &self.elements;
        (prod - CMatrix::identity(d, d)).iter().all(|z| z.norm() <= tol)
    }

    pub fn commutator(&self, rhs: &QuantumOperator) -> Result<QuantumOperator> {
        let ab = self.compose(rhs)?;
        let ba = rhs.compose(self)?;
        Ok(Self { layout: self.layout.clone(), elements: ab.elements - ba.elements })
    }
}

/// Things that combine under the Kronecker product.
pub trait Tensor: Sized + Clone {
    fn tensor(&self, rhs: &Self) -> Self;
}

impl Tensor for QuantumState {
    fn tensor(&self, rhs: &Self) -> Self {
        QuantumState {
            layout: self.layout.concat(&rhs.layout),
            amplitudes: self.amplitudes.kronecker(&rhs.amplitudes),
        }
    }
}

impl Tensor for QuantumOperator {
    fn tensor(&self, rhs: &Self) -> Self {
        QuantumOperator {
            layout: self.layout.concat(&rhs.layout),
            elements: self.elements.kronecker(&rhs.elements),
        }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, rhs: &Self) -> Self {
        DensityMatrix {
            layout: self.layout.concat(&rhs.layout),
            elements: self.elements.kronecker(&rhs.elements),
        }
    }
}

/// Kronecker product in the given order; the result layout is the concatenation.
pub fn tensor_product<T: Tensor>(items: &[T]) -> Result<T> {
    let (first, rest) = items.split_first().ok_or(Error::Empty("tensor_product operands"))?;
    Ok(rest.iter().fold(first.clone(), |acc, x| acc.tensor(x)))
}

/// Reduced density matrix on the factors in `keep` (kept in layout order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::Empty("partial_trace keep set"));
    }
    let layout = rho.layout();
    let n = layout.len();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let kept_layout = layout.select(&keep);
    if traced.is_empty() {
        return Ok(rho.clone());
    }
    let traced_layout = layout.select(&traced);

    let dk = kept_layout.total_dim();
    let dt = traced_layout.total_dim();
    // full index of (kept digits, traced digits)
    let compose = |kd: &[usize], td: &[usize]| {
        let mut digits = vec![0; n];
        for (&k, &d) in keep.iter().zip(kd) {
            digits[k] = d;
        }
        for (&t, &d) in traced.iter().zip(td) {
            digits[t] = d;
        }
        layout.index(&digits)
    };
    let mut table = vec![0usize; dk * dt];
    for a in 0..dk {
        let ad = kept_layout.digits(a);
        for t in 0..dt {
            table[a * dt + t] = compose(&ad, &traced_layout.digits(t));
        }
    }
    let src = rho.elements();
    let out = CMatrix::from_fn(dk, dk, |i, j| (0..dt).map(|t| src[(table[i * dt + t], table[j * dt + t])]).sum());
    Ok(DensityMatrix { layout: kept_layout, elements: out })
}

/// Eigendecomposition of a Hermitian operator, reusable for many evolution times.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    layout: SpaceLayout,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl SpectralPropagator {
    pub fn new(h: &QuantumOperator) -> Result<Self> {
        let dev = hermitian_deviation(&h.elements);
        let scale = h.elements.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let eig = SymmetricEigen::new(symmetrize(&h.elements));
        Ok(Self {
            layout: h.layout.clone(),
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    /// Eigenfrequencies in the Hamiltonian's units (GHz).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn phases(&self, t: f64) -> CVector {
        CVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -std::f64::consts::TAU * l * t)),
        )
    }

    /// exp(-i 2 pi H t) for H in GHz and t in ns.
    pub fn unitary(&self, t: f64) -> QuantumOperator {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(self.phases(t).iter()) {
            col *= *p;
        }
        QuantumOperator { layout: self.layout.clone(), elements: scaled * v.adjoint() }
    }

    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        if state.layout != self.layout {
            return Err(Error::LayoutMismatch("state and Hamiltonian layouts differ".into()));
        }
        let coeffs = self.eigenvectors.adjoint() * &state.amplitudes;
        let rotated = coeffs.component_mul(&self.phases(t));
        Ok(QuantumState { layout: self.layout.clone(), amplitudes: &self.eigenvectors * rotated })
    }
}

/// U = exp(-i 2 pi H t), H in GHz and t in ns, by spectral decomposition.
pub fn hermitian_exponential(h: &QuantumOperator, t: f64) -> Result<QuantumOperator> {
    Ok(SpectralPropagator::new(h)?.unitary(t))
}

/// Clip negative eigenvalues to zero and rescale the spectrum to unit trace.
pub fn nearest_psd(raw: &QuantumOperator) -> Result<DensityMatrix> {
    let dev = hermitian_deviation(&raw.elements);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let eig = SymmetricEigen::new(symmetrize(&raw.elements));
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::NotPositive { min_eigenvalue: eig.eigenvalues.min() });
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, l) in scaled.column_iter_mut().zip(&clipped) {
        col *= C64::from(l / total);
    }
    let elements = symmetrize(&(scaled * v.adjoint()));
    Ok(DensityMatrix { layout: raw.layout.clone(), elements })
}

/// Closest density matrix in Frobenius norm: the spectrum is projected onto
/// the probability simplex, `μᵢ = max(λᵢ − θ, 0)` with θ fixed by `Σ μᵢ = 1`.
///
/// Unlike [`nearest_psd`], negative weight is taken evenly from the surviving
/// eigenvalues instead of in proportion to them, so a dominant eigenvalue
/// loses less.
pub fn nearest_density_ls(raw: &QuantumOperator) -> Result<DensityMatrix> {
    let dev = hermitian_deviation(&raw.elements);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let eig = SymmetricEigen::new(symmetrize(&raw.elements));
    let mut sorted: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut theta = 0.0;
    let mut cumulative = 0.0;
    for (k, &l) in sorted.iter().enumerate() {
        cumulative += l;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if l - candidate > 0.0 {
            theta = candidate;
        }
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, l) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= C64::from((l - theta).max(0.0));
    }
    let elements = symmetrize(&(scaled * v.adjoint()));
    Ok(DensityMatrix { layout: raw.layout.clone(), elements })
}

/// Eigenvalues below this are round-off; their square roots would not be.
pub(crate) fn spectral_floor(dim: usize, largest: f64) -> f64 {
    64.0 * dim as f64 * f64::EPSILON * largest.abs().max(1.0)
}

/// `√x` with eigenvalue noise below `floor` treated as zero.
pub(crate) fn floored_sqrt(x: f64, floor: f64) -> f64 {
    if x <= floor {
        0.0
    } else {
        x.sqrt()
    }
}

/// Square root of a PSD Hermitian matrix; eigenvalues at round-off level are
/// set to zero.
pub(crate) fn psd_sqrt(m: &CMatrix) -> (CMatrix, f64) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let min = eig.eigenvalues.min();
    let floor = spectral_floor(m.nrows(), eig.eigenvalues.max());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, l) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= C64::from(floored_sqrt(*l, floor));
    }
    (scaled * v.adjoint(), min)
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::from(0.5)
}

/// Either a ket or a density matrix over the same kind of layout.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(QuantumState),
    Mixed(DensityMatrix),
}

impl State {
    pub fn layout(&self) -> &SpaceLayout {
        match self {
            State::Pure(s) => s.layout(),
            State::Mixed(r) => r.layout(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(s) => s.to_density(),
            State::Mixed(r) => r.clone(),
        }
    }

    /// Computational-basis probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        match self {
            State::Pure(s) => s.probabilities(),
            State::Mixed(r) => r.populations(),
        }
    }

    pub fn evolve(&self, u: &QuantumOperator) -> Result<State> {
        Ok(match self {
            State::Pure(s) => State::Pure(s.apply(u)?),
            State::Mixed(r) => State::Mixed(r.conjugate_by(u)?),
        })
    }
}

impl From<QuantumState> for State {
    fn from(s: QuantumState) -> Self {
        State::Pure(s)
    }
}

impl From<DensityMatrix> for State {
    fn from(r: DensityMatrix) -> Self {
        State::Mixed(r)
    }
}
