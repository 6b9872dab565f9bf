//! Coupling tensors W^{αβ}(z,y,t) parametrizing the hybrid dynamics.
//!
//! A coupling assigns to every pair of pointer values (z, y) a d²×d²
//! complex matrix in the operator-basis indices (α, β). Validity demands
//! two positivity conditions: every off-diagonal (z ≠ y) block PSD, and
//! the traceless-sector submatrix (α, β ≥ 1) of every diagonal block PSD.

use std::borrow::Cow;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    hermitian_eigendecomposition, hermitian_eigenvalues, hs_inner, ComplexMatrix, LinalgError,
    OperatorBasis, SpectralDecomposition, DEFAULT_DEGENERACY_TOL,
};

/// Tolerance for the PSD block conditions.
pub const PSD_TOL: f64 = 1e-9;

/// Strictness threshold for the transfer-rate condition: rates at or
/// below this are rejected as not positive.
pub const V_STRICT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("coupling shape mismatch: ({dim_a}, {zc_a}) vs ({dim_b}, {zc_b})")]
    ShapeMismatch { dim_a: usize, zc_a: usize, dim_b: usize, zc_b: usize },
    #[error("hamiltonian deviates from hermiticity by {0:.3e}")]
    HamiltonianNotHermitian(f64),
    #[error("rate matrix must be {expected}x{expected} for some dimension d >= 2, got {got}x{got}")]
    BadRateMatrixSize { expected: String, got: usize },
    #[error("rate matrix has negative eigenvalue {0:.3e}")]
    RateMatrixNotPsd(f64),
    #[error("measurement rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("transfer function has size {v} but decomposition/basis have dimension {d}")]
    TransferSizeMismatch { v: usize, d: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Constant coupling tensor of shape (d², d², |Z|, |Z|), dense storage.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTensor {
    dim: usize,
    pointer_count: usize,
    entries: Vec<Complex64>,
}

impl CouplingTensor {
    pub fn zeros(dim: usize, pointer_count: usize) -> Self {
        let bl = dim * dim;
        Self {
            dim,
            pointer_count,
            entries: vec![Complex64::ZERO; bl * bl * pointer_count * pointer_count],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// d², the range of the basis indices α, β.
    #[inline]
    pub fn basis_len(&self) -> usize {
        self.dim * self.dim
    }

    #[inline]
    pub fn pointer_count(&self) -> usize {
        self.pointer_count
    }

    #[inline]
    fn index(&self, alpha: usize, beta: usize, z: usize, y: usize) -> usize {
        let bl = self.basis_len();
        let zc = self.pointer_count;
        debug_assert!(alpha < bl && beta < bl, "basis index out of range");
        debug_assert!((1..=zc).contains(&z) && (1..=zc).contains(&y), "pointer out of range");
        ((alpha * bl + beta) * zc + (z - 1)) * zc + (y - 1)
    }

    /// Entry W^{αβ}(z, y); pointer values are 1-based.
    #[inline]
    pub fn get(&self, alpha: usize, beta: usize, z: usize, y: usize) -> Complex64 {
        self.entries[self.index(alpha, beta, z, y)]
    }

    #[inline]
    pub fn set(&mut self, alpha: usize, beta: usize, z: usize, y: usize, v: Complex64) {
        let i = self.index(alpha, beta, z, y);
        self.entries[i] = v;
    }

    /// The d²×d² matrix W[·][·](z, y) over (α, β).
    pub fn block(&self, z: usize, y: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.basis_len(), |alpha, beta| self.get(alpha, beta, z, y))
    }

    /// The (d²−1)×(d²−1) traceless-sector submatrix W[a][b](z, z), a,b ≥ 1.
    pub fn traceless_submatrix(&self, z: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.basis_len() - 1, |a, b| self.get(a + 1, b + 1, z, z))
    }

    /// Entrywise sum; both positivity conditions survive addition.
    pub fn add(&self, other: &Self) -> Result<Self, CouplingError> {
        if self.dim != other.dim || self.pointer_count != other.pointer_count {
            return Err(CouplingError::ShapeMismatch {
                dim_a: self.dim,
                zc_a: self.pointer_count,
                dim_b: other.dim,
                zc_b: other.pointer_count,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { dim: self.dim, pointer_count: self.pointer_count, entries })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.pointer_count, other.pointer_count);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Coupling with its time behavior: a fixed tensor, or a deterministic
/// side-effect-free provider sampled at integrator substage times.
/// Providers must return tensors of the declared shape and be safe to
/// call concurrently.
#[derive(Clone)]
pub enum Coupling {
    Constant(CouplingTensor),
    TimeDependent {
        dim: usize,
        pointer_count: usize,
        provider: Arc<dyn Fn(f64) -> CouplingTensor + Send + Sync>,
    },
}

impl std::fmt::Debug for Coupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coupling::Constant(w) => f
                .debug_struct("Coupling::Constant")
                .field("dim", &w.dim())
                .field("pointer_count", &w.pointer_count())
                .finish(),
            Coupling::TimeDependent { dim, pointer_count, .. } => f
                .debug_struct("Coupling::TimeDependent")
                .field("dim", dim)
                .field("pointer_count", pointer_count)
                .finish(),
        }
    }
}

impl Coupling {
    pub fn constant(w: CouplingTensor) -> Self {
        Coupling::Constant(w)
    }

    pub fn time_dependent(
        dim: usize,
        pointer_count: usize,
        provider: impl Fn(f64) -> CouplingTensor + Send + Sync + 'static,
    ) -> Self {
        Coupling::TimeDependent { dim, pointer_count, provider: Arc::new(provider) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Coupling::Constant(w) => w.dim(),
            Coupling::TimeDependent { dim, .. } => *dim,
        }
    }

    pub fn pointer_count(&self) -> usize {
        match self {
            Coupling::Constant(w) => w.pointer_count(),
            Coupling::TimeDependent { pointer_count, .. } => *pointer_count,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coupling::Constant(_))
    }

    /// Tensor at time t; borrows for constant couplings.
    pub fn tensor_at(&self, t: f64) -> Cow<'_, CouplingTensor> {
        match self {
            Coupling::Constant(w) => Cow::Borrowed(w),
            Coupling::TimeDependent { dim, pointer_count, provider } => {
                let w = provider(t);
                debug_assert_eq!(w.dim(), *dim, "provider changed dimension");
                debug_assert_eq!(w.pointer_count(), *pointer_count, "provider changed |Z|");
                Cow::Owned(w)
            }
        }
    }

    /// Sum of two couplings; constant when both are.
    pub fn add(&self, other: &Coupling) -> Result<Coupling, CouplingError> {
        if self.dim() != other.dim() || self.pointer_count() != other.pointer_count() {
            return Err(CouplingError::ShapeMismatch {
                dim_a: self.dim(),
                zc_a: self.pointer_count(),
                dim_b: other.dim(),
                zc_b: other.pointer_count(),
            });
        }
        match (self, other) {
            (Coupling::Constant(a), Coupling::Constant(b)) => {
                Ok(Coupling::Constant(a.add(b)?))
            }
            _ => {
                let a = self.clone();
                let b = other.clone();
                Ok(Coupling::time_dependent(self.dim(), self.pointer_count(), move |t| {
                    a.tensor_at(t)
                        .into_owned()
                        .add(&b.tensor_at(t))
                        .expect("shape checked at composition time")
                }))
            }
        }
    }
}

/// Coupling generating pure Schrödinger evolution under H on every block:
/// W^{a0}(z,z) = −i√d ⟨L_a, H⟩ and W^{0a}(z,z) its conjugate, with every
/// entry off-diagonal in (z,y) zero. The pointer distribution is frozen
/// under this coupling.
pub fn unitary_coupling(
    h: &ComplexMatrix,
    basis: &OperatorBasis,
    pointer_count: usize,
) -> Result<CouplingTensor, CouplingError> {
    let dev = h.hermiticity_deviation();
    if dev > crate::linalg::HERMITICITY_TOL {
        return Err(CouplingError::HamiltonianNotHermitian(dev));
    }
    if h.dim() != basis.dim() {
        return Err(LinalgError::DimensionMismatch { expected: basis.dim(), got: h.dim() }.into());
    }
    let d = basis.dim();
    let sqrt_d = (d as f64).sqrt();
    let mut w = CouplingTensor::zeros(d, pointer_count);
    for a in 1..basis.len() {
        let entry = Complex64::new(0.0, -sqrt_d) * hs_inner(basis.op(a), h)?;
        if entry == Complex64::ZERO {
            continue;
        }
        for z in 1..=pointer_count {
            w.set(a, 0, z, z, entry);
            w.set(0, a, z, z, entry.conj());
        }
    }
    Ok(w)
}

/// Coupling generating block-wise Lindblad dissipation with rate matrix
/// λ over the traceless basis sector: W^{ab}(z,z) = λ^{ab} for a,b ≥ 1.
/// λ must be (d²−1)×(d²−1) and PSD. Also freezes the pointer.
pub fn lindblad_coupling(
    lambda: &ComplexMatrix,
    pointer_count: usize,
) -> Result<CouplingTensor, CouplingError> {
    let n = lambda.dim();
    // n = d²−1 for integer d ≥ 2.
    let d = ((n + 1) as f64).sqrt().round() as usize;
    if d < 2 || d * d != n + 1 {
        return Err(CouplingError::BadRateMatrixSize { expected: "d^2-1".into(), got: n });
    }
    let (psd, min) = crate::linalg::is_psd(lambda, PSD_TOL)?;
    if !psd {
        return Err(CouplingError::RateMatrixNotPsd(min));
    }
    let mut w = CouplingTensor::zeros(d, pointer_count);
    for a in 1..=n {
        for b in 1..=n {
            let v = lambda.get(a - 1, b - 1);
            if v == Complex64::ZERO {
                continue;
            }
            for z in 1..=pointer_count {
                w.set(a, b, z, z, v);
            }
        }
    }
    Ok(w)
}

/// Transfer-rate function V^a(z, y) steering pointer jumps y → z tied to
/// measurement outcome a. Outcome and pointer labels share the range
/// 1..=d.
#[derive(Clone, Debug, PartialEq)]
pub struct VFunction {
    size: usize,
    entries: Vec<f64>,
}

impl VFunction {
    pub fn zeros(size: usize) -> Self {
        Self { size, entries: vec![0.0; size * size * size] }
    }

    /// The one-constant family V^a(z, y) = γ δ_{az}: every outcome-a event
    /// moves the pointer straight to a, at uniform rate γ.
    pub fn simple(gamma: f64, size: usize) -> Self {
        let mut v = Self::zeros(size);
        for a in 1..=size {
            for y in 1..=size {
                v.set(a, a, y, gamma);
            }
        }
        v
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    fn index(&self, a: usize, z: usize, y: usize) -> usize {
        debug_assert!((1..=self.size).contains(&a), "outcome out of range");
        debug_assert!((1..=self.size).contains(&z) && (1..=self.size).contains(&y));
        ((a - 1) * self.size + (z - 1)) * self.size + (y - 1)
    }

    #[inline]
    pub fn get(&self, a: usize, z: usize, y: usize) -> f64 {
        self.entries[self.index(a, z, y)]
    }

    pub fn set(&mut self, a: usize, z: usize, y: usize, value: f64) {
        let i = self.index(a, z, y);
        self.entries[i] = value;
    }
}

/// Which admissibility condition a transfer-function entry violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VCondition {
    /// V^m(z, m) ≠ 0 for z ≠ m: an outcome-m event may not move a pointer
    /// already showing m.
    PointerLeavesMatch,
    /// V^m(z, i) ≠ 0 for z outside {m, i}: an outcome-m event may not park
    /// the pointer on an unrelated third value.
    PointerSkipsToThird,
    /// V^m(m, i) ≤ tol for m ≠ i: the rate driving the pointer to the
    /// outcome it just produced must be strictly positive.
    CorrectionRateNotPositive,
}

#[derive(Clone, Debug)]
pub struct VViolation {
    pub condition: VCondition,
    pub outcome: usize,
    pub to: usize,
    pub from: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct VReport {
    pub pass: bool,
    pub violations: Vec<VViolation>,
}

/// Check the three admissibility conditions on a transfer function.
/// Diagonal entries V^m(z, z) are unconstrained and never inspected.
pub fn validate_v(v: &VFunction, tol: f64) -> VReport {
    let d = v.size();
    let mut violations = Vec::new();
    for m in 1..=d {
        for z in 1..=d {
            if z != m && v.get(m, z, m).abs() > tol {
                violations.push(VViolation {
                    condition: VCondition::PointerLeavesMatch,
                    outcome: m,
                    to: z,
                    from: m,
                    value: v.get(m, z, m),
                });
            }
        }
        for i in 1..=d {
            if i == m {
                continue;
            }
            for z in 1..=d {
                if z == m || z == i {
                    continue;
                }
                if v.get(m, z, i).abs() > tol {
                    violations.push(VViolation {
                        condition: VCondition::PointerSkipsToThird,
                        outcome: m,
                        to: z,
                        from: i,
                        value: v.get(m, z, i),
                    });
                }
            }
            if v.get(m, m, i) <= tol {
                violations.push(VViolation {
                    condition: VCondition::CorrectionRateNotPositive,
                    outcome: m,
                    to: m,
                    from: i,
                    value: v.get(m, m, i),
                });
            }
        }
    }
    VReport { pass: violations.is_empty(), violations }
}

fn projector_coefficients(
    spec: &SpectralDecomposition,
    basis: &OperatorBasis,
) -> Result<Vec<Vec<Complex64>>, CouplingError> {
    (1..=spec.dim())
        .map(|z| crate::linalg::expand(spec.projector(z), basis).map_err(Into::into))
        .collect()
}

/// Coupling built from a transfer function and the projectors of a
/// measurement decomposition: W^{αβ}(z,y) = Σ_a V^a(z,y) ⟨L_α,P_a⟩⟨P_a,L_β⟩.
pub fn coupling_from_v(
    v: &VFunction,
    spec: &SpectralDecomposition,
    basis: &OperatorBasis,
) -> Result<CouplingTensor, CouplingError> {
    let d = basis.dim();
    if spec.dim() != d || v.size() != d {
        return Err(CouplingError::TransferSizeMismatch { v: v.size(), d });
    }
    let coeff = projector_coefficients(spec, basis)?;
    let bl = basis.len();
    let mut w = CouplingTensor::zeros(d, d);
    for z in 1..=d {
        for y in 1..=d {
            for a in 1..=d {
                let rate = v.get(a, z, y);
                if rate == 0.0 {
                    continue;
                }
                let c = &coeff[a - 1];
                for alpha in 0..bl {
                    for beta in 0..bl {
                        let add = rate * c[alpha] * c[beta].conj();
                        let cur = w.get(alpha, beta, z, y);
                        w.set(alpha, beta, z, y, cur + add);
                    }
                }
            }
        }
    }
    Ok(w)
}

/// The one-constant measurement coupling: W^{αβ}(z,y) = γ ⟨L_α,P_z⟩⟨P_z,L_β⟩,
/// independent of the source pointer y. P_z are the eigenprojectors of M,
/// labeled by descending eigenvalue; the pointer space equals the outcome
/// space.
pub fn simple_projective_coupling(
    m: &ComplexMatrix,
    gamma: f64,
    basis: &OperatorBasis,
) -> Result<CouplingTensor, CouplingError> {
    if gamma <= 0.0 {
        return Err(CouplingError::NonPositiveRate(gamma));
    }
    let spec = hermitian_eigendecomposition(m, DEFAULT_DEGENERACY_TOL)?;
    projective_coupling_from_decomposition(&spec, gamma, basis)
}

/// Same coupling from an already-computed decomposition.
pub fn projective_coupling_from_decomposition(
    spec: &SpectralDecomposition,
    gamma: f64,
    basis: &OperatorBasis,
) -> Result<CouplingTensor, CouplingError> {
    if gamma <= 0.0 {
        return Err(CouplingError::NonPositiveRate(gamma));
    }
    if spec.dim() != basis.dim() {
        return Err(CouplingError::TransferSizeMismatch { v: spec.dim(), d: basis.dim() });
    }
    let d = basis.dim();
    let coeff = projector_coefficients(spec, basis)?;
    let bl = basis.len();
    let mut w = CouplingTensor::zeros(d, d);
    for z in 1..=d {
        let c = &coeff[z - 1];
        for alpha in 0..bl {
            for beta in 0..bl {
                let v = gamma * c[alpha] * c[beta].conj();
                if v == Complex64::ZERO {
                    continue;
                }
                for y in 1..=d {
                    w.set(alpha, beta, z, y, v);
                }
            }
        }
    }
    Ok(w)
}

/// Positivity check of one block, with the evidence.
#[derive(Clone, Debug)]
pub struct BlockCheck {
    pub z: usize,
    pub y: usize,
    pub min_eigenvalue: f64,
    pub hermiticity_deviation: f64,
    pub pass: bool,
}

/// Positivity check of one diagonal traceless-sector submatrix.
#[derive(Clone, Debug)]
pub struct TracelessCheck {
    pub z: usize,
    pub min_eigenvalue: f64,
    pub hermiticity_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct PositivityReport {
    pub pass: bool,
    /// Full (α,β) blocks for every pair z ≠ y.
    pub off_diagonal: Vec<BlockCheck>,
    /// Traceless-sector submatrices for every z.
    pub diagonal: Vec<TracelessCheck>,
}

fn min_eig_or_nan(m: &ComplexMatrix) -> f64 {
    match hermitian_eigenvalues(m) {
        Ok(v) => v.into_iter().fold(f64::INFINITY, f64::min),
        Err(_) => f64::NAN,
    }
}

/// Evaluate both positivity conditions on a tensor; report-style, never
/// errors. A `pass` requires hermiticity of the inspected block within
/// `tol` and minimum eigenvalue ≥ −tol.
pub fn validate_positivity(w: &CouplingTensor, tol: f64) -> PositivityReport {
    let zc = w.pointer_count();
    let mut off_diagonal = Vec::new();
    let mut diagonal = Vec::new();
    let mut pass = true;
    for z in 1..=zc {
        for y in 1..=zc {
            if z == y {
                continue;
            }
            let block = w.block(z, y);
            let herm = block.hermiticity_deviation();
            let min = min_eig_or_nan(&block);
            let ok = herm <= tol && min >= -tol;
            pass &= ok;
            off_diagonal.push(BlockCheck {
                z,
                y,
                min_eigenvalue: min,
                hermiticity_deviation: herm,
                pass: ok,
            });
        }
    }
    for z in 1..=zc {
        let sub = w.traceless_submatrix(z);
        let herm = sub.hermiticity_deviation();
        let min = min_eig_or_nan(&sub);
        let ok = herm <= tol && min >= -tol;
        pass &= ok;
        diagonal.push(TracelessCheck {
            z,
            min_eigenvalue: min,
            hermiticity_deviation: herm,
            pass: ok,
        });
    }
    PositivityReport { pass, off_diagonal, diagonal }
}

/// Positivity report for a possibly time-dependent coupling at one time.
pub fn validate_positivity_at(coupling: &Coupling, t: f64, tol: f64) -> PositivityReport {
    validate_positivity(&coupling.tensor_at(t), tol)
}
