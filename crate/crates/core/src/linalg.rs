//! Dense complex matrix arithmetic for small Hilbert spaces.
//!
//! Everything here is sized for desk-scale dimensions (d ≤ 8): storage is
//! dense and row-major, and the Hermitian eigensolver is a cyclic complex
//! Jacobi iteration rather than a blocked LAPACK-grade routine.

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance for treating a matrix as Hermitian in constructor checks.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Default degeneracy threshold, relative to the spectral radius.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// Off-diagonal Frobenius mass at which the Jacobi sweep stops.
const JACOBI_OFF_TOL: f64 = 1e-14;

const MAX_JACOBI_SWEEPS: usize = 64;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not hermitian: max deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("degenerate spectrum: smallest eigenvalue gap {gap:.3e} is below threshold {threshold:.3e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },
    #[error("operator basis needs dimension >= 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("basis is not orthonormal: max Gram deviation {0:.3e}")]
    NotOrthonormal(f64),
    #[error("basis element 0 must be id/sqrt(d), max deviation {0:.3e}")]
    BadIdentityElement(f64),
    #[error("jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
}

/// Square complex matrix, row-major dense storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex64::ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from row-major rows; all rows must have length equal to the
    /// number of rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::DimensionMismatch { expected: dim, got: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { dim, entries })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        m
    }

    /// Rank-one matrix v v† from a column vector.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        Self::from_fn(dim, |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix add: dimension mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self { dim: self.dim, entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix sub: dimension mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self { dim: self.dim, entries }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let entries = self.entries.iter().map(|a| a * factor).collect();
        Self { dim: self.dim, entries }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// In-place `self += factor * other`, the integrator's inner loop.
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += factor * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul: dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max deviation from A = A†.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// The Hermitian part (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let c = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i  ", c.re, c.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrix σ_k for k in 0..=3, with σ₀ the 2×2 identity.
pub fn pauli(k: usize) -> ComplexMatrix {
    let i = Complex64::I;
    let o = Complex64::ONE;
    let z = Complex64::ZERO;
    let rows = match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        3 => [[o, z], [z, -o]],
        _ => panic!("pauli index must be 0..=3, got {k}"),
    };
    ComplexMatrix::from_fn(2, |r, c| rows[r][c])
}

/// Hilbert-Schmidt inner product tr(A† B), conjugate-linear in A.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64, LinalgError> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Orthonormal operator basis L_0 … L_{d²−1} with L_0 = id/√d and the rest
/// traceless.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis operators, d².
    #[inline]
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    #[inline]
    pub fn op(&self, alpha: usize) -> &ComplexMatrix {
        &self.operators[alpha]
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Wrap a caller-supplied operator family, checking orthonormality and
    /// the identity normalization of the first element.
    pub fn from_operators(operators: Vec<ComplexMatrix>) -> Result<Self, LinalgError> {
        let dim = match operators.first() {
            Some(op) => op.dim(),
            None => return Err(LinalgError::DimensionTooSmall(0)),
        };
        if operators.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim * dim,
                got: operators.len(),
            });
        }
        let id_norm = ComplexMatrix::identity(dim).scale_re(1.0 / (dim as f64).sqrt());
        let id_dev = operators[0].max_abs_diff(&id_norm);
        if id_dev > 1e-12 {
            return Err(LinalgError::BadIdentityElement(id_dev));
        }
        let mut gram_dev: f64 = 0.0;
        for (i, a) in operators.iter().enumerate() {
            for (j, b) in operators.iter().enumerate() {
                let expected = if i == j { Complex64::ONE } else { Complex64::ZERO };
                gram_dev = gram_dev.max((hs_inner(a, b)? - expected).norm());
            }
        }
        if gram_dev > 1e-12 {
            return Err(LinalgError::NotOrthonormal(gram_dev));
        }
        Ok(Self { dim, operators })
    }
}

/// Generalized Gell-Mann basis for dimension d, Hilbert-Schmidt
/// orthonormal, in the fixed order: identity, symmetric (j,k) pairs
/// (lexicographic), antisymmetric pairs, diagonal.
pub fn lindblad_basis(dim: usize) -> Result<OperatorBasis, LinalgError> {
    if dim < 2 {
        return Err(LinalgError::DimensionTooSmall(dim));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut operators = Vec::with_capacity(dim * dim);
    operators.push(ComplexMatrix::identity(dim).scale_re(1.0 / (dim as f64).sqrt()));
    // Symmetric: (E_jk + E_kj)/√2
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut m = ComplexMatrix::zeros(dim);
            m.set(j, k, Complex64::new(inv_sqrt2, 0.0));
            m.set(k, j, Complex64::new(inv_sqrt2, 0.0));
            operators.push(m);
        }
    }
    // Antisymmetric: -i(E_jk − E_kj)/√2
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut m = ComplexMatrix::zeros(dim);
            m.set(j, k, Complex64::new(0.0, -inv_sqrt2));
            m.set(k, j, Complex64::new(0.0, inv_sqrt2));
            operators.push(m);
        }
    }
    // Diagonal: (Σ_{j<l} E_jj − l·E_ll)/√(l(l+1))
    for l in 1..dim {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(dim);
        for j in 0..l {
            m.set(j, j, Complex64::new(norm, 0.0));
        }
        m.set(l, l, Complex64::new(-(l as f64) * norm, 0.0));
        operators.push(m);
    }
    Ok(OperatorBasis { dim, operators })
}

/// Expansion coefficients c_α = ⟨L_α, A⟩ so that A = Σ_α c_α L_α.
pub fn expand(a: &ComplexMatrix, basis: &OperatorBasis) -> Result<Vec<Complex64>, LinalgError> {
    if a.dim() != basis.dim() {
        return Err(LinalgError::DimensionMismatch { expected: basis.dim(), got: a.dim() });
    }
    basis.operators().iter().map(|l| hs_inner(l, a)).collect()
}

/// Rebuild Σ_α c_α L_α from expansion coefficients.
pub fn reconstruct(
    coefficients: &[Complex64],
    basis: &OperatorBasis,
) -> Result<ComplexMatrix, LinalgError> {
    if coefficients.len() != basis.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: basis.len(),
            got: coefficients.len(),
        });
    }
    let mut out = ComplexMatrix::zeros(basis.dim());
    for (c, l) in coefficients.iter().zip(basis.operators()) {
        out = out.add(&l.scale(*c));
    }
    Ok(out)
}

/// Eigenvalues (descending) and orthogonal projectors of a non-degenerate
/// Hermitian operator.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in strictly decreasing order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    /// The projector for the z-th outcome, 1-based to match pointer labels.
    pub fn projector(&self, z: usize) -> &ComplexMatrix {
        &self.projectors[z - 1]
    }

    /// Σ_z m_z P_z.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim());
        for (m, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out = out.add(&p.scale_re(*m));
        }
        out
    }
}

/// Spectral decomposition M = Σ_z m_z P_z of a Hermitian matrix with
/// non-degenerate spectrum. `degeneracy_tol` is relative to the spectral
/// radius; a gap at or below the threshold is an error rather than being
/// silently grouped.
pub fn hermitian_eigendecomposition(
    m: &ComplexMatrix,
    degeneracy_tol: f64,
) -> Result<SpectralDecomposition, LinalgError> {
    let dev = m.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian { deviation: dev, tol: HERMITICITY_TOL });
    }
    let (values, vectors) = jacobi_eigen(&m.hermitian_part())?;
    let d = m.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let radius = eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let threshold = degeneracy_tol * radius;
    let mut min_gap = f64::INFINITY;
    for w in eigenvalues.windows(2) {
        min_gap = min_gap.min(w[0] - w[1]);
    }
    if d > 1 && min_gap <= threshold {
        return Err(LinalgError::DegenerateSpectrum { gap: min_gap, threshold });
    }

    let projectors = order
        .iter()
        .map(|&k| {
            let col: Vec<Complex64> = (0..d).map(|i| vectors.get(i, k)).collect();
            ComplexMatrix::outer(&col)
        })
        .collect();
    Ok(SpectralDecomposition { eigenvalues, projectors })
}

/// Whether the Hermitian part of `a` is positive semi-definite within
/// `tol`, along with its minimum eigenvalue. Errors if `a` deviates from
/// hermiticity by more than `tol`.
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<(bool, f64), LinalgError> {
    let dev = a.hermiticity_deviation();
    if dev > tol {
        return Err(LinalgError::NotHermitian { deviation: dev, tol });
    }
    let min = hermitian_eigenvalues(a)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok((min >= -tol, min))
}

/// Eigenvalues (unsorted) of the Hermitian part of `a`.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    let (values, _) = jacobi_eigen(&a.hermitian_part())?;
    Ok(values)
}

/// Raw eigenpairs of a Hermitian matrix: unsorted eigenvalues and the
/// unitary whose k-th column is the k-th eigenvector. Unlike
/// `hermitian_eigendecomposition` this tolerates degenerate spectra, so
/// it suits propagator construction where only the total conjugation
/// matters.
pub fn hermitian_eigenpairs(
    a: &ComplexMatrix,
) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    let dev = a.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian { deviation: dev, tol: HERMITICITY_TOL });
    }
    jacobi_eigen(&a.hermitian_part())
}

fn off_diagonal_frobenius(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Cyclic complex Jacobi iteration for a Hermitian matrix. Returns the
/// (unsorted) real eigenvalues and the unitary matrix whose columns are
/// the eigenvectors.
fn jacobi_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    let d = a.dim();
    let mut a = a.clone();
    let mut v = ComplexMatrix::identity(d);
    let scale = a.frobenius().max(1.0);
    let tol = JACOBI_OFF_TOL * scale;

    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_diagonal_frobenius(&a) < tol {
            let values = (0..d).map(|i| a.get(i, i).re).collect();
            return Ok((values, v));
        }
        for p in 0..d.saturating_sub(1) {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                let babs = apq.norm();
                if babs == 0.0 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let phase = apq / babs;
                let theta = (aqq - app) / (2.0 * babs);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase * (t * c);

                // A ← R† A R with R_pp = R_qq = c, R_pq = s, R_qp = −s̄.
                for i in 0..d {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s.conj() * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for j in 0..d {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, c * apj - s * aqj);
                    a.set(q, j, s.conj() * apj + c * aqj);
                }
                a.set(p, q, Complex64::ZERO);
                a.set(q, p, Complex64::ZERO);
                a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
                a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));

                for i in 0..d {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s.conj() * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }
    Err(LinalgError::NoConvergence(MAX_JACOBI_SWEEPS))
}
