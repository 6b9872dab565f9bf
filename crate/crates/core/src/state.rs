//! Hybrid quantum-classical states.
//!
//! A hybrid state assigns a positive semi-definite operator block ρ(z) to
//! each pointer value z, with the block traces summing to one. Pointer
//! values are 1-based in the public API; storage is 0-based.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{hermitian_eigenvalues, ComplexMatrix, LinalgError};

/// Validation tolerance for hermiticity, block positivity, and total trace.
pub const STATE_TOL: f64 = 1e-9;

/// Below this block trace, conditioning on the pointer value is refused.
pub const COLLAPSE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("hybrid state needs at least one block")]
    Empty,
    #[error("block {z} has dimension {got}, expected {expected}")]
    BlockDimensionMismatch { z: usize, expected: usize, got: usize },
    #[error("block {z} deviates from hermiticity by {deviation:.3e}")]
    BlockNotHermitian { z: usize, deviation: f64 },
    #[error("block {z} has negative eigenvalue {min_eigenvalue:.3e}")]
    BlockNotPositive { z: usize, min_eigenvalue: f64 },
    #[error("block traces sum to {total}, residual {residual:.3e} exceeds {tol:.3e}")]
    TraceNotNormalized { total: f64, residual: f64, tol: f64 },
    #[error("pointer value {z} is out of range 1..={max}")]
    PointerOutOfRange { z: usize, max: usize },
    #[error("block {z} has trace {trace:.3e}, too small to condition on")]
    NegligibleWeight { z: usize, trace: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// State of a quantum system tracked jointly with a classical pointer.
#[derive(Clone, Debug)]
pub struct HybridState {
    blocks: Vec<ComplexMatrix>,
}

impl HybridState {
    /// Wrap blocks without validation; use `validate` before trusting the
    /// result as a physical state.
    pub fn from_blocks_unchecked(blocks: Vec<ComplexMatrix>) -> Self {
        Self { blocks }
    }

    pub fn from_blocks(blocks: Vec<ComplexMatrix>) -> Result<Self, StateError> {
        let state = Self { blocks };
        state.validate(STATE_TOL)?;
        Ok(state)
    }

    /// All-zero blocks, the additive identity for integrator arithmetic.
    pub fn zeros(dim: usize, pointer_count: usize) -> Self {
        Self { blocks: vec![ComplexMatrix::zeros(dim); pointer_count] }
    }

    /// ρ(z) = p(z)·ρ for a fixed quantum state ρ and probabilities p.
    pub fn product(rho: &ComplexMatrix, probabilities: &[f64]) -> Self {
        let blocks = probabilities.iter().map(|&p| rho.scale_re(p)).collect();
        Self { blocks }
    }

    /// Number of pointer values |Z|.
    #[inline]
    pub fn pointer_count(&self) -> usize {
        self.blocks.len()
    }

    /// Hilbert space dimension d.
    #[inline]
    pub fn dim(&self) -> usize {
        self.blocks.first().map_or(0, ComplexMatrix::dim)
    }

    /// Block for pointer value z (1-based).
    #[inline]
    pub fn block(&self, z: usize) -> &ComplexMatrix {
        &self.blocks[z - 1]
    }

    pub fn block_mut(&mut self, z: usize) -> &mut ComplexMatrix {
        &mut self.blocks[z - 1]
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [ComplexMatrix] {
        &mut self.blocks
    }

    /// Check hermiticity, positivity, block dimensions, and total trace
    /// against `tol`. Reports the first violation found.
    pub fn validate(&self, tol: f64) -> Result<(), StateError> {
        if self.blocks.is_empty() {
            return Err(StateError::Empty);
        }
        let dim = self.dim();
        for (idx, block) in self.blocks.iter().enumerate() {
            let z = idx + 1;
            if block.dim() != dim {
                return Err(StateError::BlockDimensionMismatch {
                    z,
                    expected: dim,
                    got: block.dim(),
                });
            }
            let dev = block.hermiticity_deviation();
            if dev > tol {
                return Err(StateError::BlockNotHermitian { z, deviation: dev });
            }
            let min = hermitian_eigenvalues(block)?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if min < -tol {
                return Err(StateError::BlockNotPositive { z, min_eigenvalue: min });
            }
        }
        let total = self.total_trace();
        let residual = (total - 1.0).abs();
        if residual > tol {
            return Err(StateError::TraceNotNormalized { total, residual, tol });
        }
        Ok(())
    }

    /// Σ_z tr ρ(z).
    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    /// Reduced quantum state ρ̂ = Σ_z ρ(z), ignoring the pointer.
    pub fn induced_quantum_state(&self) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(self.dim());
        for block in &self.blocks {
            sum = sum.add(block);
        }
        sum
    }

    /// Pointer distribution p(z) = tr ρ(z), indexed from 0 as z−1.
    pub fn induced_probabilities(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.trace().re).collect()
    }

    /// Quantum state conditioned on reading pointer value z:
    /// ρ(z)/tr ρ(z). Refused when the weight is below `COLLAPSE_TOL`.
    pub fn collapsed_state(&self, z: usize) -> Result<ComplexMatrix, StateError> {
        if z == 0 || z > self.pointer_count() {
            return Err(StateError::PointerOutOfRange { z, max: self.pointer_count() });
        }
        let block = self.block(z);
        let trace = block.trace().re;
        if trace < COLLAPSE_TOL {
            return Err(StateError::NegligibleWeight { z, trace });
        }
        Ok(block.scale_re(1.0 / trace))
    }

    /// All induced quantities in one pass.
    pub fn induced_quantities(&self) -> InducedQuantities {
        let quantum_state = self.induced_quantum_state();
        let probabilities = self.induced_probabilities();
        let collapsed: Vec<Option<ComplexMatrix>> = (1..=self.pointer_count())
            .map(|z| self.collapsed_state(z).ok())
            .collect();
        InducedQuantities { quantum_state, probabilities, collapsed }
    }

    /// Bloch vector r_m = ½ tr(σ_m ρ̂) of the induced quantum state.
    /// Only meaningful for d = 2.
    pub fn bloch_vector(&self) -> [f64; 3] {
        assert_eq!(self.dim(), 2, "bloch_vector needs a qubit state");
        bloch_of(&self.induced_quantum_state())
    }

    /// tr ρ̂² of the induced quantum state.
    pub fn purity(&self) -> f64 {
        let rho = self.induced_quantum_state();
        rho.matmul(&rho).trace().re
    }

    /// In-place `self += factor * other`, block by block.
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.pointer_count(), other.pointer_count());
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.axpy(factor, b);
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.scale_re(factor)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.pointer_count(), other.pointer_count());
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.add(b))
            .collect();
        Self { blocks }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.pointer_count(), other.pointer_count());
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(ComplexMatrix::is_finite)
    }

    /// Smallest eigenvalue across all blocks (hermitian parts).
    pub fn min_block_eigenvalue(&self) -> Result<f64, StateError> {
        let mut min = f64::INFINITY;
        for block in &self.blocks {
            for v in hermitian_eigenvalues(block)? {
                min = min.min(v);
            }
        }
        Ok(min)
    }
}

/// Quantities a hybrid state induces on its marginals.
#[derive(Clone, Debug)]
pub struct InducedQuantities {
    /// ρ̂ = Σ_z ρ(z).
    pub quantum_state: ComplexMatrix,
    /// p(z) = tr ρ(z), index z−1.
    pub probabilities: Vec<f64>,
    /// ρ(z)/p(z) where the weight allows it, index z−1.
    pub collapsed: Vec<Option<ComplexMatrix>>,
}

/// Bloch vector of a 2×2 density operator, r_m = ½ tr(σ_m ρ).
pub fn bloch_of(rho: &ComplexMatrix) -> [f64; 3] {
    assert_eq!(rho.dim(), 2, "bloch_of needs a 2x2 operator");
    let mut r = [0.0; 3];
    for (m, slot) in r.iter_mut().enumerate() {
        *slot = 0.5 * crate::linalg::pauli(m + 1).matmul(rho).trace().re;
    }
    r
}

/// Density operator ½(σ₀ + 2 r·σ) with Bloch vector r.
pub fn density_from_bloch(r: [f64; 3]) -> ComplexMatrix {
    let mut rho = ComplexMatrix::identity(2);
    for (m, &rm) in r.iter().enumerate() {
        rho = rho.add(&crate::linalg::pauli(m + 1).scale_re(2.0 * rm));
    }
    rho.scale_re(0.5)
}

/// Rank-one density operator ½(σ₀ + n·σ) for a unit vector n.
pub fn pure_state_from_direction(n: [f64; 3]) -> ComplexMatrix {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    assert!(
        (norm - 1.0).abs() < 1e-9,
        "pure state direction must be a unit vector, |n| = {norm}"
    );
    density_from_bloch([n[0] / 2.0, n[1] / 2.0, n[2] / 2.0])
}

/// Trace of a product, tr(AB), without materializing the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    assert_eq!(a.dim(), b.dim(), "trace_product: dimension mismatch");
    let d = a.dim();
    let mut sum = Complex64::ZERO;
    for i in 0..d {
        for k in 0..d {
            sum += a.get(i, k) * b.get(k, i);
        }
    }
    sum
}
