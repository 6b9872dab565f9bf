//! Closed-form reference solutions.
//!
//! These share no evaluation code with the `dynamics` module: agreement
//! between the two is evidence that the integrator is right, not a
//! tautology. Two families are exactly solvable: the one-constant
//! projective measurement coupling, and pure unitary evolution.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    hermitian_eigendecomposition, hermitian_eigenpairs, ComplexMatrix, LinalgError,
    SpectralDecomposition, DEFAULT_DEGENERACY_TOL,
};
use crate::state::{HybridState, StateError, STATE_TOL};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("closed form is only defined for t >= 0, got {0}")]
    NegativeTime(f64),
    #[error("pointer value {z} out of range 1..={max}")]
    PointerOutOfRange { z: usize, max: usize },
    #[error("measurement rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("state has {z} pointer values but the measurement has {d} outcomes")]
    PointerOutcomeMismatch { z: usize, d: usize },
    #[error("invalid initial state: {0}")]
    InvalidState(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Closed form for the one-constant projective coupling:
///   ρ(z,t) = e^{−γt} ρ(z,0) + (1 − e^{−γt}) P_z ρ̂(0) P_z.
/// The compressed blocks P_z ρ̂(0) P_z are cached; they are constants of
/// motion, since P_u ρ̂(t) P_u = P_u ρ̂(0) P_u for all t.
pub struct ExactProjectiveSolution {
    gamma: f64,
    spec: SpectralDecomposition,
    initial: HybridState,
    initial_induced: ComplexMatrix,
    compressed: Vec<ComplexMatrix>,
    target_probabilities: Vec<f64>,
}

impl ExactProjectiveSolution {
    pub fn new(
        m: &ComplexMatrix,
        gamma: f64,
        rho0: &HybridState,
    ) -> Result<Self, OracleError> {
        if gamma <= 0.0 {
            return Err(OracleError::NonPositiveRate(gamma));
        }
        rho0.validate(STATE_TOL)?;
        let spec = hermitian_eigendecomposition(m, DEFAULT_DEGENERACY_TOL)?;
        if rho0.pointer_count() != spec.dim() {
            return Err(OracleError::PointerOutcomeMismatch {
                z: rho0.pointer_count(),
                d: spec.dim(),
            });
        }
        let initial_induced = rho0.induced_quantum_state();
        let compressed: Vec<ComplexMatrix> = (1..=spec.dim())
            .map(|z| {
                let p = spec.projector(z);
                p.matmul(&initial_induced).matmul(p)
            })
            .collect();
        let target_probabilities = compressed.iter().map(|b| b.trace().re).collect();
        Ok(Self {
            gamma,
            spec,
            initial: rho0.clone(),
            initial_induced,
            compressed,
            target_probabilities,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.spec
    }

    pub fn pointer_count(&self) -> usize {
        self.initial.pointer_count()
    }

    /// The t → ∞ pointer distribution tr(P_z ρ̂(0)), which is the
    /// postulated outcome statistics of an instantaneous measurement.
    pub fn target_probabilities(&self) -> &[f64] {
        &self.target_probabilities
    }

    /// The cached constant of motion P_z ρ̂(0) P_z.
    pub fn compressed_block(&self, z: usize) -> Result<&ComplexMatrix, OracleError> {
        self.check_pointer(z)?;
        Ok(&self.compressed[z - 1])
    }

    fn check_pointer(&self, z: usize) -> Result<(), OracleError> {
        if z == 0 || z > self.pointer_count() {
            return Err(OracleError::PointerOutOfRange { z, max: self.pointer_count() });
        }
        Ok(())
    }

    fn decay(&self, t: f64) -> Result<f64, OracleError> {
        if t < 0.0 {
            return Err(OracleError::NegativeTime(t));
        }
        Ok((-self.gamma * t).exp())
    }

    pub fn state(&self, z: usize, t: f64) -> Result<ComplexMatrix, OracleError> {
        self.check_pointer(z)?;
        let e = self.decay(t)?;
        Ok(self
            .initial
            .block(z)
            .scale_re(e)
            .add(&self.compressed[z - 1].scale_re(1.0 - e)))
    }

    /// p(z,t) = e^{−γt} p(z,0) + (1 − e^{−γt}) tr(P_z ρ̂(0)).
    pub fn probability(&self, z: usize, t: f64) -> Result<f64, OracleError> {
        self.check_pointer(z)?;
        let e = self.decay(t)?;
        let p0 = self.initial.block(z).trace().re;
        Ok(e * p0 + (1.0 - e) * self.target_probabilities[z - 1])
    }

    /// ρ̂(t) = e^{−γt} ρ̂(0) + (1 − e^{−γt}) Σ_z P_z ρ̂(0) P_z.
    pub fn induced(&self, t: f64) -> Result<ComplexMatrix, OracleError> {
        let e = self.decay(t)?;
        let mut compressed_sum = ComplexMatrix::zeros(self.initial.dim());
        for b in &self.compressed {
            compressed_sum = compressed_sum.add(b);
        }
        Ok(self
            .initial_induced
            .scale_re(e)
            .add(&compressed_sum.scale_re(1.0 - e)))
    }

    pub fn hybrid_state(&self, t: f64) -> Result<HybridState, OracleError> {
        let blocks = (1..=self.pointer_count())
            .map(|z| self.state(z, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HybridState::from_blocks_unchecked(blocks))
    }
}

/// Exact solution of block-wise Schrödinger evolution,
/// ρ(z,t) = U(t) ρ(z,0) U(t)† with U(t) = exp(−iHt) built from the
/// eigenpairs of H. Degenerate spectra are fine here; the propagator
/// does not depend on how degenerate eigenvectors are picked.
pub struct ExactUnitarySolution {
    eigenvalues: Vec<f64>,
    vectors: ComplexMatrix,
    initial: HybridState,
}

impl ExactUnitarySolution {
    pub fn new(h: &ComplexMatrix, rho0: &HybridState) -> Result<Self, OracleError> {
        rho0.validate(STATE_TOL)?;
        if h.dim() != rho0.dim() {
            return Err(LinalgError::DimensionMismatch { expected: rho0.dim(), got: h.dim() }.into());
        }
        let (eigenvalues, vectors) = hermitian_eigenpairs(h)?;
        Ok(Self { eigenvalues, vectors, initial: rho0.clone() })
    }

    pub fn pointer_count(&self) -> usize {
        self.initial.pointer_count()
    }

    /// U(t) = V diag(e^{−iλ_k t}) V†.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let d = self.vectors.dim();
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(0.0, -l * t).exp())
            .collect();
        ComplexMatrix::from_fn(d, |i, j| {
            phases
                .iter()
                .enumerate()
                .map(|(k, phase)| self.vectors.get(i, k) * phase * self.vectors.get(j, k).conj())
                .sum()
        })
    }

    pub fn state(&self, z: usize, t: f64) -> Result<ComplexMatrix, OracleError> {
        if z == 0 || z > self.pointer_count() {
            return Err(OracleError::PointerOutOfRange { z, max: self.pointer_count() });
        }
        let u = self.propagator(t);
        Ok(u.matmul(self.initial.block(z)).matmul(&u.adjoint()))
    }

    pub fn hybrid_state(&self, t: f64) -> Result<HybridState, OracleError> {
        let u = self.propagator(t);
        let ua = u.adjoint();
        let blocks = self
            .initial
            .blocks()
            .iter()
            .map(|b| u.matmul(b).matmul(&ua))
            .collect();
        Ok(HybridState::from_blocks_unchecked(blocks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, pauli};
    use crate::state::{bloch_of, pure_state_from_direction};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_pointer_one() -> HybridState {
        // ρ(z,0) = δ_{z1} (σ₀+σ₁)/2
        let plus = pure_state_from_direction([1.0, 0.0, 0.0]);
        HybridState::from_blocks(vec![plus, ComplexMatrix::zeros(2)]).unwrap()
    }

    fn generic_two_block() -> HybridState {
        let b1 = ComplexMatrix::from_rows(&[
            vec![c(0.30, 0.0), c(0.05, 0.02)],
            vec![c(0.05, -0.02), c(0.10, 0.0)],
        ])
        .unwrap();
        let b2 = ComplexMatrix::from_rows(&[
            vec![c(0.25, 0.0), c(-0.03, 0.04)],
            vec![c(-0.03, -0.04), c(0.35, 0.0)],
        ])
        .unwrap();
        HybridState::from_blocks(vec![b1, b2]).unwrap()
    }

    #[test]
    fn projective_at_time_zero_is_initial() {
        let sol = ExactProjectiveSolution::new(&pauli(3), 1.0, &generic_two_block()).unwrap();
        let state = generic_two_block();
        for z in 1..=2 {
            assert!(sol.state(z, 0.0).unwrap().max_abs_diff(state.block(z)) < 1e-15);
        }
    }

    #[test]
    fn projective_long_time_limit_is_compressed_block() {
        let sol = ExactProjectiveSolution::new(&pauli(3), 1.0, &generic_two_block()).unwrap();
        for z in 1..=2 {
            let limit = sol.state(z, 50.0).unwrap();
            assert!(limit.max_abs_diff(sol.compressed_block(z).unwrap()) < 1e-20);
        }
    }

    #[test]
    fn projective_probability_closed_form_sigma3() {
        // p(1,t) = 1/2 + 1/2 e^{-t} for the pointer-1 plus state.
        let sol = ExactProjectiveSolution::new(&pauli(3), 1.0, &plus_pointer_one()).unwrap();
        for t in [0.0_f64, 0.3, 1.0, 2.5, 10.0] {
            let expected = 0.5 + 0.5 * (-t).exp();
            assert_abs_diff_eq!(sol.probability(1, t).unwrap(), expected, epsilon = 1e-14);
            assert_abs_diff_eq!(
                sol.probability(2, t).unwrap(),
                1.0 - expected,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn projective_probabilities_sum_to_one() {
        let sol = ExactProjectiveSolution::new(&pauli(1), 0.7, &generic_two_block()).unwrap();
        for t in [0.0, 0.1, 1.0, 7.0] {
            let total: f64 = (1..=2).map(|z| sol.probability(z, t).unwrap()).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn projective_halflife_mixes_evenly() {
        let sol = ExactProjectiveSolution::new(&pauli(1), 1.0, &generic_two_block()).unwrap();
        let t = std::f64::consts::LN_2;
        for z in 1..=2 {
            let p0 = generic_two_block().block(z).trace().re;
            let target = sol.target_probabilities()[z - 1];
            assert_abs_diff_eq!(
                sol.probability(z, t).unwrap(),
                0.5 * p0 + 0.5 * target,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn projective_eigenprojector_is_stationary() {
        // ρ̂(0) = P₁ of σ₃, split evenly over the pointer.
        let up = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let state = HybridState::product(&up, &[0.5, 0.5]);
        let sol = ExactProjectiveSolution::new(&pauli(3), 1.0, &state).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert!(sol.induced(t).unwrap().max_abs_diff(&up) < 1e-14);
        }
    }

    #[test]
    fn projective_induced_equals_block_sum() {
        let sol = ExactProjectiveSolution::new(&pauli(2), 1.3, &generic_two_block()).unwrap();
        for t in [0.0, 0.4, 2.0, 9.0] {
            let sum = sol
                .state(1, t)
                .unwrap()
                .add(&sol.state(2, t).unwrap());
            assert!(sol.induced(t).unwrap().max_abs_diff(&sum) < 1e-12);
        }
    }

    #[test]
    fn projective_compression_is_constant_of_motion() {
        let sol = ExactProjectiveSolution::new(&pauli(3), 0.9, &generic_two_block()).unwrap();
        for t in [0.2, 1.0, 4.0] {
            let rho_hat = sol.induced(t).unwrap();
            for u in 1..=2 {
                let p = sol.decomposition().projector(u);
                let now = p.matmul(&rho_hat).matmul(p);
                assert!(now.max_abs_diff(sol.compressed_block(u).unwrap()) < 1e-14);
            }
        }
    }

    #[test]
    fn projective_satisfies_its_ode() {
        // Central difference of the closed form against
        // γ(P_z ρ̂(t) P_z − ρ(z,t)).
        let gamma = 1.0;
        let sol = ExactProjectiveSolution::new(&pauli(3), gamma, &generic_two_block()).unwrap();
        let h = 1e-5;
        for t in [0.5, 1.0, 2.0] {
            for z in 1..=2 {
                let forward = sol.state(z, t + h).unwrap();
                let backward = sol.state(z, t - h).unwrap();
                let derivative = forward.sub(&backward).scale_re(1.0 / (2.0 * h));
                let expected = sol
                    .compressed_block(z)
                    .unwrap()
                    .sub(&sol.state(z, t).unwrap())
                    .scale_re(gamma);
                let err = derivative.max_abs_diff(&expected);
                assert!(err <= 1e-6 * gamma, "ODE residual {err:.3e} at t={t}, z={z}");
            }
        }
    }

    #[test]
    fn projective_rejects_bad_arguments() {
        let state = generic_two_block();
        assert!(matches!(
            ExactProjectiveSolution::new(&pauli(3), 0.0, &state),
            Err(OracleError::NonPositiveRate(_))
        ));
        let sol = ExactProjectiveSolution::new(&pauli(3), 1.0, &state).unwrap();
        assert!(matches!(sol.state(1, -0.1), Err(OracleError::NegativeTime(_))));
        assert!(matches!(sol.probability(1, -2.0), Err(OracleError::NegativeTime(_))));
        assert!(matches!(sol.state(3, 1.0), Err(OracleError::PointerOutOfRange { .. })));
        // Degenerate measurement operator is refused.
        assert!(ExactProjectiveSolution::new(&ComplexMatrix::identity(2), 1.0, &state).is_err());
    }

    #[test]
    fn unitary_at_time_zero_is_initial() {
        let sol = ExactUnitarySolution::new(&pauli(3), &generic_two_block()).unwrap();
        let state = generic_two_block();
        for z in 1..=2 {
            assert!(sol.state(z, 0.0).unwrap().max_abs_diff(state.block(z)) < 1e-12);
        }
    }

    #[test]
    fn unitary_precession_flips_bloch_vector() {
        // Under H = σ₃ the equatorial Bloch vector precesses at angular
        // rate 2: at t = π/2 it has turned by π.
        let sol = ExactUnitarySolution::new(&pauli(3), &plus_pointer_one()).unwrap();
        let rho = sol.hybrid_state(std::f64::consts::FRAC_PI_2).unwrap();
        let r = bloch_of(&rho.induced_quantum_state());
        assert_abs_diff_eq!(r[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn unitary_commuting_state_is_constant() {
        let up = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let state = HybridState::product(&up, &[0.4, 0.6]);
        let sol = ExactUnitarySolution::new(&pauli(3), &state).unwrap();
        for t in [0.1, 1.0, 13.0] {
            assert!(sol.hybrid_state(t).unwrap().max_abs_diff(&state) < 1e-12);
        }
    }

    #[test]
    fn unitary_preserves_block_spectrum() {
        let sol = ExactUnitarySolution::new(&pauli(2), &generic_two_block()).unwrap();
        let state = generic_two_block();
        for z in 1..=2 {
            let mut before = hermitian_eigenvalues(state.block(z)).unwrap();
            let mut after = hermitian_eigenvalues(&sol.state(z, 3.7).unwrap()).unwrap();
            before.sort_by(f64::total_cmp);
            after.sort_by(f64::total_cmp);
            for (b, a) in before.iter().zip(&after) {
                assert_abs_diff_eq!(b, a, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn unitary_propagator_is_unitary() {
        let h = ComplexMatrix::from_rows(&[
            vec![c(0.3, 0.0), c(0.2, -0.4)],
            vec![c(0.2, 0.4), c(-1.1, 0.0)],
        ])
        .unwrap();
        let sol = ExactUnitarySolution::new(&h, &generic_two_block()).unwrap();
        let u = sol.propagator(2.3);
        let id = u.matmul(&u.adjoint());
        assert!(id.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn unitary_accepts_degenerate_hamiltonian() {
        // H = id only shifts the global phase; states stay put.
        let state = generic_two_block();
        let sol = ExactUnitarySolution::new(&ComplexMatrix::identity(2), &state).unwrap();
        for t in [0.5, 2.0] {
            assert!(sol.hybrid_state(t).unwrap().max_abs_diff(&state) < 1e-12);
        }
    }

    #[test]
    fn unitary_rejects_non_hermitian() {
        let mut h = ComplexMatrix::zeros(2);
        h.set(0, 1, c(1.0, 0.0));
        assert!(ExactUnitarySolution::new(&h, &generic_two_block()).is_err());
    }
}
