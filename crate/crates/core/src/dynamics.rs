//! Right-hand-side evaluation and fixed-step integration of hybrid-state
//! trajectories.
//!
//! The generator, per pointer block z:
//!
//!   dρ(z)/dt = Σ_{αβ,y} [ W^{αβ}(z,y,t) L_α ρ(y) L_β†
//!              − ½ W^{αβ}(y,z,t) (L_β†L_α ρ(z) + ρ(z) L_β†L_α) ]
//!
//! Total trace is conserved identically (relabel z ↔ y in the first sum
//! and use trace cyclicity), for any W.

use thiserror::Error;

use crate::coupling::{Coupling, CouplingTensor};
use crate::linalg::{ComplexMatrix, LinalgError, OperatorBasis};
use crate::state::{HybridState, StateError, STATE_TOL};

/// Above this total-trace residual the integrator aborts.
pub const TRACE_HARD_LIMIT: f64 = 1e-6;

/// Soft limits; breaching them flags the trajectory without aborting.
pub const TRACE_SOFT_LIMIT: f64 = 1e-8;
pub const EIGENVALUE_SOFT_LIMIT: f64 = -1e-8;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_OUTPUT_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("coupling is {w_dim}-dimensional with {w_zc} pointer values, state is {s_dim}/{s_zc}")]
    ShapeMismatch { w_dim: usize, w_zc: usize, s_dim: usize, s_zc: usize },
    #[error("basis dimension {basis} does not match coupling dimension {coupling}")]
    BasisMismatch { basis: usize, coupling: usize },
    #[error("invalid initial state: {0}")]
    InvalidInitialState(#[from] StateError),
    #[error("integration parameters must be positive: dt = {dt}, t_end = {t_end}")]
    BadStep { dt: f64, t_end: f64 },
    #[error(
        "conservation monitor breach at t = {t:.6}: trace residual {trace_residual:.3e} \
         (hard limit {limit:.1e}){detail}"
    )]
    MonitorBreach { t: f64, trace_residual: f64, limit: f64, detail: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The generator at a fixed time, precomputed so each application costs
/// matrix products only:
///   K_β(z,y) = Σ_α W^{αβ}(z,y) L_α,
///   G(z)     = Σ_β L_β† Σ_α (Σ_y W^{αβ}(y,z)) L_α,
/// giving dρ(z) = Σ_{y,β} K_β(z,y) ρ(y) L_β† − ½ {G(z), ρ(z)}.
pub struct RhsOperator {
    dim: usize,
    pointer_count: usize,
    basis_len: usize,
    /// k[((z−1)·|Z| + (y−1))·d² + β], None when the combination vanishes.
    k: Vec<Option<ComplexMatrix>>,
    g: Vec<ComplexMatrix>,
    l_adjoint: Vec<ComplexMatrix>,
}

impl RhsOperator {
    pub fn build(w: &CouplingTensor, basis: &OperatorBasis) -> Result<Self, DynamicsError> {
        if basis.dim() != w.dim() {
            return Err(DynamicsError::BasisMismatch { basis: basis.dim(), coupling: w.dim() });
        }
        let d = w.dim();
        let bl = w.basis_len();
        let zc = w.pointer_count();

        let mut k = Vec::with_capacity(zc * zc * bl);
        for z in 1..=zc {
            for y in 1..=zc {
                for beta in 0..bl {
                    let mut acc = ComplexMatrix::zeros(d);
                    let mut any = false;
                    for alpha in 0..bl {
                        let c = w.get(alpha, beta, z, y);
                        if c != num_complex::Complex64::ZERO {
                            acc = acc.add(&basis.op(alpha).scale(c));
                            any = true;
                        }
                    }
                    k.push(if any { Some(acc) } else { None });
                }
            }
        }

        let mut g = Vec::with_capacity(zc);
        for z in 1..=zc {
            let mut gz = ComplexMatrix::zeros(d);
            for beta in 0..bl {
                let mut inner = ComplexMatrix::zeros(d);
                let mut any = false;
                for alpha in 0..bl {
                    let mut s = num_complex::Complex64::ZERO;
                    for y in 1..=zc {
                        s += w.get(alpha, beta, y, z);
                    }
                    if s != num_complex::Complex64::ZERO {
                        inner = inner.add(&basis.op(alpha).scale(s));
                        any = true;
                    }
                }
                if any {
                    gz = gz.add(&basis.op(beta).adjoint().matmul(&inner));
                }
            }
            g.push(gz);
        }

        let l_adjoint = basis.operators().iter().map(ComplexMatrix::adjoint).collect();
        Ok(Self { dim: d, pointer_count: zc, basis_len: bl, k, g, l_adjoint })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pointer_count(&self) -> usize {
        self.pointer_count
    }

    /// Derivative blocks for a state; the result is not itself a state.
    pub fn apply(&self, state: &HybridState) -> HybridState {
        let zc = self.pointer_count;
        let bl = self.basis_len;
        let mut blocks = Vec::with_capacity(zc);
        for z in 1..=zc {
            let mut acc = ComplexMatrix::zeros(self.dim);
            for y in 1..=zc {
                let base = ((z - 1) * zc + (y - 1)) * bl;
                let rho_y = state.block(y);
                for beta in 0..bl {
                    if let Some(km) = &self.k[base + beta] {
                        acc = acc.add(&km.matmul(rho_y).matmul(&self.l_adjoint[beta]));
                    }
                }
            }
            let gz = &self.g[z - 1];
            let rho_z = state.block(z);
            let anti = gz.matmul(rho_z).add(&rho_z.matmul(gz));
            acc = acc.sub(&anti.scale_re(0.5));
            blocks.push(acc);
        }
        HybridState::from_blocks_unchecked(blocks)
    }
}

fn check_shapes(w: &CouplingTensor, state: &HybridState) -> Result<(), DynamicsError> {
    if w.dim() != state.dim() || w.pointer_count() != state.pointer_count() {
        return Err(DynamicsError::ShapeMismatch {
            w_dim: w.dim(),
            w_zc: w.pointer_count(),
            s_dim: state.dim(),
            s_zc: state.pointer_count(),
        });
    }
    Ok(())
}

/// One-shot evaluation of the generator at a fixed tensor.
pub fn master_rhs(
    w: &CouplingTensor,
    state: &HybridState,
    basis: &OperatorBasis,
) -> Result<HybridState, DynamicsError> {
    check_shapes(w, state)?;
    Ok(RhsOperator::build(w, basis)?.apply(state))
}

/// Time series of hybrid states. Monitors (trace residual, block
/// eigenvalues, probabilities, Bloch data) are always derived from the
/// stored states on demand, never cached separately.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<HybridState>,
    flags: Vec<String>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<HybridState>, flags: Vec<String>) -> Self {
        assert_eq!(times.len(), states.len());
        assert!(
            times.windows(2).all(|w| w[1] > w[0]),
            "trajectory times must be strictly increasing"
        );
        Self { times, states, flags }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[HybridState] {
        &self.states
    }

    /// Soft-limit violations noticed during the run; empty for a clean one.
    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn state(&self, i: usize) -> &HybridState {
        &self.states[i]
    }

    pub fn final_state(&self) -> &HybridState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn dim(&self) -> usize {
        self.final_state().dim()
    }

    pub fn pointer_count(&self) -> usize {
        self.final_state().pointer_count()
    }

    pub fn trace_residual(&self, i: usize) -> f64 {
        (self.states[i].total_trace() - 1.0).abs()
    }

    pub fn min_block_eigenvalue(&self, i: usize) -> Result<f64, StateError> {
        self.states[i].min_block_eigenvalue()
    }

    pub fn probabilities(&self, i: usize) -> Vec<f64> {
        self.states[i].induced_probabilities()
    }

    pub fn induced(&self, i: usize) -> ComplexMatrix {
        self.states[i].induced_quantum_state()
    }

    pub fn bloch(&self, i: usize) -> [f64; 3] {
        self.states[i].bloch_vector()
    }

    pub fn purity(&self, i: usize) -> f64 {
        self.states[i].purity()
    }

    pub fn max_trace_residual(&self) -> f64 {
        (0..self.len()).map(|i| self.trace_residual(i)).fold(0.0, f64::max)
    }

    /// Largest |p(z,t) − p(z,0)| over the whole run.
    pub fn max_probability_drift(&self) -> f64 {
        let p0 = self.probabilities(0);
        let mut max = 0.0f64;
        for i in 0..self.len() {
            for (p, p0) in self.probabilities(i).iter().zip(&p0) {
                max = max.max((p - p0).abs());
            }
        }
        max
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrationOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Upper bound on stored samples (initial state included; the final
    /// state is always stored).
    pub output_samples: usize,
}

impl IntegrationOptions {
    pub fn new(t_end: f64) -> Self {
        Self { t_end, dt: DEFAULT_DT, output_samples: DEFAULT_OUTPUT_SAMPLES }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_output_samples(mut self, samples: usize) -> Self {
        self.output_samples = samples.max(2);
        self
    }
}

pub(crate) struct StepPlan {
    pub(crate) full_steps: usize,
    pub(crate) remainder: f64,
    pub(crate) stride: usize,
}

pub(crate) fn plan_steps(t_end: f64, dt: f64, samples: usize) -> StepPlan {
    let ratio = t_end / dt;
    let mut full_steps = ratio.floor() as usize;
    let mut remainder = t_end - full_steps as f64 * dt;
    // Absorb a remainder that is pure floating-point debris.
    if remainder < 1e-12 * dt.max(t_end) {
        remainder = 0.0;
    } else if dt - remainder < 1e-12 * dt.max(t_end) {
        full_steps += 1;
        remainder = 0.0;
    }
    let total = full_steps + usize::from(remainder > 0.0);
    let stride = (total / samples.saturating_sub(1).max(1)).max(1);
    StepPlan { full_steps, remainder, stride }
}

/// Classical fixed-step fourth-order Runge-Kutta. Time-dependent
/// couplings are sampled at t, t + dt/2 and t + dt. Aborts when the
/// total-trace residual passes `TRACE_HARD_LIMIT` or any entry stops
/// being finite; soft-limit breaches of the final state are recorded as
/// trajectory flags.
pub fn integrate(
    coupling: &Coupling,
    rho0: &HybridState,
    basis: &OperatorBasis,
    opts: &IntegrationOptions,
) -> Result<Trajectory, DynamicsError> {
    let dt_ok = opts.dt.is_finite() && opts.dt > 0.0;
    let horizon_ok = opts.t_end.is_finite() && opts.t_end > 0.0;
    if !dt_ok || !horizon_ok {
        return Err(DynamicsError::BadStep { dt: opts.dt, t_end: opts.t_end });
    }
    if coupling.dim() != rho0.dim() || coupling.pointer_count() != rho0.pointer_count() {
        return Err(DynamicsError::ShapeMismatch {
            w_dim: coupling.dim(),
            w_zc: coupling.pointer_count(),
            s_dim: rho0.dim(),
            s_zc: rho0.pointer_count(),
        });
    }
    rho0.validate(STATE_TOL)?;

    let constant_rhs = match coupling {
        Coupling::Constant(w) => Some(RhsOperator::build(w, basis)?),
        Coupling::TimeDependent { .. } => None,
    };
    let rhs_at = |t: f64| -> Result<RhsOperator, DynamicsError> {
        RhsOperator::build(&coupling.tensor_at(t), basis)
    };

    let plan = plan_steps(opts.t_end, opts.dt, opts.output_samples);
    let total_steps = plan.full_steps + usize::from(plan.remainder > 0.0);

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut current = rho0.clone();
    times.push(0.0);
    states.push(current.clone());

    let step = |state: &HybridState, t: f64, h: f64| -> Result<HybridState, DynamicsError> {
        let (k1, k2, k3, k4);
        match &constant_rhs {
            Some(op) => {
                k1 = op.apply(state);
                let mut mid = state.clone();
                mid.axpy(h / 2.0, &k1);
                k2 = op.apply(&mid);
                let mut mid = state.clone();
                mid.axpy(h / 2.0, &k2);
                k3 = op.apply(&mid);
                let mut end = state.clone();
                end.axpy(h, &k3);
                k4 = op.apply(&end);
            }
            None => {
                let op_start = rhs_at(t)?;
                let op_mid = rhs_at(t + h / 2.0)?;
                let op_end = rhs_at(t + h)?;
                k1 = op_start.apply(state);
                let mut mid = state.clone();
                mid.axpy(h / 2.0, &k1);
                k2 = op_mid.apply(&mid);
                let mut mid = state.clone();
                mid.axpy(h / 2.0, &k2);
                k3 = op_mid.apply(&mid);
                let mut end = state.clone();
                end.axpy(h, &k3);
                k4 = op_end.apply(&end);
            }
        }
        let mut next = state.clone();
        next.axpy(h / 6.0, &k1);
        next.axpy(h / 3.0, &k2);
        next.axpy(h / 3.0, &k3);
        next.axpy(h / 6.0, &k4);
        Ok(next)
    };

    for i in 0..total_steps {
        let t = i as f64 * opts.dt;
        let h = if i < plan.full_steps { opts.dt } else { plan.remainder };
        current = step(&current, t, h)?;
        let t_next = if i + 1 == total_steps { opts.t_end } else { (i + 1) as f64 * opts.dt };

        let residual = (current.total_trace() - 1.0).abs();
        if !current.is_finite() || !residual.is_finite() {
            return Err(DynamicsError::MonitorBreach {
                t: t_next,
                trace_residual: f64::NAN,
                limit: TRACE_HARD_LIMIT,
                detail: "; state left the finite domain".into(),
            });
        }
        if residual > TRACE_HARD_LIMIT {
            return Err(DynamicsError::MonitorBreach {
                t: t_next,
                trace_residual: residual,
                limit: TRACE_HARD_LIMIT,
                detail: String::new(),
            });
        }

        let on_grid = (i + 1) % plan.stride == 0 || i + 1 == total_steps;
        if on_grid && times.last().copied() != Some(t_next) {
            times.push(t_next);
            states.push(current.clone());
        }
    }

    let mut flags = Vec::new();
    let final_state = states.last().expect("at least the initial sample");
    let final_residual = (final_state.total_trace() - 1.0).abs();
    if final_residual > TRACE_SOFT_LIMIT {
        flags.push(format!(
            "final trace residual {final_residual:.3e} exceeds {TRACE_SOFT_LIMIT:.1e}"
        ));
    }
    match final_state.min_block_eigenvalue() {
        Ok(min) if min < EIGENVALUE_SOFT_LIMIT => {
            flags.push(format!(
                "final min block eigenvalue {min:.3e} below {EIGENVALUE_SOFT_LIMIT:.1e}"
            ));
        }
        Ok(_) => {}
        Err(e) => flags.push(format!("final-state eigenvalue check failed: {e}")),
    }

    Ok(Trajectory::new(times, states, flags))
}

/// How far the pointer distribution moved over a run. Couplings that act
/// only block-diagonally in (z,y) with first-term weights matching the
/// anticommutator weights (unitary and Lindblad couplings) freeze p(z).
#[derive(Clone, Debug)]
pub struct FrozenPointerReport {
    pub max_deviation: f64,
    pub per_pointer: Vec<f64>,
    pub pass: bool,
}

pub fn induced_rhs_checks(trajectory: &Trajectory, tol: f64) -> FrozenPointerReport {
    let p0 = trajectory.probabilities(0);
    let mut per_pointer = vec![0.0f64; p0.len()];
    for i in 0..trajectory.len() {
        for (slot, (p, p0)) in per_pointer
            .iter_mut()
            .zip(trajectory.probabilities(i).iter().zip(&p0))
        {
            *slot = slot.max((p - p0).abs());
        }
    }
    let max_deviation = per_pointer.iter().copied().fold(0.0, f64::max);
    FrozenPointerReport { max_deviation, per_pointer, pass: max_deviation <= tol }
}
