//! Qubit measurement with an apparatus whose axis moves.
//!
//! For d = 2 the projective measurement coupling reduces to a closed
//! five-dimensional real system in the Bloch vector r of the induced
//! quantum state and the pointer distribution p:
//!
//!   dr/dt   = −γ (r − (n·r) n),
//!   dp(z)/dt = γ (½ − (−1)^z (n·r) − p(z)),
//!
//! where n(t) is the unit measurement axis, by default rotating
//! uniformly in the equatorial plane: n(t) = (cos ωt, sin ωt, 0).
//! This module integrates that reduced system directly and cross-checks
//! it against the full tensor machinery.

use std::sync::Arc;

use thiserror::Error;

use crate::coupling::{simple_projective_coupling, Coupling, CouplingError};
use crate::dynamics::{integrate, plan_steps, DynamicsError, IntegrationOptions};
use crate::linalg::{pauli, ComplexMatrix, OperatorBasis};
use crate::state::{density_from_bloch, HybridState};

/// Gate on axis vectors fed to the reduced equations.
pub const AXIS_TOL: f64 = 1e-9;

/// Slack on the reduced-trajectory invariants (‖r‖ bound, p bounds).
pub const BLOCH_INVARIANT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BlochError {
    #[error("measurement rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("axis has norm {norm} at t = {t}; need a unit vector")]
    BadAxis { t: f64, norm: f64 },
    #[error("initial Bloch vector has norm {0}, exceeding 1/2")]
    BadInitialRadius(f64),
    #[error("initial pointer distribution {0:?} is not a probability vector")]
    BadInitialDistribution([f64; 2]),
    #[error("step size must be positive and the horizon non-negative: dt = {dt}, t_end = {t_end}")]
    BadStep { dt: f64, t_end: f64 },
    #[error("reduced-system invariant breach at t = {t:.6}: {detail}")]
    InvariantBreach { t: f64, detail: String },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
}

type AxisProvider = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// A qubit measurement apparatus with time-dependent axis n(t) and rate
/// γ. Axis providers must be deterministic, side-effect free, safe to
/// call concurrently, and return unit vectors.
#[derive(Clone)]
pub struct RotatingApparatus {
    omega: f64,
    gamma: f64,
    axis: Option<AxisProvider>,
}

impl std::fmt::Debug for RotatingApparatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RotatingApparatus")
            .field("omega", &self.omega)
            .field("gamma", &self.gamma)
            .field("custom_axis", &self.axis.is_some())
            .finish()
    }
}

impl RotatingApparatus {
    /// Uniform equatorial rotation at angular velocity ω.
    pub fn new(omega: f64, gamma: f64) -> Result<Self, BlochError> {
        if gamma <= 0.0 {
            return Err(BlochError::NonPositiveRate(gamma));
        }
        Ok(Self { omega, gamma, axis: None })
    }

    /// Replace the axis law; ω keeps only descriptive meaning afterwards.
    pub fn with_axis_provider(
        mut self,
        provider: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        self.axis = Some(Arc::new(provider));
        self
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// n(t); unchecked fast path.
    pub fn axis(&self, t: f64) -> [f64; 3] {
        match &self.axis {
            None => {
                let (s, c) = (self.omega * t).sin_cos();
                [c, s, 0.0]
            }
            Some(f) => f(t),
        }
    }

    fn checked_axis(&self, t: f64) -> Result<[f64; 3], BlochError> {
        let n = self.axis(t);
        let norm = dot(&n, &n).sqrt();
        if (norm - 1.0).abs() > AXIS_TOL {
            return Err(BlochError::BadAxis { t, norm });
        }
        Ok(n)
    }

    /// M(t) = n(t)·σ, the measurement operator. Its eigenvalues are ±1
    /// for any unit axis, so the decomposition never degenerates.
    pub fn measurement_operator(&self, t: f64) -> ComplexMatrix {
        let n = self.axis(t);
        let mut m = ComplexMatrix::zeros(2);
        for (k, &nk) in n.iter().enumerate() {
            m = m.add(&pauli(k + 1).scale_re(nk));
        }
        m
    }

    /// The full coupling tensor provider for the generic engine,
    /// rebuilding the projective coupling of M(t) at every sample time.
    /// Panics inside the provider if the axis law breaks its unit-norm
    /// contract.
    pub fn coupling(&self, basis: &OperatorBasis) -> Result<Coupling, BlochError> {
        if basis.dim() != 2 {
            return Err(BlochError::Coupling(CouplingError::TransferSizeMismatch {
                v: basis.dim(),
                d: 2,
            }));
        }
        let apparatus = self.clone();
        let basis = basis.clone();
        Ok(Coupling::time_dependent(2, 2, move |t| {
            apparatus
                .checked_axis(t)
                .expect("axis provider broke its unit-norm contract");
            simple_projective_coupling(&apparatus.measurement_operator(t), apparatus.gamma, &basis)
                .expect("n·σ is Hermitian and non-degenerate for unit n")
        }))
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// dr/dt = −γ (r − (n·r) n). States aligned with the axis are fixed
/// points; everything transverse decays at rate γ.
pub fn bloch_rhs(r: [f64; 3], n: [f64; 3], gamma: f64) -> Result<[f64; 3], BlochError> {
    let norm = dot(&n, &n).sqrt();
    if (norm - 1.0).abs() > AXIS_TOL {
        return Err(BlochError::BadAxis { t: f64::NAN, norm });
    }
    let nr = dot(&n, &r);
    Ok([
        -gamma * (r[0] - nr * n[0]),
        -gamma * (r[1] - nr * n[1]),
        -gamma * (r[2] - nr * n[2]),
    ])
}

/// dp(z)/dt = γ (½ − (−1)^z (n·r) − p(z)) for z ∈ {1, 2}. The two signs
/// cancel, so p(1) + p(2) is a constant of motion.
pub fn probability_rhs(p: [f64; 2], z: usize, n_dot_r: f64, gamma: f64) -> f64 {
    assert!(z == 1 || z == 2, "pointer value must be 1 or 2, got {z}");
    let sign = if z.is_multiple_of(2) { 1.0 } else { -1.0 };
    gamma * (0.5 - sign * n_dot_r - p[z - 1])
}

/// Reduced trajectory: Bloch vector of the induced quantum state and the
/// pointer distribution.
#[derive(Clone, Debug)]
pub struct BlochTrajectory {
    times: Vec<f64>,
    r: Vec<[f64; 3]>,
    p: Vec<[f64; 2]>,
}

impl BlochTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn r(&self, i: usize) -> [f64; 3] {
        self.r[i]
    }

    pub fn p(&self, i: usize) -> [f64; 2] {
        self.p[i]
    }

    pub fn norm_r(&self, i: usize) -> f64 {
        dot(&self.r[i], &self.r[i]).sqrt()
    }

    /// tr ρ̂² = ½ + 2‖r‖².
    pub fn purity(&self, i: usize) -> f64 {
        0.5 + 2.0 * dot(&self.r[i], &self.r[i])
    }

    pub fn final_r(&self) -> [f64; 3] {
        *self.r.last().expect("trajectory is never empty")
    }

    pub fn final_p(&self) -> [f64; 2] {
        *self.p.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }
}

fn rk4_rhs(
    app: &RotatingApparatus,
    t: f64,
    y: &[f64; 5],
) -> Result<[f64; 5], BlochError> {
    let n = app.checked_axis(t)?;
    let r = [y[0], y[1], y[2]];
    let p = [y[3], y[4]];
    let dr = bloch_rhs(r, n, app.gamma)?;
    let nr = dot(&n, &r);
    Ok([
        dr[0],
        dr[1],
        dr[2],
        probability_rhs(p, 1, nr, app.gamma),
        probability_rhs(p, 2, nr, app.gamma),
    ])
}

/// RK4 on the coupled (r, p) system. `opts.t_end = 0` yields the single
/// initial sample.
pub fn simulate_noninertial(
    app: &RotatingApparatus,
    r0: [f64; 3],
    p0: [f64; 2],
    opts: &IntegrationOptions,
) -> Result<BlochTrajectory, BlochError> {
    let r0_norm = dot(&r0, &r0).sqrt();
    if r0_norm > 0.5 + BLOCH_INVARIANT_TOL {
        return Err(BlochError::BadInitialRadius(r0_norm));
    }
    if p0[0] < -BLOCH_INVARIANT_TOL
        || p0[1] < -BLOCH_INVARIANT_TOL
        || (p0[0] + p0[1] - 1.0).abs() > BLOCH_INVARIANT_TOL
    {
        return Err(BlochError::BadInitialDistribution(p0));
    }
    let dt_ok = opts.dt.is_finite() && opts.dt > 0.0;
    let horizon_ok = opts.t_end.is_finite() && opts.t_end >= 0.0;
    if !dt_ok || !horizon_ok {
        return Err(BlochError::BadStep { dt: opts.dt, t_end: opts.t_end });
    }

    let mut times = vec![0.0];
    let mut rs = vec![r0];
    let mut ps = vec![p0];
    if opts.t_end == 0.0 {
        return Ok(BlochTrajectory { times, r: rs, p: ps });
    }

    let plan = plan_steps(opts.t_end, opts.dt, opts.output_samples);
    let total_steps = plan.full_steps + usize::from(plan.remainder > 0.0);
    let mut y = [r0[0], r0[1], r0[2], p0[0], p0[1]];

    for i in 0..total_steps {
        let t = i as f64 * opts.dt;
        let h = if i < plan.full_steps { opts.dt } else { plan.remainder };
        let k1 = rk4_rhs(app, t, &y)?;
        let mut y2 = y;
        for (slot, k) in y2.iter_mut().zip(&k1) {
            *slot += 0.5 * h * k;
        }
        let k2 = rk4_rhs(app, t + 0.5 * h, &y2)?;
        let mut y3 = y;
        for (slot, k) in y3.iter_mut().zip(&k2) {
            *slot += 0.5 * h * k;
        }
        let k3 = rk4_rhs(app, t + 0.5 * h, &y3)?;
        let mut y4 = y;
        for (slot, k) in y4.iter_mut().zip(&k3) {
            *slot += h * k;
        }
        let k4 = rk4_rhs(app, t + h, &y4)?;
        for j in 0..5 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }

        let t_next = if i + 1 == total_steps { opts.t_end } else { (i + 1) as f64 * opts.dt };
        let r = [y[0], y[1], y[2]];
        let p = [y[3], y[4]];
        let norm = dot(&r, &r).sqrt();
        if !y.iter().all(|v| v.is_finite()) {
            return Err(BlochError::InvariantBreach {
                t: t_next,
                detail: "state left the finite domain".into(),
            });
        }
        if norm > 0.5 + BLOCH_INVARIANT_TOL {
            return Err(BlochError::InvariantBreach {
                t: t_next,
                detail: format!("Bloch radius {norm} exceeds 1/2"),
            });
        }
        if p[0] < -BLOCH_INVARIANT_TOL
            || p[1] < -BLOCH_INVARIANT_TOL
            || (p[0] + p[1] - 1.0).abs() > BLOCH_INVARIANT_TOL
        {
            return Err(BlochError::InvariantBreach {
                t: t_next,
                detail: format!("pointer distribution left the simplex: {p:?}"),
            });
        }

        let on_grid = (i + 1) % plan.stride == 0 || i + 1 == total_steps;
        if on_grid && times.last().copied() != Some(t_next) {
            times.push(t_next);
            rs.push(r);
            ps.push(p);
        }
    }

    Ok(BlochTrajectory { times, r: rs, p: ps })
}

/// Result of running the same physics through the reduced system and the
/// full tensor engine on a shared sample grid.
#[derive(Clone, Debug)]
pub struct CrosscheckReport {
    pub samples: usize,
    pub max_r_deviation: f64,
    pub max_p_deviation: f64,
}

impl CrosscheckReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_r_deviation.max(self.max_p_deviation)
    }
}

/// Integrate via both paths and compare (r, p) at every shared sample.
/// The full-engine initial state splits ρ̂(0) over the pointer as
/// ρ(z,0) = p0(z) ρ̂(0); the reduced dynamics only sees (r, p), so any
/// split with those marginals represents the same physics.
pub fn crosscheck_generic(
    app: &RotatingApparatus,
    r0: [f64; 3],
    p0: [f64; 2],
    opts: &IntegrationOptions,
) -> Result<CrosscheckReport, BlochError> {
    let reduced = simulate_noninertial(app, r0, p0, opts)?;
    if opts.t_end == 0.0 {
        return Ok(CrosscheckReport { samples: 1, max_r_deviation: 0.0, max_p_deviation: 0.0 });
    }

    let basis = crate::linalg::lindblad_basis(2).expect("d = 2 basis always exists");
    let coupling = app.coupling(&basis)?;
    let rho_hat0 = density_from_bloch(r0);
    let rho0 = HybridState::product(&rho_hat0, &p0);
    let generic = integrate(&coupling, &rho0, &basis, opts)?;

    assert_eq!(
        reduced.times(),
        generic.times(),
        "both integrators must sample the same grid"
    );
    let mut max_r = 0.0f64;
    let mut max_p = 0.0f64;
    for i in 0..reduced.len() {
        let rg = generic.bloch(i);
        let rr = reduced.r(i);
        for m in 0..3 {
            max_r = max_r.max((rg[m] - rr[m]).abs());
        }
        let pg = generic.probabilities(i);
        let pr = reduced.p(i);
        for z in 0..2 {
            max_p = max_p.max((pg[z] - pr[z]).abs());
        }
    }
    Ok(CrosscheckReport {
        samples: reduced.len(),
        max_r_deviation: max_r,
        max_p_deviation: max_p,
    })
}
