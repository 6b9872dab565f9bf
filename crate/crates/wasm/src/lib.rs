//! Browser bindings for the demo page.
//!
//! Every exported function returns a JSON string: either the payload named in
//! its doc comment or `{"error": "..."}` when the inputs are out of range.
//! Strings keep the binding surface to plain data; the page calls JSON.parse
//! and feeds the arrays straight to a canvas.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use hybridq::bloch::{simulate_noninertial, RotatingApparatus};
use hybridq::coupling::{simple_projective_coupling, unitary_coupling};
use hybridq::dynamics::{integrate, IntegrationOptions};
use hybridq::linalg::{lindblad_basis, pauli};
use hybridq::oracle::ExactProjectiveSolution;
use hybridq::state::{density_from_bloch, HybridState};
use hybridq::Coupling;

/// Hard ceiling on returned samples; canvases gain nothing from more.
const MAX_SAMPLES: usize = 2000;
/// Hard ceiling on the horizon so a stuck slider cannot freeze the tab.
const MAX_T_END: f64 = 200.0;

const INTERACTIVE_DT: f64 = 1e-3;

fn error_json(message: impl AsRef<str>) -> String {
    serde_json::json!({ "error": message.as_ref() }).to_string()
}

fn to_json<T: Serialize>(payload: &T) -> String {
    serde_json::to_string(payload).unwrap_or_else(|e| error_json(e.to_string()))
}

fn check_horizon(t_end: f64) -> Result<f64, String> {
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(format!("t_end must be positive and finite, got {t_end}"));
    }
    Ok(t_end.min(MAX_T_END))
}

fn clamp_samples(samples: u32) -> usize {
    (samples as usize).clamp(2, MAX_SAMPLES)
}

#[derive(Serialize)]
struct RotatingRun {
    times: Vec<f64>,
    p1: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    r3: Vec<f64>,
    norm_r: Vec<f64>,
}

/// Spin-½ measured along an axis rotating in the 1-2 plane at frequency
/// `omega`, read off at rate `gamma`. Starts from r = (1/2, 0, 0) with an
/// unbiased pointer. Payload: times, p1, r1, r2, r3, norm_r.
#[wasm_bindgen]
pub fn rotating_measurement_run(omega: f64, gamma: f64, t_end: f64, samples: u32) -> String {
    if !omega.is_finite() || omega.abs() > 100.0 {
        return error_json(format!("omega must lie in [-100, 100], got {omega}"));
    }
    if !gamma.is_finite() || gamma <= 0.0 || gamma > 100.0 {
        return error_json(format!("gamma must lie in (0, 100], got {gamma}"));
    }
    let t_end = match check_horizon(t_end) {
        Ok(t) => t,
        Err(e) => return error_json(e),
    };
    let app = match RotatingApparatus::new(omega, gamma) {
        Ok(app) => app,
        Err(e) => return error_json(e.to_string()),
    };
    let opts = IntegrationOptions::new(t_end)
        .with_dt(INTERACTIVE_DT)
        .with_output_samples(clamp_samples(samples));
    let traj = match simulate_noninertial(&app, [0.5, 0.0, 0.0], [0.5, 0.5], &opts) {
        Ok(traj) => traj,
        Err(e) => return error_json(e.to_string()),
    };

    let n = traj.len();
    let mut out = RotatingRun {
        times: traj.times().to_vec(),
        p1: Vec::with_capacity(n),
        r1: Vec::with_capacity(n),
        r2: Vec::with_capacity(n),
        r3: Vec::with_capacity(n),
        norm_r: Vec::with_capacity(n),
    };
    for i in 0..n {
        let r = traj.r(i);
        out.p1.push(traj.p(i)[0]);
        out.r1.push(r[0]);
        out.r2.push(r[1]);
        out.r3.push(r[2]);
        out.norm_r.push(traj.norm_r(i));
    }
    to_json(&out)
}

#[derive(Serialize)]
struct MeasurementRun {
    times: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    p1_exact: Vec<f64>,
    p2_exact: Vec<f64>,
    max_deviation: f64,
}

/// Static measurement of the operator cos(theta) sigma3 + sin(theta) sigma1
/// at rate `gamma`, starting from the pure state along r = (1/2, 0, 0) with
/// an unbiased pointer. The full master equation is integrated numerically
/// and overlaid with the closed-form exponential relaxation; max_deviation
/// is the largest gap between the two probability curves.
#[wasm_bindgen]
pub fn static_measurement_run(theta: f64, gamma: f64, t_end: f64, samples: u32) -> String {
    if !theta.is_finite() {
        return error_json(format!("theta must be finite, got {theta}"));
    }
    if !gamma.is_finite() || gamma <= 0.0 || gamma > 100.0 {
        return error_json(format!("gamma must lie in (0, 100], got {gamma}"));
    }
    let t_end = match check_horizon(t_end) {
        Ok(t) => t,
        Err(e) => return error_json(e),
    };

    let m = pauli(3).scale_re(theta.cos()).add(&pauli(1).scale_re(theta.sin()));
    let rho0 = HybridState::product(&density_from_bloch([0.5, 0.0, 0.0]), &[0.5, 0.5]);
    let basis = lindblad_basis(2).expect("qubit basis");
    let tensor = match simple_projective_coupling(&m, gamma, &basis) {
        Ok(t) => t,
        Err(e) => return error_json(e.to_string()),
    };
    let oracle = match ExactProjectiveSolution::new(&m, gamma, &rho0) {
        Ok(sol) => sol,
        Err(e) => return error_json(e.to_string()),
    };

    let opts = IntegrationOptions::new(t_end)
        .with_dt(INTERACTIVE_DT)
        .with_output_samples(clamp_samples(samples));
    let traj = match integrate(&Coupling::constant(tensor), &rho0, &basis, &opts) {
        Ok(traj) => traj,
        Err(e) => return error_json(e.to_string()),
    };

    let n = traj.len();
    let mut out = MeasurementRun {
        times: traj.times().to_vec(),
        p1: Vec::with_capacity(n),
        p2: Vec::with_capacity(n),
        p1_exact: Vec::with_capacity(n),
        p2_exact: Vec::with_capacity(n),
        max_deviation: 0.0,
    };
    for i in 0..n {
        let p = traj.probabilities(i);
        let t = traj.time(i);
        let e1 = match oracle.probability(1, t) {
            Ok(p) => p,
            Err(e) => return error_json(e.to_string()),
        };
        let e2 = match oracle.probability(2, t) {
            Ok(p) => p,
            Err(e) => return error_json(e.to_string()),
        };
        out.max_deviation = out.max_deviation.max((p[0] - e1).abs()).max((p[1] - e2).abs());
        out.p1.push(p[0]);
        out.p2.push(p[1]);
        out.p1_exact.push(e1);
        out.p2_exact.push(e2);
    }
    to_json(&out)
}

#[derive(Serialize)]
struct PrecessionRun {
    times: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    r3: Vec<f64>,
    purity: Vec<f64>,
    max_purity_drift: f64,
}

/// Pure sigma3 precession of the Bloch vector (rx, ry, rz) with the pointer
/// frozen on a single cell. Purity must stay constant; max_purity_drift
/// reports how well the integrator honors that.
#[wasm_bindgen]
pub fn unitary_precession_run(rx: f64, ry: f64, rz: f64, t_end: f64, samples: u32) -> String {
    let mut r = [rx, ry, rz];
    if r.iter().any(|c| !c.is_finite()) {
        return error_json("bloch components must be finite");
    }
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if norm > 0.5 {
        // Scale back onto the physical ball rather than reject.
        for c in &mut r {
            *c *= 0.5 / norm;
        }
    }
    let t_end = match check_horizon(t_end) {
        Ok(t) => t,
        Err(e) => return error_json(e),
    };

    let rho0 = HybridState::product(&density_from_bloch(r), &[1.0]);
    let basis = lindblad_basis(2).expect("qubit basis");
    let tensor = match unitary_coupling(&pauli(3), &basis, 1) {
        Ok(t) => t,
        Err(e) => return error_json(e.to_string()),
    };
    let opts = IntegrationOptions::new(t_end)
        .with_dt(INTERACTIVE_DT)
        .with_output_samples(clamp_samples(samples));
    let traj = match integrate(&Coupling::constant(tensor), &rho0, &basis, &opts) {
        Ok(traj) => traj,
        Err(e) => return error_json(e.to_string()),
    };

    let n = traj.len();
    let purity0 = traj.purity(0);
    let mut out = PrecessionRun {
        times: traj.times().to_vec(),
        r1: Vec::with_capacity(n),
        r2: Vec::with_capacity(n),
        r3: Vec::with_capacity(n),
        purity: Vec::with_capacity(n),
        max_purity_drift: 0.0,
    };
    for i in 0..n {
        let r = traj.bloch(i);
        let purity = traj.purity(i);
        out.max_purity_drift = out.max_purity_drift.max((purity - purity0).abs());
        out.r1.push(r[0]);
        out.r2.push(r[1]);
        out.r3.push(r[2]);
        out.purity.push(purity);
    }
    to_json(&out)
}
