//! CSV export of trajectories.
//!
//! Plain comma separation, `.` decimal point, no locale anywhere.
//! Numbers are written with the shortest round-trip representation, so
//! re-parsing a CSV recovers the exact stored doubles.

use std::fmt::Write as _;

use crate::bloch::BlochTrajectory;
use crate::dynamics::Trajectory;

/// Generic trajectory table: t, p_1…p_|Z|, trace_residual, min_eig,
/// then for qubits r1, r2, r3, purity, then optionally the flattened
/// induced state ρ̂ with re/im interleaved, row-major.
pub fn trajectory_csv(traj: &Trajectory, include_induced: bool) -> String {
    let zc = traj.pointer_count();
    let d = traj.dim();
    let qubit = d == 2;

    let mut out = String::new();
    out.push('t');
    for z in 1..=zc {
        let _ = write!(out, ",p_{z}");
    }
    out.push_str(",trace_residual,min_eig");
    if qubit {
        out.push_str(",r1,r2,r3,purity");
    }
    if include_induced {
        for i in 0..d {
            for j in 0..d {
                let _ = write!(out, ",rhohat_{i}_{j}_re,rhohat_{i}_{j}_im");
            }
        }
    }
    out.push('\n');

    for i in 0..traj.len() {
        let _ = write!(out, "{}", traj.time(i));
        for p in traj.probabilities(i) {
            let _ = write!(out, ",{p}");
        }
        let min_eig = traj.min_block_eigenvalue(i).unwrap_or(f64::NAN);
        let _ = write!(out, ",{},{}", traj.trace_residual(i), min_eig);
        if qubit {
            let r = traj.bloch(i);
            let _ = write!(out, ",{},{},{},{}", r[0], r[1], r[2], traj.purity(i));
        }
        if include_induced {
            let rho = traj.induced(i);
            for row in 0..d {
                for col in 0..d {
                    let v = rho.get(row, col);
                    let _ = write!(out, ",{},{}", v.re, v.im);
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Reduced qubit table: t, r1, r2, r3, norm_r, purity, p1, p2.
pub fn bloch_csv(traj: &BlochTrajectory) -> String {
    let mut out = String::from("t,r1,r2,r3,norm_r,purity,p1,p2\n");
    for i in 0..traj.len() {
        let r = traj.r(i);
        let p = traj.p(i);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            traj.time(i),
            r[0],
            r[1],
            r[2],
            traj.norm_r(i),
            traj.purity(i),
            p[0],
            p[1]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{simulate_noninertial, RotatingApparatus};
    use crate::coupling::{simple_projective_coupling, Coupling};
    use crate::dynamics::{integrate, IntegrationOptions};
    use crate::linalg::{lindblad_basis, pauli};
    use crate::state::{pure_state_from_direction, HybridState};

    fn short_trajectory() -> Trajectory {
        let basis = lindblad_basis(2).unwrap();
        let w = Coupling::constant(simple_projective_coupling(&pauli(3), 1.0, &basis).unwrap());
        let rho = pure_state_from_direction([1.0, 0.0, 0.0]);
        let state = HybridState::product(&rho, &[0.5, 0.5]);
        let opts = IntegrationOptions::new(0.1).with_dt(0.01).with_output_samples(6);
        integrate(&w, &state, &basis, &opts).unwrap()
    }

    #[test]
    fn generic_csv_shape_and_values() {
        let traj = short_trajectory();
        let csv = trajectory_csv(&traj, false);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,p_1,p_2,trace_residual,min_eig,r1,r2,r3,purity");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), traj.len());
        let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first.len(), 9);
        assert_eq!(first[0], 0.0);
        assert_eq!(first[1], 0.5);
        assert_eq!(first[2], 0.5);
        // Initial pure state along σ₁.
        assert!((first[5] - 0.5).abs() < 1e-15);
        assert!((first[8] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_csv_with_induced_block() {
        let traj = short_trajectory();
        let csv = trajectory_csv(&traj, true);
        let header = csv.lines().next().unwrap();
        assert!(header.ends_with(
            "rhohat_0_0_re,rhohat_0_0_im,rhohat_0_1_re,rhohat_0_1_im,\
             rhohat_1_0_re,rhohat_1_0_im,rhohat_1_1_re,rhohat_1_1_im"
        ));
        let first: Vec<f64> = csv
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(first.len(), 9 + 8);
        // ρ̂(0) = (σ₀+σ₁)/2.
        assert!((first[9] - 0.5).abs() < 1e-15); // 00 re
        assert!((first[11] - 0.5).abs() < 1e-15); // 01 re
        assert!(first[12].abs() < 1e-15); // 01 im
    }

    #[test]
    fn csv_round_trips_exact_doubles() {
        let traj = short_trajectory();
        let csv = trajectory_csv(&traj, false);
        let row: Vec<f64> = csv
            .lines()
            .last()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        let i = traj.len() - 1;
        assert_eq!(row[0], traj.time(i));
        assert_eq!(row[1], traj.probabilities(i)[0]);
        assert_eq!(row[5], traj.bloch(i)[0]);
        // Deterministic output.
        assert_eq!(csv, trajectory_csv(&traj, false));
    }

    #[test]
    fn bloch_csv_shape() {
        let app = RotatingApparatus::new(1.0, 1.0).unwrap();
        let opts = IntegrationOptions::new(0.5).with_dt(0.01).with_output_samples(6);
        let traj = simulate_noninertial(&app, [0.5, 0.0, 0.0], [0.5, 0.5], &opts).unwrap();
        let csv = bloch_csv(&traj);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,r1,r2,r3,norm_r,purity,p1,p2");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), traj.len());
        for row in rows {
            let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!(vals.len(), 8);
            // norm_r and purity columns agree with r.
            let norm = (vals[1] * vals[1] + vals[2] * vals[2] + vals[3] * vals[3]).sqrt();
            assert!((vals[4] - norm).abs() < 1e-15);
            assert!((vals[5] - (0.5 + 2.0 * norm * norm)).abs() < 1e-15);
        }
    }
}
