//! Scenario files: a JSON document describing one simulation run.
//!
//! Matrices are row-major lists of [re, im] pairs. The initial state is
//! either explicit blocks or, for qubits, the shorthand
//! `{"pure_bloch": [r1, r2, r3], "pointer": [p1, p2]}` meaning
//! ρ(z, 0) = p(z)·ρ̂(0) with ρ̂(0) the state of Bloch vector r.
//!
//! Parsing failures (syntax, unknown fields, wrong shapes at the JSON
//! level) are `ScenarioError::Parse`; semantic failures (non-Hermitian
//! operators, bad traces, size clashes) are `ScenarioError::Validation`
//! and name the offending field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::RotatingApparatus;
use crate::coupling::{lindblad_coupling, simple_projective_coupling, unitary_coupling, Coupling};
use crate::linalg::{lindblad_basis, ComplexMatrix, OperatorBasis};
use crate::state::{density_from_bloch, HybridState};

pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

const DISTRIBUTION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario field `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ScenarioError {
    fn invalid(field: &str, message: impl std::fmt::Display) -> Self {
        ScenarioError::Validation { field: field.to_string(), message: message.to_string() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub dimension: usize,
    pub classical_size: usize,
    pub initial_state: InitialStateSpec,
    pub coupling: CouplingSpec,
    #[serde(default)]
    pub integration: IntegrationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputSpec>,
}

/// Exactly one of (`pure_bloch` + `pointer`) or `blocks` must be given.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure_bloch: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<MatrixSpec>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSpec {
    Hamiltonian(MatrixSpec),
    Lindblad(MatrixSpec),
    Measurement { operator: MatrixSpec, gamma: f64 },
    RotatingMeasurement { omega: f64, gamma: f64 },
    Sum(Vec<CouplingSpec>),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSpec {
    pub t_end: f64,
    pub dt: f64,
    pub output_samples: usize,
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            dt: crate::dynamics::DEFAULT_DT,
            output_samples: crate::dynamics::DEFAULT_OUTPUT_SAMPLES,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub omega: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SvgMode {
    /// p(1, t) against t, one series per run.
    #[default]
    Probability,
    /// (r1, r2) orbit with equal axes and the ‖r‖ = ½ circle.
    BlochPlane,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub include_induced: bool,
    pub svg_mode: SvgMode,
}

/// Closed-form reference availability for the `verify` workflow.
#[derive(Clone, Debug)]
pub enum OracleKind {
    Unitary(ComplexMatrix),
    Projective { operator: ComplexMatrix, gamma: f64 },
}

#[derive(Clone, Debug)]
pub struct SweepMember {
    pub label: String,
    pub omega: f64,
    pub coupling: Coupling,
}

/// A scenario after semantic validation: ready to integrate.
pub struct ResolvedScenario {
    pub name: String,
    pub dimension: usize,
    pub classical_size: usize,
    pub initial_state: HybridState,
    pub basis: OperatorBasis,
    pub coupling: Coupling,
    pub integration: IntegrationSpec,
    pub sweep: Option<Vec<SweepMember>>,
    pub outputs: OutputSpec,
    pub oracle: Option<OracleKind>,
}

pub fn parse_scenario(json: &str) -> Result<ScenarioFile, ScenarioError> {
    Ok(serde_json::from_str(json)?)
}

fn matrix_from_spec(
    spec: &MatrixSpec,
    expected_dim: usize,
    field: &str,
) -> Result<ComplexMatrix, ScenarioError> {
    if spec.len() != expected_dim || spec.iter().any(|row| row.len() != expected_dim) {
        return Err(ScenarioError::invalid(
            field,
            format!("expected a {expected_dim}x{expected_dim} matrix, got {} rows", spec.len()),
        ));
    }
    Ok(ComplexMatrix::from_fn(expected_dim, |i, j| {
        num_complex::Complex64::new(spec[i][j][0], spec[i][j][1])
    }))
}

pub fn matrix_to_spec(m: &ComplexMatrix) -> MatrixSpec {
    (0..m.dim())
        .map(|i| {
            (0..m.dim())
                .map(|j| {
                    let v = m.get(i, j);
                    [v.re, v.im]
                })
                .collect()
        })
        .collect()
}

fn check_distribution(p: &[f64], field: &str) -> Result<(), ScenarioError> {
    if p.iter().any(|&v| !(-DISTRIBUTION_TOL..=1.0 + DISTRIBUTION_TOL).contains(&v)) {
        return Err(ScenarioError::invalid(field, "entries must lie in [0, 1]"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(ScenarioError::invalid(field, format!("entries sum to {sum}, need 1")));
    }
    Ok(())
}

fn resolve_initial_state(
    spec: &InitialStateSpec,
    dimension: usize,
    classical_size: usize,
) -> Result<HybridState, ScenarioError> {
    match (&spec.pure_bloch, &spec.pointer, &spec.blocks) {
        (Some(r0), Some(p0), None) => {
            if dimension != 2 {
                return Err(ScenarioError::invalid(
                    "initial_state.pure_bloch",
                    "the Bloch shorthand requires dimension 2",
                ));
            }
            if p0.len() != classical_size {
                return Err(ScenarioError::invalid(
                    "initial_state.pointer",
                    format!("{} entries for classical_size {classical_size}", p0.len()),
                ));
            }
            check_distribution(p0, "initial_state.pointer")?;
            let norm = r0.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.5 + DISTRIBUTION_TOL {
                return Err(ScenarioError::invalid(
                    "initial_state.pure_bloch",
                    format!("Bloch vector norm {norm} exceeds 1/2"),
                ));
            }
            let rho_hat = density_from_bloch(*r0);
            let state = HybridState::product(&rho_hat, p0);
            state
                .validate(crate::state::STATE_TOL)
                .map_err(|e| ScenarioError::invalid("initial_state", e))?;
            Ok(state)
        }
        (None, None, Some(blocks)) => {
            if blocks.len() != classical_size {
                return Err(ScenarioError::invalid(
                    "initial_state.blocks",
                    format!("{} blocks for classical_size {classical_size}", blocks.len()),
                ));
            }
            let blocks = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    matrix_from_spec(b, dimension, &format!("initial_state.blocks[{i}]"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            HybridState::from_blocks(blocks)
                .map_err(|e| ScenarioError::invalid("initial_state.blocks", e))
        }
        _ => Err(ScenarioError::invalid(
            "initial_state",
            "give either `blocks`, or `pure_bloch` together with `pointer`",
        )),
    }
}

fn resolve_coupling(
    spec: &CouplingSpec,
    dimension: usize,
    classical_size: usize,
    basis: &OperatorBasis,
    field: &str,
) -> Result<Coupling, ScenarioError> {
    match spec {
        CouplingSpec::Hamiltonian(ms) => {
            let h = matrix_from_spec(ms, dimension, field)?;
            let w = unitary_coupling(&h, basis, classical_size)
                .map_err(|e| ScenarioError::invalid(field, e))?;
            Ok(Coupling::constant(w))
        }
        CouplingSpec::Lindblad(ms) => {
            let n = dimension * dimension - 1;
            let lambda = matrix_from_spec(ms, n, field)?;
            let w = lindblad_coupling(&lambda, classical_size)
                .map_err(|e| ScenarioError::invalid(field, e))?;
            Ok(Coupling::constant(w))
        }
        CouplingSpec::Measurement { operator, gamma } => {
            if classical_size != dimension {
                return Err(ScenarioError::invalid(
                    field,
                    format!(
                        "measurement couplings need classical_size = dimension, \
                         got {classical_size} and {dimension}"
                    ),
                ));
            }
            let m = matrix_from_spec(operator, dimension, field)?;
            let w = simple_projective_coupling(&m, *gamma, basis)
                .map_err(|e| ScenarioError::invalid(field, e))?;
            Ok(Coupling::constant(w))
        }
        CouplingSpec::RotatingMeasurement { omega, gamma } => {
            if dimension != 2 || classical_size != 2 {
                return Err(ScenarioError::invalid(
                    field,
                    "rotating_measurement is qubit-only (dimension = classical_size = 2)",
                ));
            }
            let app = RotatingApparatus::new(*omega, *gamma)
                .map_err(|e| ScenarioError::invalid(field, e))?;
            app.coupling(basis).map_err(|e| ScenarioError::invalid(field, e))
        }
        CouplingSpec::Sum(parts) => {
            if parts.is_empty() {
                return Err(ScenarioError::invalid(field, "sum coupling needs at least one part"));
            }
            let mut resolved: Option<Coupling> = None;
            for (i, part) in parts.iter().enumerate() {
                let sub =
                    resolve_coupling(part, dimension, classical_size, basis, &format!("{field}[{i}]"))?;
                resolved = Some(match resolved {
                    None => sub,
                    Some(acc) => acc
                        .add(&sub)
                        .map_err(|e| ScenarioError::invalid(field, e))?,
                });
            }
            Ok(resolved.expect("non-empty by the check above"))
        }
    }
}

impl ScenarioFile {
    pub fn resolve(&self) -> Result<ResolvedScenario, ScenarioError> {
        if self.dimension < 2 {
            return Err(ScenarioError::invalid("dimension", "need dimension >= 2"));
        }
        if self.classical_size == 0 {
            return Err(ScenarioError::invalid("classical_size", "need at least one pointer value"));
        }
        let dt = self.integration.dt;
        if !dt.is_finite() || dt <= 0.0 {
            return Err(ScenarioError::invalid("integration.dt", "step must be positive"));
        }
        let t_end = self.integration.t_end;
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(ScenarioError::invalid("integration.t_end", "horizon must be positive"));
        }
        let basis = lindblad_basis(self.dimension)
            .map_err(|e| ScenarioError::invalid("dimension", e))?;
        let initial_state =
            resolve_initial_state(&self.initial_state, self.dimension, self.classical_size)?;
        let coupling = resolve_coupling(
            &self.coupling,
            self.dimension,
            self.classical_size,
            &basis,
            "coupling",
        )?;

        let sweep = match &self.sweep {
            None => None,
            Some(sweep) => {
                let gamma = match &self.coupling {
                    CouplingSpec::RotatingMeasurement { gamma, .. } => *gamma,
                    _ => {
                        return Err(ScenarioError::invalid(
                            "sweep.omega",
                            "omega sweeps require a rotating_measurement coupling",
                        ))
                    }
                };
                if sweep.omega.is_empty() {
                    return Err(ScenarioError::invalid("sweep.omega", "sweep list is empty"));
                }
                let members = sweep
                    .omega
                    .iter()
                    .map(|&omega| {
                        let app = RotatingApparatus::new(omega, gamma)
                            .map_err(|e| ScenarioError::invalid("sweep.omega", e))?;
                        Ok(SweepMember {
                            label: format!("omega_{omega}"),
                            omega,
                            coupling: app
                                .coupling(&basis)
                                .map_err(|e| ScenarioError::invalid("sweep.omega", e))?,
                        })
                    })
                    .collect::<Result<Vec<_>, ScenarioError>>()?;
                Some(members)
            }
        };

        let oracle = match &self.coupling {
            CouplingSpec::Hamiltonian(ms) => {
                Some(OracleKind::Unitary(matrix_from_spec(ms, self.dimension, "coupling")?))
            }
            CouplingSpec::Measurement { operator, gamma } => Some(OracleKind::Projective {
                operator: matrix_from_spec(operator, self.dimension, "coupling")?,
                gamma: *gamma,
            }),
            _ => None,
        };

        Ok(ResolvedScenario {
            name: self.name.clone(),
            dimension: self.dimension,
            classical_size: self.classical_size,
            initial_state,
            basis,
            coupling,
            integration: self.integration,
            sweep,
            outputs: self.outputs.clone().unwrap_or_default(),
            oracle,
        })
    }

    /// The same scenario with defaults filled in and the initial state
    /// expanded to explicit blocks. Normalization is idempotent:
    /// `s.normalized()? == s.normalized()?.normalized()?`.
    pub fn normalized(&self) -> Result<ScenarioFile, ScenarioError> {
        let resolved = self.resolve()?;
        let blocks = resolved
            .initial_state
            .blocks()
            .iter()
            .map(matrix_to_spec)
            .collect();
        Ok(ScenarioFile {
            name: self.name.clone(),
            dimension: self.dimension,
            classical_size: self.classical_size,
            initial_state: InitialStateSpec {
                pure_bloch: None,
                pointer: None,
                blocks: Some(blocks),
            },
            coupling: self.coupling.clone(),
            integration: self.integration,
            sweep: self.sweep.clone(),
            outputs: Some(resolved.outputs),
        })
    }
}

/// Command-line overrides applied before resolution.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
}

fn override_omega(spec: &mut CouplingSpec, value: f64) -> usize {
    match spec {
        CouplingSpec::RotatingMeasurement { omega, .. } => {
            *omega = value;
            1
        }
        CouplingSpec::Sum(parts) => parts.iter_mut().map(|p| override_omega(p, value)).sum(),
        _ => 0,
    }
}

fn override_gamma(spec: &mut CouplingSpec, value: f64) -> usize {
    match spec {
        CouplingSpec::RotatingMeasurement { gamma, .. }
        | CouplingSpec::Measurement { gamma, .. } => {
            *gamma = value;
            1
        }
        CouplingSpec::Sum(parts) => parts.iter_mut().map(|p| override_gamma(p, value)).sum(),
        _ => 0,
    }
}

pub fn apply_overrides(file: &mut ScenarioFile, ov: &Overrides) -> Result<(), ScenarioError> {
    if let Some(dt) = ov.dt {
        file.integration.dt = dt;
    }
    if let Some(t_end) = ov.t_end {
        file.integration.t_end = t_end;
    }
    if let Some(omega) = ov.omega {
        if override_omega(&mut file.coupling, omega) == 0 {
            return Err(ScenarioError::invalid(
                "coupling",
                "--omega override needs a rotating_measurement coupling",
            ));
        }
        // A pinned omega replaces any sweep.
        file.sweep = None;
    }
    if let Some(gamma) = ov.gamma {
        if override_gamma(&mut file.coupling, gamma) == 0 {
            return Err(ScenarioError::invalid(
                "coupling",
                "--gamma override needs a measurement or rotating_measurement coupling",
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bloch_scenario_json() -> String {
        r#"{
            "name": "demo",
            "dimension": 2,
            "classical_size": 2,
            "initial_state": {"pure_bloch": [0.5, 0.0, 0.0], "pointer": [0.5, 0.5]},
            "coupling": {"rotating_measurement": {"omega": 1.0, "gamma": 1.0}},
            "integration": {"t_end": 5.0}
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_resolves_bloch_shorthand() {
        let file = parse_scenario(&bloch_scenario_json()).unwrap();
        assert_eq!(file.integration.dt, 1e-3);
        assert_eq!(file.integration.output_samples, 1000);
        let resolved = file.resolve().unwrap();
        assert_eq!(resolved.initial_state.pointer_count(), 2);
        let p = resolved.initial_state.induced_probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15);
        let r = resolved.initial_state.bloch_vector();
        assert!((r[0] - 0.5).abs() < 1e-15 && r[1].abs() < 1e-15);
        assert!(!resolved.coupling.is_constant());
        assert!(resolved.oracle.is_none());
    }

    #[test]
    fn parses_explicit_blocks() {
        let json = r#"{
            "name": "blocks",
            "dimension": 2,
            "classical_size": 2,
            "initial_state": {"blocks": [
                [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
                [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]
            ]},
            "coupling": {"hamiltonian": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}
        }"#;
        let resolved = parse_scenario(json).unwrap().resolve().unwrap();
        assert!(resolved.coupling.is_constant());
        assert!(matches!(resolved.oracle, Some(OracleKind::Unitary(_))));
        assert_eq!(resolved.integration.t_end, 10.0);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(parse_scenario("{"), Err(ScenarioError::Parse(_))));
        // Unknown fields are rejected at the parse stage too.
        let json = bloch_scenario_json().replace("\"name\"", "\"nam\"");
        assert!(matches!(parse_scenario(&json), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn bad_trace_is_a_validation_error() {
        let json = r#"{
            "name": "bad",
            "dimension": 2,
            "classical_size": 1,
            "initial_state": {"blocks": [[[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]]},
            "coupling": {"hamiltonian": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
        }"#;
        match parse_scenario(json).unwrap().resolve() {
            Err(ScenarioError::Validation { field, .. }) => {
                assert_eq!(field, "initial_state.blocks")
            }
            other => panic!("expected validation failure, got {:?}", other.as_ref().err()),
        }
    }

    #[test]
    fn measurement_requires_matching_sizes() {
        let json = r#"{
            "name": "mismatch",
            "dimension": 2,
            "classical_size": 3,
            "initial_state": {"blocks": [
                [[[0.4, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
                [[[0.3, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
                [[[0.3, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
            ]},
            "coupling": {"measurement": {
                "operator": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]],
                "gamma": 1.0
            }}
        }"#;
        assert!(matches!(
            parse_scenario(json).unwrap().resolve(),
            Err(ScenarioError::Validation { .. })
        ));
    }

    #[test]
    fn sweep_requires_rotating_coupling() {
        let json = r#"{
            "name": "sweepy",
            "dimension": 2,
            "classical_size": 2,
            "initial_state": {"pure_bloch": [0.5, 0.0, 0.0], "pointer": [0.5, 0.5]},
            "coupling": {"hamiltonian": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]},
            "sweep": {"omega": [0.0, 1.0]}
        }"#;
        assert!(matches!(
            parse_scenario(json).unwrap().resolve(),
            Err(ScenarioError::Validation { field, .. }) if field == "sweep.omega"
        ));
    }

    #[test]
    fn sweep_members_are_labeled() {
        let json = bloch_scenario_json().replace(
            "\"integration\"",
            "\"sweep\": {\"omega\": [0.0, 0.25, 4.0]}, \"integration\"",
        );
        let resolved = parse_scenario(&json).unwrap().resolve().unwrap();
        let members = resolved.sweep.unwrap();
        let labels: Vec<&str> = members.iter().map(|m| m.label.as_str()).collect();
        assert_eq!(labels, ["omega_0", "omega_0.25", "omega_4"]);
    }

    #[test]
    fn sum_of_constant_parts_stays_constant() {
        let json = r#"{
            "name": "sum",
            "dimension": 2,
            "classical_size": 2,
            "initial_state": {"pure_bloch": [0.5, 0.0, 0.0], "pointer": [0.5, 0.5]},
            "coupling": {"sum": [
                {"hamiltonian": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]},
                {"measurement": {
                    "operator": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]],
                    "gamma": 0.5
                }}
            ]}
        }"#;
        let resolved = parse_scenario(json).unwrap().resolve().unwrap();
        assert!(resolved.coupling.is_constant());
        assert!(resolved.oracle.is_none());
        let report = crate::coupling::validate_positivity_at(
            &resolved.coupling,
            0.0,
            crate::coupling::PSD_TOL,
        );
        assert!(report.pass);
    }

    #[test]
    fn overrides_apply_and_report_misuse() {
        let mut file = parse_scenario(&bloch_scenario_json()).unwrap();
        apply_overrides(
            &mut file,
            &Overrides { dt: Some(0.01), t_end: Some(2.0), omega: Some(3.0), gamma: Some(0.7) },
        )
        .unwrap();
        assert_eq!(file.integration.dt, 0.01);
        assert_eq!(file.integration.t_end, 2.0);
        match &file.coupling {
            CouplingSpec::RotatingMeasurement { omega, gamma } => {
                assert_eq!(*omega, 3.0);
                assert_eq!(*gamma, 0.7);
            }
            other => panic!("unexpected coupling {other:?}"),
        }

        let mut file = parse_scenario(&bloch_scenario_json()).unwrap();
        file.coupling =
            CouplingSpec::Hamiltonian(matrix_to_spec(&crate::linalg::pauli(3)));
        assert!(apply_overrides(&mut file, &Overrides { omega: Some(1.0), ..Default::default() })
            .is_err());
        assert!(apply_overrides(&mut file, &Overrides { gamma: Some(1.0), ..Default::default() })
            .is_err());
    }

    #[test]
    fn omega_override_drops_sweep() {
        let json = bloch_scenario_json().replace(
            "\"integration\"",
            "\"sweep\": {\"omega\": [0.0, 1.0]}, \"integration\"",
        );
        let mut file = parse_scenario(&json).unwrap();
        assert!(file.sweep.is_some());
        apply_overrides(&mut file, &Overrides { omega: Some(2.0), ..Default::default() }).unwrap();
        assert!(file.sweep.is_none());
    }

    #[test]
    fn normalization_round_trips() {
        let file = parse_scenario(&bloch_scenario_json()).unwrap();
        let normalized = file.normalized().unwrap();
        assert!(normalized.initial_state.blocks.is_some());
        assert!(normalized.initial_state.pure_bloch.is_none());
        assert!(normalized.outputs.is_some());
        let json = serde_json::to_string_pretty(&normalized).unwrap();
        let reparsed = parse_scenario(&json).unwrap();
        assert_eq!(reparsed, normalized);
        assert_eq!(reparsed.normalized().unwrap(), normalized);
    }

    #[test]
    fn external_json_shape_is_stable() {
        let file = parse_scenario(&bloch_scenario_json()).unwrap();
        let value = serde_json::to_value(&file).unwrap();
        assert!(value["coupling"]["rotating_measurement"]["omega"].is_number());
        let m = CouplingSpec::Measurement {
            operator: matrix_to_spec(&crate::linalg::pauli(3)),
            gamma: 1.0,
        };
        let value = serde_json::to_value(&m).unwrap();
        assert!(value["measurement"]["operator"].is_array());
        assert!(value["measurement"]["gamma"].is_number());
        let l = CouplingSpec::Lindblad(matrix_to_spec(&ComplexMatrix::zeros(3)));
        let value = serde_json::to_value(&l).unwrap();
        assert_eq!(value["lindblad"][0][0], serde_json::json!([0.0, 0.0]));
    }

    #[test]
    fn rotating_needs_qubit_sizes() {
        let json = bloch_scenario_json()
            .replace("\"dimension\": 2", "\"dimension\": 3")
            .replace(
                "{\"pure_bloch\": [0.5, 0.0, 0.0], \"pointer\": [0.5, 0.5]}",
                "{\"blocks\": [
                    [[[0.5,0.0],[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0],[0.0,0.0]]],
                    [[[0.5,0.0],[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0],[0.0,0.0]]]
                ]}",
            );
        assert!(matches!(
            parse_scenario(&json).unwrap().resolve(),
            Err(ScenarioError::Validation { .. })
        ));
    }
}
