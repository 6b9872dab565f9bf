//! End-to-end checks of the `hybridq` binary: exit codes, produced files,
//! and the stdout summaries the subcommands promise.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybridq"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run_ok(output: &Output) -> String {
    assert!(
        output.status.success(),
        "{}",
        authentic_failure(output, "expected success"),
    );
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn authentic_failure(output: &Output, what: &str) -> String {
    format!(
        "{what}; status {:?}\nstdout:\n{}\nstderr:\n{}",
        output.status.code(),
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    )
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "{}",
        authentic_failure(output, "unexpected exit code"),
    );
}

#[test]
fn run_writes_csv_and_svg_for_static_measurement() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["run", "--scenario"])
        .arg(scenario("measurement_sigma3.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("final p = [0.500000, 0.500000]"), "stdout: {stdout}");

    let csv = fs::read_to_string(dir.path().join("measurement_sigma3.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,p_1,p_2,trace_residual,min_eig,r1,r2,r3,purity");
    assert_eq!(lines.count(), 1001);

    let svg = fs::read_to_string(dir.path().join("measurement_sigma3.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "not an svg document");
    assert!(svg.contains("</svg>"));
}

#[test]
fn run_sweep_writes_member_csvs_and_combined_chart() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["run", "--scenario"])
        .arg(scenario("fig1_bloch.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    run_ok(&output);

    for label in ["omega_0", "omega_0.25", "omega_0.5", "omega_1", "omega_2", "omega_4"] {
        let path = dir.path().join(format!("fig1_bloch_{label}.csv"));
        assert!(path.exists(), "missing {}", path.display());
    }
    let svg = fs::read_to_string(dir.path().join("fig1_bloch.svg")).unwrap();
    // One legend entry per sweep member.
    assert!(svg.matches("omega_").count() >= 6, "legend incomplete");
}

#[test]
fn run_respects_explicit_svg_path_and_default_csv_name() {
    let dir = tempfile::tempdir().unwrap();
    // unitary_precession declares no svg output; --svg forces one anyway.
    let svg_path = dir.path().join("forced.svg");
    let output = bin()
        .args(["run", "--scenario"])
        .arg(scenario("unitary_precession.json"))
        .arg("--out")
        .arg(dir.path())
        .arg("--svg")
        .arg(&svg_path)
        .output()
        .unwrap();
    run_ok(&output);
    assert!(svg_path.exists());
    // No csv name in the scenario either, so the file stem is reused.
    let csv = fs::read_to_string(dir.path().join("unitary_precession.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("rhohat_1_1_re"), "induced columns missing");
}

#[test]
fn run_reports_malformed_json_as_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\"name\": ").unwrap();
    let output = bin().args(["run", "--scenario"]).arg(&path).output().unwrap();
    assert_exit(&output, 2);
}

#[test]
fn run_reports_missing_file_as_parse_error() {
    let output = bin()
        .args(["run", "--scenario", "/nonexistent/scenario.json"])
        .output()
        .unwrap();
    assert_exit(&output, 2);
}

#[test]
fn run_rejects_denormalized_pointer_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heavy.json");
    fs::write(
        &path,
        r#"{
            "name": "heavy pointer",
            "dimension": 2,
            "classical_size": 2,
            "initial_state": {"pure_bloch": [0.0, 0.0, 0.5], "pointer": [0.9, 0.6]},
            "coupling": {"hamiltonian": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}
        }"#,
    )
    .unwrap();
    let output = bin().args(["run", "--scenario"]).arg(&path).output().unwrap();
    assert_exit(&output, 3);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("initial_state.pointer"), "stderr: {stderr}");
}

#[test]
fn verify_accepts_measurement_scenario_within_tolerance() {
    let output = bin()
        .args(["verify", "--scenario"])
        .arg(scenario("measurement_sigma3.json"))
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("max deviation"), "stdout: {stdout}");
}

#[test]
fn verify_accepts_unitary_scenario_within_tolerance() {
    let output = bin()
        .args(["verify", "--scenario"])
        .arg(scenario("unitary_precession.json"))
        .output()
        .unwrap();
    run_ok(&output);
}

#[test]
fn verify_with_coarse_step_exceeds_tight_tolerance() {
    let output = bin()
        .args(["verify", "--dt", "0.5", "--tolerance", "1e-9", "--scenario"])
        .arg(scenario("measurement_sigma3.json"))
        .output()
        .unwrap();
    assert_exit(&output, 1);
    // The deviation is still reported before the failure verdict.
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("max deviation"), "stdout: {stdout}");
}

#[test]
fn verify_refuses_scenarios_without_closed_form() {
    for name in ["fig1_bloch.json", "lindblad_dephasing.json"] {
        let output = bin().args(["verify", "--scenario"]).arg(scenario(name)).output().unwrap();
        assert_exit(&output, 5);
    }
}

#[test]
fn validate_coupling_passes_bundled_scenarios() {
    for name in [
        "fig1_bloch.json",
        "measurement_sigma3.json",
        "unitary_precession.json",
        "lindblad_dephasing.json",
        "projector_family_d3.json",
    ] {
        let output = bin()
            .args(["validate-coupling", "--scenario"])
            .arg(scenario(name))
            .output()
            .unwrap();
        let stdout = run_ok(&output);
        assert!(stdout.contains("PASS"), "{name} stdout: {stdout}");
        assert!(!stdout.contains("FAIL"), "{name} stdout: {stdout}");
    }
}

#[test]
fn validate_coupling_samples_requested_times() {
    let output = bin()
        .args(["validate-coupling", "--times", "0,1.5,3", "--scenario"])
        .arg(scenario("fig2_probability.json"))
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    assert_eq!(stdout.matches("t = ").count(), 3, "stdout: {stdout}");
    assert!(stdout.contains("t = 1.5"), "stdout: {stdout}");
}

#[test]
fn validate_coupling_rejects_indefinite_rate_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("indefinite.json");
    fs::write(
        &path,
        r#"{
            "name": "indefinite rates",
            "dimension": 2,
            "classical_size": 2,
            "initial_state": {"pure_bloch": [0.5, 0.0, 0.0], "pointer": [0.5, 0.5]},
            "coupling": {"lindblad": [
                [[0.2, 0], [0, 0], [0, 0]],
                [[0, 0], [-0.1, 0], [0, 0]],
                [[0, 0], [0, 0], [0.1, 0]]
            ]}
        }"#,
    )
    .unwrap();
    let output = bin().args(["validate-coupling", "--scenario"]).arg(&path).output().unwrap();
    assert_exit(&output, 3);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("negative eigenvalue"), "stderr: {stderr}");
}

#[test]
fn omega_override_collapses_sweep_to_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["run", "--omega", "2.0", "--scenario"])
        .arg(scenario("fig1_bloch.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    run_ok(&output);
    let csvs: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .collect();
    assert_eq!(csvs.len(), 1, "expected one csv, got {csvs:?}");
    assert_eq!(csvs[0].file_name(), "fig1_bloch.csv");
}

#[test]
fn gamma_override_changes_the_relaxation_rate() {
    // Faster measurement rate pulls p(1) closer to its target by the same time.
    let slow = bin()
        .args(["run", "--dump-normalized", "--gamma", "0.5", "--scenario"])
        .arg(scenario("measurement_sigma3.json"))
        .output()
        .unwrap();
    let stdout = run_ok(&slow);
    assert!(stdout.contains("\"gamma\": 0.5"), "stdout: {stdout}");
}

#[test]
fn dump_normalized_output_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let first = bin()
        .args(["run", "--dump-normalized", "--scenario"])
        .arg(scenario("fig2_probability.json"))
        .output()
        .unwrap();
    let first_json = run_ok(&first);

    let path = dir.path().join("normalized.json");
    fs::write(&path, &first_json).unwrap();
    let second = bin()
        .args(["run", "--dump-normalized", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    let second_json = run_ok(&second);
    assert_eq!(first_json, second_json);
}

#[test]
fn bad_flag_exits_with_clap_convention() {
    let output = bin().args(["run", "--no-such-flag"]).output().unwrap();
    assert_exit(&output, 2);
}
