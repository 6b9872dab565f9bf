//! Command-line front end for hybrid master-equation scenarios.
//!
//! Three subcommands:
//!   run                integrate a scenario and write CSV (and optionally SVG)
//!   verify             compare the integrator against a closed-form solution
//!   validate-coupling  check the complete-positivity block conditions
//!
//! Exit codes: 0 success, 2 scenario parse error, 3 validation failure,
//! 4 integration monitor breach, 5 verify on a scenario with no closed form,
//! 1 anything else (IO, verify deviation above tolerance).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hybridq::coupling::{validate_positivity_at, PSD_TOL};
use hybridq::dynamics::{integrate, DynamicsError, IntegrationOptions};
use hybridq::oracle::{ExactProjectiveSolution, ExactUnitarySolution, OracleError};
use hybridq::output::trajectory_csv;
use hybridq::plot::{line_chart, ChartOptions, Series};
use hybridq::scenario::{
    apply_overrides, parse_scenario, OracleKind, Overrides, ResolvedScenario, ScenarioError,
    ScenarioFile, SvgMode,
};
use hybridq::{Coupling, Trajectory};

const EXIT_OTHER: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_MONITOR: u8 = 4;
const EXIT_NO_ORACLE: u8 = 5;

#[derive(Parser)]
#[command(name = "hybridq", version, about = "Hybrid quantum-classical scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write trajectory files.
    Run(RunArgs),
    /// Integrate and report the maximum deviation from the closed-form solution.
    Verify(VerifyArgs),
    /// Check the positivity conditions of the scenario's coupling blocks.
    ValidateCoupling(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario description (JSON).
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,

    /// Override the integrator step.
    #[arg(long, value_name = "DT")]
    dt: Option<f64>,

    /// Override the integration horizon.
    #[arg(long, value_name = "T")]
    t_end: Option<f64>,

    /// Override the rotation frequency (drops any sweep).
    #[arg(long, value_name = "OMEGA")]
    omega: Option<f64>,

    /// Override the measurement rate.
    #[arg(long, value_name = "GAMMA")]
    gamma: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            dt: self.dt,
            t_end: self.t_end,
            omega: self.omega,
            gamma: self.gamma,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Directory for output files (default: current directory).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Write the chart to this exact path, regardless of the scenario's outputs.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,

    /// Print the scenario with defaults filled in and exit.
    #[arg(long)]
    dump_normalized: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Largest acceptable entrywise deviation from the closed form.
    #[arg(long, default_value_t = 1e-7, value_name = "EPS")]
    tolerance: f64,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Times at which a time-dependent coupling is sampled.
    #[arg(long, value_delimiter = ',', value_name = "T1,T2,...")]
    times: Option<Vec<f64>>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        let code = match &e {
            ScenarioError::Parse(_) => EXIT_PARSE,
            ScenarioError::Validation { .. } => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        let code = match &e {
            DynamicsError::MonitorBreach { .. } => EXIT_MONITOR,
            _ => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::new(EXIT_VALIDATION, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::ValidateCoupling(args) => validate_coupling(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_scenario(path: &Path, ov: &Overrides) -> Result<ScenarioFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
    let mut file = parse_scenario(&text)?;
    apply_overrides(&mut file, ov)?;
    Ok(file)
}

fn integration_options(resolved: &ResolvedScenario) -> IntegrationOptions {
    IntegrationOptions::new(resolved.integration.t_end)
        .with_dt(resolved.integration.dt)
        .with_output_samples(resolved.integration.output_samples)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| {
                CliError::new(EXIT_OTHER, format!("cannot create {}: {e}", dir.display()))
            })?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::new(EXIT_OTHER, format!("cannot write {}: {e}", path.display())))
}

/// Inserts a sweep member label before the file extension.
fn member_path(base: &Path, label: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|s| s.to_string_lossy().into_owned());
    match ext {
        Some(ext) => base.with_file_name(format!("{stem}_{label}.{ext}")),
        None => base.with_file_name(format!("{stem}_{label}")),
    }
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let file = load_scenario(&args.common.scenario, &args.common.overrides())?;
    if args.dump_normalized {
        let normalized = file.normalized()?;
        let json = serde_json::to_string_pretty(&normalized)
            .map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?;
        println!("{json}");
        return Ok(());
    }

    let resolved = file.resolve()?;
    let opts = integration_options(&resolved);

    let jobs: Vec<(Option<&str>, &Coupling)> = match &resolved.sweep {
        Some(members) => members
            .iter()
            .map(|m| (Some(m.label.as_str()), &m.coupling))
            .collect(),
        None => vec![(None, &resolved.coupling)],
    };
    let trajectories = run_jobs(&resolved, &opts, &jobs)?;

    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let csv_name = resolved.outputs.csv.clone().unwrap_or_else(|| {
        let stem = args
            .common
            .scenario
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trajectory".into());
        format!("{stem}.csv")
    });
    let csv_base = out_dir.join(csv_name);

    for ((label, _), traj) in jobs.iter().zip(&trajectories) {
        let path = match label {
            Some(label) => member_path(&csv_base, label),
            None => csv_base.clone(),
        };
        write_file(&path, &trajectory_csv(traj, resolved.outputs.include_induced))?;
        for flag in traj.flags() {
            eprintln!("warning: {flag}");
        }
        let run_name = label.unwrap_or(&resolved.name);
        let last = traj.len() - 1;
        let p = traj
            .probabilities(last)
            .iter()
            .map(|p| format!("{p:.6}"))
            .collect::<Vec<_>>()
            .join(", ");
        println!(
            "{run_name}: wrote {} ({} samples), final p = [{p}], purity = {:.6}, max |tr-1| = {:.2e}",
            path.display(),
            traj.len(),
            traj.purity(last),
            traj.max_trace_residual(),
        );
    }

    let svg_path = match &args.svg {
        Some(path) => Some(path.clone()),
        None => resolved.outputs.svg.as_ref().map(|name| out_dir.join(name)),
    };
    if let Some(svg_path) = svg_path {
        let chart = render_chart(&resolved, &jobs, &trajectories)?;
        write_file(&svg_path, &chart)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

/// Sweep members are independent initial-value problems; integrate them on
/// scoped threads and collect results in member order.
fn run_jobs(
    resolved: &ResolvedScenario,
    opts: &IntegrationOptions,
    jobs: &[(Option<&str>, &Coupling)],
) -> Result<Vec<Trajectory>, CliError> {
    if jobs.len() == 1 {
        let traj = integrate(jobs[0].1, &resolved.initial_state, &resolved.basis, opts)?;
        return Ok(vec![traj]);
    }
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(_, coupling)| {
                scope.spawn(move || {
                    integrate(coupling, &resolved.initial_state, &resolved.basis, opts)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("integration worker panicked"))
            .collect::<Vec<_>>()
    });
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

fn render_chart(
    resolved: &ResolvedScenario,
    jobs: &[(Option<&str>, &Coupling)],
    trajectories: &[Trajectory],
) -> Result<String, CliError> {
    if resolved.outputs.svg_mode == SvgMode::BlochPlane && resolved.dimension != 2 {
        return Err(CliError::new(
            EXIT_VALIDATION,
            "bloch_plane charts need a two-level quantum system",
        ));
    }
    let series: Vec<Series> = jobs
        .iter()
        .zip(trajectories)
        .map(|(&(label, _), traj)| {
            let name = label.unwrap_or("p(1)");
            let points: Vec<(f64, f64)> = match resolved.outputs.svg_mode {
                SvgMode::Probability => (0..traj.len())
                    .map(|i| (traj.time(i), traj.probabilities(i)[0]))
                    .collect(),
                SvgMode::BlochPlane => (0..traj.len())
                    .map(|i| {
                        let r = traj.bloch(i);
                        (r[0], r[1])
                    })
                    .collect(),
            };
            Series::new(name, points)
        })
        .collect();
    let chart_opts = match resolved.outputs.svg_mode {
        SvgMode::Probability => ChartOptions {
            title: resolved.name.clone(),
            x_label: "t".into(),
            y_label: "p(1)".into(),
            ..ChartOptions::default()
        },
        SvgMode::BlochPlane => ChartOptions {
            title: resolved.name.clone(),
            x_label: "r1".into(),
            y_label: "r2".into(),
            equal_axes: true,
            reference_circle: Some(0.5),
            ..ChartOptions::default()
        },
    };
    Ok(line_chart(&series, &chart_opts))
}

fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let file = load_scenario(&args.common.scenario, &args.common.overrides())?;
    let resolved = file.resolve()?;
    let Some(oracle) = &resolved.oracle else {
        return Err(CliError::new(
            EXIT_NO_ORACLE,
            "no closed-form solution for this coupling; only hamiltonian and \
             measurement scenarios without a sweep can be verified",
        ));
    };

    let opts = integration_options(&resolved);
    let traj = integrate(&resolved.coupling, &resolved.initial_state, &resolved.basis, &opts)?;

    let mut deviation: f64 = 0.0;
    match oracle {
        OracleKind::Unitary(h) => {
            let sol = ExactUnitarySolution::new(h, &resolved.initial_state)?;
            for i in 0..traj.len() {
                let exact = sol.hybrid_state(traj.time(i))?;
                deviation = deviation.max(traj.state(i).max_abs_diff(&exact));
            }
        }
        OracleKind::Projective { operator, gamma } => {
            let sol = ExactProjectiveSolution::new(operator, *gamma, &resolved.initial_state)?;
            for i in 0..traj.len() {
                let exact = sol.hybrid_state(traj.time(i))?;
                deviation = deviation.max(traj.state(i).max_abs_diff(&exact));
            }
        }
    }

    println!(
        "verify {}: max deviation {deviation:.3e} over {} samples (tolerance {:.1e})",
        resolved.name,
        traj.len(),
        args.tolerance,
    );
    if deviation <= args.tolerance {
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_OTHER,
            format!("deviation {deviation:.3e} exceeds tolerance {:.1e}", args.tolerance),
        ))
    }
}

fn validate_coupling(args: ValidateArgs) -> Result<(), CliError> {
    let file = load_scenario(&args.common.scenario, &args.common.overrides())?;
    let resolved = file.resolve()?;

    let times = match args.times {
        Some(times) if !times.is_empty() => times,
        _ if resolved.coupling.is_constant() => vec![0.0],
        _ => vec![0.0, 1.0, 2.0],
    };

    let mut all_pass = true;
    for &t in &times {
        let report = validate_positivity_at(&resolved.coupling, t, PSD_TOL);
        println!("t = {t}: {}", if report.pass { "PASS" } else { "FAIL" });
        for block in &report.off_diagonal {
            println!(
                "  transfer block (z={}, y={}): min eigenvalue {:+.3e}, hermiticity {:.3e}{}",
                block.z,
                block.y,
                block.min_eigenvalue,
                block.hermiticity_deviation,
                if block.pass { "" } else { "  <- FAIL" },
            );
        }
        for block in &report.diagonal {
            println!(
                "  traceless sector (z={}): min eigenvalue {:+.3e}, hermiticity {:.3e}{}",
                block.z,
                block.min_eigenvalue,
                block.hermiticity_deviation,
                if block.pass { "" } else { "  <- FAIL" },
            );
        }
        all_pass &= report.pass;
    }

    if all_pass {
        Ok(())
    } else {
        Err(CliError::new(EXIT_VALIDATION, "coupling failed the positivity conditions"))
    }
}
