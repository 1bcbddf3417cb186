//! `pidtune` command-line front end.
//!
//! ```text
//! pidtune generate [--config FILE] [--output-dir DIR] [filters]   -> DIR/trials.json
//! pidtune run --matrix FILE [--parallelism N] [--output-dir DIR]  -> DIR/results.json, DIR/logs/*.csv
//! pidtune sim --kp K --ki K --kd K --robot R [--config FILE]      -> DIR/trace_<robot>.csv
//! pidtune report --results FILE [--output-dir DIR]                -> DIR/summary.csv, DIR/kde_*.svg
//! ```
//!
//! Exit codes: 0 success, 1 usage or config error, 2 I/O error. Trials that
//! fail to converge are results, not errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::metrics::{evaluate, StepMetrics};
use crate::pid::GainVector;
use crate::plant::run_experiment;
use crate::report::format::{fmt_opt_sig6, fmt_sig6};
use crate::report::{
    accepted_settling_times, convergence_by_optimizer, kde, render_kde_svg, summarize, Bandwidth, KdeCurve, KdeSeries,
};
use crate::trials::{
    run_batch, write_trial_log_file, OptimizerKind, RobotKind, TrialMatrix, TrialResult, WorkbenchConfig,
};
use crate::{report, Error};

pub const CONFIG_ENV: &str = "PIDTUNE_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "pidtune", version, about = "PID auto-tuning workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate the trial matrix from a config file.
    Generate(GenerateArgs),
    /// Execute a generated trial matrix.
    Run(RunArgs),
    /// Simulate one rotation with fixed gains.
    Sim(SimArgs),
    /// Summarize a results file and plot settling-time densities.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Workbench config (TOML). Falls back to $PIDTUNE_CONFIG, then the
    /// built-in defaults.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    /// Keep only these optimizers.
    #[arg(long, value_delimiter = ',')]
    optimizer: Vec<OptimizerKind>,
    /// Keep only these robots.
    #[arg(long, value_delimiter = ',')]
    robot: Vec<RobotKind>,
    /// Keep only these exploration/exploitation level ids.
    #[arg(long, value_delimiter = ',')]
    eec: Vec<u32>,
    /// Keep only these initial-state ids.
    #[arg(long, value_delimiter = ',')]
    init_state: Vec<u32>,
    /// Replace the config's seed list.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long)]
    kp: f64,
    #[arg(long)]
    ki: f64,
    #[arg(long)]
    kd: f64,
    #[arg(long)]
    robot: RobotKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    /// Fixed KDE bandwidth in ms instead of Silverman's rule.
    #[arg(long)]
    bandwidth: Option<f64>,
}

impl clap::ValueEnum for OptimizerKind {
    fn value_variants<'a>() -> &'a [Self] {
        &OptimizerKind::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.as_str()))
    }
}

impl clap::ValueEnum for RobotKind {
    fn value_variants<'a>() -> &'a [Self] {
        &RobotKind::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        let v = clap::builder::PossibleValue::new(self.as_str());
        Some(match self {
            RobotKind::Omnidirectional => v.alias("omni"),
            RobotKind::Ddrm => v,
        })
    }
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

/// Parse `args` (including the program name) and execute; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Sim(a) => cmd_sim(a),
        Command::Report(a) => cmd_report(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn load_config(arg: &ConfigArg) -> Result<WorkbenchConfig, Error> {
    match &arg.config {
        Some(path) => WorkbenchConfig::load(path),
        None => Ok(WorkbenchConfig::default()),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    let mut config = load_config(&a.config)?;
    if !a.optimizer.is_empty() {
        config.optimizers.retain(|o| a.optimizer.contains(o));
    }
    if !a.robot.is_empty() {
        config.robots.retain(|r| a.robot.contains(&r.kind));
    }
    if !a.eec.is_empty() {
        config.eecs.retain(|e| a.eec.contains(&e.id));
    }
    if !a.seeds.is_empty() {
        config.seeds = a.seeds.clone();
    }
    let mut matrix = TrialMatrix::from_config(&config);
    if !a.init_state.is_empty() {
        matrix.trials.retain(|t| a.init_state.contains(&t.initial_state.id));
    }
    if config.initial_states.is_empty() {
        eprintln!("warning: config lists no initial states; the matrix is empty");
    } else if matrix.trials.is_empty() {
        eprintln!("warning: filters removed every trial; the matrix is empty");
    }
    ensure_dir(&a.output_dir)?;
    let path = a.output_dir.join("trials.json");
    report::write_json(&path, &matrix)?;
    println!("{}", matrix.trials.len());
    Ok(())
}

fn read_matrix(path: &Path) -> Result<TrialMatrix, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let matrix: TrialMatrix =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    for (i, t) in matrix.trials.iter().enumerate() {
        if !matrix.plants.contains_key(&t.robot) {
            return Err(Failure::Usage(format!("trials[{i}]: {}", Error::UnknownRobot(t.robot.to_string()))));
        }
        t.validate().map_err(|e| Failure::Usage(format!("trials[{i}]: {e}")))?;
    }
    Ok(matrix)
}

fn cmd_run(a: RunArgs) -> CmdResult {
    let matrix = read_matrix(&a.matrix)?;
    let results = run_batch(&matrix.trials, &matrix.plants, a.parallelism.max(1));
    let logs = a.output_dir.join("logs");
    ensure_dir(&logs)?;
    for r in &results {
        write_trial_log_file(&logs.join(format!("{}.csv", r.config.slug())), r)?;
        if let Some(failure) = &r.failure {
            eprintln!("warning: trial {} failed: {failure}", r.config.slug());
        }
    }
    report::write_results_json(&a.output_dir.join("results.json"), &results)?;
    let converged = results.iter().filter(|r| r.converged).count();
    println!("{converged}/{} trials converged", results.len());
    Ok(())
}

fn print_metrics(m: &StepMetrics, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "rise_time_ms: {}", fmt_opt_sig6(m.rise_time_ms.map(|t| t as f64)))?;
    writeln!(out, "overshoot_pct: {}", fmt_sig6(m.overshoot_pct))?;
    writeln!(out, "settling_time_ms: {}", fmt_opt_sig6(m.settling_time_ms.map(|t| t as f64)))?;
    writeln!(out, "steady_state_error_deg: {}", fmt_sig6(m.steady_state_error_deg))
}

fn cmd_sim(a: SimArgs) -> CmdResult {
    let config = load_config(&a.config)?;
    let gains = GainVector::new(a.kp, a.ki, a.kd);
    config.bounds.check(&gains)?;
    let registry = config.registry();
    let setup = registry.get(&a.robot).ok_or_else(|| Error::UnknownRobot(a.robot.to_string()))?;
    let trace = run_experiment(&gains, &setup.plant, &setup.experiment, a.seed)?;
    let eval = evaluate(&trace, &config.constraints, config.objective_threshold_ms)?;

    ensure_dir(&a.output_dir)?;
    let path = a.output_dir.join(format!("trace_{}.csv", a.robot));
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::from(Error::Csv(e));
    w.write_record(["t_ms", "theta_deg", "command"]).map_err(csv_err)?;
    for (i, theta) in trace.samples().iter().enumerate() {
        let command = trace.commands().get(i).map(|u| fmt_sig6(*u)).unwrap_or_default();
        w.write_record([(i as u64 * trace.dt_ms()).to_string(), fmt_sig6(*theta), command]).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    std::fs::write(&path, bytes).map_err(|e| Error::Io { path: path.clone(), source: e })?;

    let mut out = std::io::stdout().lock();
    let io = |e: std::io::Error| Failure::Io(e.to_string());
    print_metrics(&eval.metrics, &mut out).map_err(io)?;
    writeln!(out, "accepted: {}", eval.accepted).map_err(io)?;
    writeln!(out, "converged: {}", eval.converged).map_err(io)?;
    writeln!(out, "fitness: {}", fmt_sig6(eval.fitness)).map_err(io)?;
    Ok(())
}

fn series_color(o: OptimizerKind) -> &'static str {
    match o {
        OptimizerKind::Bo => "#1f77b4",
        OptimizerKind::De => "#d62728",
    }
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    let results = report::read_results_json(&a.results).map_err(|e| match e {
        Error::Json { .. } => Failure::Usage(e.to_string()),
        other => other.into(),
    })?;
    ensure_dir(&a.output_dir)?;
    let rows = summarize(&results);
    for r in rows.iter().filter(|r| r.converged == 0) {
        eprintln!(
            "warning: no converged runs for robot={} eec={} init={} optimizer={}",
            r.robot, r.eec, r.initial_state, r.optimizer
        );
    }
    report::write_summary_csv(&a.output_dir.join("summary.csv"), &rows)?;

    let bandwidth = match a.bandwidth {
        Some(h) => Bandwidth::Fixed(h),
        None => Bandwidth::Auto,
    };
    let mut groups: BTreeMap<(RobotKind, u32), BTreeMap<OptimizerKind, Vec<&TrialResult>>> = BTreeMap::new();
    for r in &results {
        groups.entry((r.config.robot, r.config.eec.id)).or_default().entry(r.config.optimizer).or_default().push(r);
    }
    for ((robot, eec), by_optimizer) in &groups {
        let mut curves: Vec<(OptimizerKind, KdeCurve)> = Vec::new();
        for (&optimizer, runs) in by_optimizer {
            let samples = accepted_settling_times(runs.iter().copied());
            match kde(&samples, bandwidth) {
                Ok(c) => curves.push((optimizer, c)),
                Err(e) => eprintln!("warning: no density for robot={robot} eec={eec} optimizer={optimizer}: {e}"),
            }
        }
        let labels: Vec<String> = curves.iter().map(|(o, _)| o.as_str().to_uppercase()).collect();
        let series: Vec<KdeSeries<'_>> = curves
            .iter()
            .zip(&labels)
            .map(|((o, c), label)| KdeSeries { label, color: series_color(*o), curve: c })
            .collect();
        let svg = render_kde_svg(
            &format!("Settling-time distributions (KDE): {robot}, EEC {eec}"),
            "settling time (ms)",
            &series,
        );
        report::write_text(&a.output_dir.join(format!("kde_{robot}_eec{eec}.svg")), &svg)?;
    }

    for (optimizer, pct) in convergence_by_optimizer(&rows) {
        println!("{optimizer}: average convergence {}%", fmt_sig6(pct));
    }
    Ok(())
}
