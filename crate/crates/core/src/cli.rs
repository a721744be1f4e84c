//! The `imog` command line: `run`, `sweep`, `check`, `list-problems` and
//! `min-norm`.
//!
//! Exit codes: 0 success (criticality stop, all sweep runs converged, damping
//! hypothesis satisfied), 1 configuration or input error, 2 max_steps stop or
//! violated damping hypothesis, 3 divergence, 4 missing Lipschitz bound.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::diagnostics::{analyze, distance_to_pareto, hp_report, DiagnosticsError};
use crate::dynamics::{default_initial_velocity, integrate, DynState, StopReason, Trajectory};
use crate::minnorm::{min_norm_point, GradientBundle, DEFAULT_TOL};
use crate::objectives::{steepest_descent, BuiltinProblem, VectorObjective};
use crate::trajio::{
    emit_plot_script, parse_run_config, parse_run_template, parse_sweep_config, read_json,
    run_seed, sample_initial_point, write_sweep_index, write_sweep_summary, write_trajectory_csv,
    FieldSample, PlotKind, PlotSource, RunConfig, RunSummary, SampleBox, SweepConfig, SweepIndex,
    SweepIndexEntry, TrajioError, VelocitySpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_STEPS: i32 = 2;
pub const EXIT_HP_VIOLATED: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_MISSING_LIPSCHITZ: i32 = 4;

const DEFAULT_BOX: (f64, f64) = (-4.0, 4.0);
const FIELD_GRID: usize = 15;

#[derive(Debug, Parser)]
#[command(
    name = "imog",
    version,
    about = "Inertial multi-objective gradient dynamics"
)]
pub struct Cli {
    /// More output; repeat for more.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory.
    Run(RunArgs),
    /// Integrate many trajectories from seeded random starts.
    Sweep(SweepArgs),
    /// Check the damping hypothesis and gradients without integrating.
    Check(RunArgs),
    /// List builtin problems.
    ListProblems,
    /// Minimum-norm point of the convex hull of some vectors.
    MinNorm(MinNormArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Builtin problem name or problem file.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Initial position, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<String>,
    /// Initial velocity, comma separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "lambda")]
    pub v0: Option<String>,
    /// Initial velocity lambda * s(u0), with lambda in [0, 1/gamma].
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub crit_tol: Option<f64>,
    #[arg(long)]
    pub vel_tol: Option<f64>,
    /// imog or mog.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write a gnuplot script: trajectory2d, values, energies or pareto_cloud.
    #[arg(long)]
    pub plot: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Number of runs.
    #[arg(long)]
    pub runs: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub parallelism: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct MinNormArgs {
    /// Vectors such as "(1,0)" or "1,0".
    #[arg(allow_hyphen_values = true)]
    pub vectors: Vec<String>,
    /// File with one vector per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

/// Parses arguments and runs the command, returning the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let v = cli.verbose;
    match cli.command {
        Command::Run(args) => match resolve_run_config(&args) {
            Ok(cfg) => cmd_run(&cfg, &args.out, v),
            Err(e) => fail(e),
        },
        Command::Sweep(args) => match resolve_sweep_config(&args) {
            Ok(cfg) => cmd_sweep(&cfg, &args.run.out, v),
            Err(e) => fail(e),
        },
        Command::Check(args) => match resolve_check_config(&args) {
            Ok(cfg) => cmd_check(&cfg, v),
            Err(e) => fail(e),
        },
        Command::ListProblems => cmd_list_problems(),
        Command::MinNorm(args) => cmd_min_norm(&args.vectors, args.file.as_deref()),
    }
}

fn fail(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    EXIT_ERROR
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, String> {
    let text = text.replace('\u{2212}', "-");
    let inner = text
        .trim()
        .trim_start_matches(['(', '['])
        .trim_end_matches([')', ']']);
    let parts: Vec<&str> = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(format!("{flag}: empty list"));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("{flag}: '{p}' is not a number"))
        })
        .collect()
}

fn set(root: &mut Value, path: &[&str], value: Value) {
    let mut cur = root;
    for key in &path[..path.len() - 1] {
        if !cur.get(*key).is_some_and(Value::is_object) {
            cur[*key] = Value::Object(Map::new());
        }
        cur = &mut cur[*key];
    }
    cur[path[path.len() - 1]] = value;
}

/// Writes the flag values into a configuration document.
fn apply_flags(value: &mut Value, args: &RunArgs) -> Result<(), String> {
    if !value.is_object() {
        return Ok(());
    }
    if let Some(p) = &args.problem {
        set(value, &["problem"], json!(p));
    }
    for (key, flag) in [("m", args.m), ("gamma", args.gamma), ("h", args.h)] {
        if let Some(x) = flag {
            set(value, &["params", key], json!(x));
        }
    }
    if let Some(u0) = &args.u0 {
        set(value, &["initial", "u0"], json!(parse_list("--u0", u0)?));
    }
    if let Some(v0) = &args.v0 {
        set(value, &["initial", "v0"], json!(parse_list("--v0", v0)?));
    }
    if let Some(l) = args.lambda {
        set(value, &["initial", "v0"], json!({ "lambda": l }));
    }
    if let Some(n) = args.max_steps {
        set(value, &["stop", "max_steps"], json!(n));
    }
    if let Some(x) = args.crit_tol {
        set(value, &["stop", "crit_tol"], json!(x));
    }
    if let Some(x) = args.vel_tol {
        set(value, &["stop", "vel_tol"], json!(x));
    }
    if let Some(s) = &args.scheme {
        set(value, &["scheme"], json!(s));
    }
    if let Some(s) = args.seed {
        set(value, &["seed"], json!(s));
    }
    if let Some(kind) = &args.plot {
        set(value, &["outputs", "plot_kind"], json!(kind));
        if value.pointer("/outputs/plot").is_none() {
            set(value, &["outputs", "plot"], json!("plot.gp"));
        }
    }
    Ok(())
}

fn config_document(args: &RunArgs) -> Result<Value, String> {
    match &args.config {
        Some(path) => read_json(path).map_err(|e| e.to_string()),
        None => Ok(Value::Object(Map::new())),
    }
}

/// Problem paths in a config file resolve next to it, unless `--problem`
/// replaced them.
fn base_dir(args: &RunArgs) -> Option<PathBuf> {
    match (&args.config, &args.problem) {
        (Some(path), None) => path.parent().map(Path::to_path_buf),
        _ => None,
    }
}

fn resolve_with(
    args: &RunArgs,
    parse: fn(&Value) -> Result<RunConfig, TrajioError>,
) -> Result<RunConfig, String> {
    let mut doc = config_document(args)?;
    apply_flags(&mut doc, args)?;
    let mut cfg = parse(&doc).map_err(|e| e.to_string())?;
    cfg.base_dir = base_dir(args);
    Ok(cfg)
}

pub fn resolve_run_config(args: &RunArgs) -> Result<RunConfig, String> {
    resolve_with(args, parse_run_config)
}

/// `check` needs no starting point.
pub fn resolve_check_config(args: &RunArgs) -> Result<RunConfig, String> {
    resolve_with(args, parse_run_template)
}

/// Accepts either a sweep document or a plain run document used as template.
pub fn resolve_sweep_config(args: &SweepArgs) -> Result<SweepConfig, String> {
    let doc = config_document(&args.run)?;
    let mut doc = if doc.get("template").is_some() {
        doc
    } else {
        json!({ "template": doc })
    };
    apply_flags(&mut doc["template"], &args.run)?;
    if let Some(n) = args.runs {
        doc["n_runs"] = json!(n);
    }
    if let Some(n) = args.parallelism {
        doc["parallelism"] = json!(n);
    }
    let mut cfg = parse_sweep_config(&doc).map_err(|e| e.to_string())?;
    cfg.template.base_dir = base_dir(&args.run);
    Ok(cfg)
}

fn initial_velocity(
    obj: &VectorObjective,
    u0: &[f64],
    spec: &VelocitySpec,
    gamma: f64,
) -> Result<Vec<f64>, String> {
    match spec {
        VelocitySpec::Zero => Ok(vec![0.0; u0.len()]),
        VelocitySpec::Explicit(v) if v.len() != u0.len() => Err(format!(
            "initial velocity has {} entries, problem dimension is {}",
            v.len(),
            u0.len()
        )),
        VelocitySpec::Explicit(v) => Ok(v.clone()),
        VelocitySpec::Lambda(l) => {
            default_initial_velocity(obj, u0, *l, gamma).map_err(|e| e.to_string())
        }
    }
}

fn exit_for(reason: StopReason) -> i32 {
    match reason {
        StopReason::Criticality => EXIT_OK,
        StopReason::MaxSteps => EXIT_MAX_STEPS,
        StopReason::Divergence => EXIT_DIVERGENCE,
    }
}

fn pareto_oracle(problem: &str) -> Option<impl Fn(&[f64]) -> f64 + '_> {
    problem
        .parse::<BuiltinProblem>()
        .ok()
        .map(move |_| move |u: &[f64]| distance_to_pareto(problem, u).unwrap_or(f64::NAN))
}

fn fmt_vec(v: &[f64]) -> String {
    // adding zero turns -0 into 0
    let parts: Vec<String> = v.iter().map(|x| format!("{}", x + 0.0)).collect();
    format!("({})", parts.join(", "))
}

fn create_dir(path: &Path) -> Result<(), String> {
    std::fs::create_dir_all(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn create_parent(path: &Path) -> Result<(), String> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

/// Steepest-descent arrows on a grid over the trajectory's bounding box.
fn vector_field(obj: &VectorObjective, t: &Trajectory) -> Vec<FieldSample> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for s in &t.states {
        for k in 0..2 {
            lo[k] = lo[k].min(s.u[k]);
            hi[k] = hi[k].max(s.u[k]);
        }
    }
    for k in 0..2 {
        let pad = 0.1 * (hi[k] - lo[k]).max(1.0);
        lo[k] -= pad;
        hi[k] += pad;
    }
    let cell = [
        (hi[0] - lo[0]) / (FIELD_GRID - 1) as f64,
        (hi[1] - lo[1]) / (FIELD_GRID - 1) as f64,
    ];
    let mut samples = Vec::new();
    for i in 0..FIELD_GRID {
        for j in 0..FIELD_GRID {
            let p = [lo[0] + i as f64 * cell[0], lo[1] + j as f64 * cell[1]];
            if let Ok(s) = steepest_descent(obj, &p, DEFAULT_TOL) {
                samples.push((p, [s.direction[0], s.direction[1]]));
            }
        }
    }
    let longest = samples
        .iter()
        .map(|(_, d)| d[0].hypot(d[1]))
        .fold(0.0, f64::max);
    let scale = if longest > 0.0 {
        0.8 * cell[0].min(cell[1]) / longest
    } else {
        0.0
    };
    samples
        .into_iter()
        .map(|(point, d)| FieldSample {
            point,
            direction: [d[0] * scale, d[1] * scale],
        })
        .collect()
}

fn run_plot_kind(cfg: &RunConfig, dim: usize) -> Result<Option<PlotKind>, String> {
    if cfg.outputs.plot.is_none() {
        return Ok(None);
    }
    let kind = cfg.outputs.plot_kind.unwrap_or(if dim == 2 {
        PlotKind::Trajectory2d
    } else {
        PlotKind::Values
    });
    match kind {
        PlotKind::ParetoCloud => Err("pareto_cloud plots need a sweep".into()),
        PlotKind::Trajectory2d if dim != 2 => Err(format!(
            "trajectory2d plots need a two-dimensional problem, got dimension {dim}"
        )),
        k => Ok(Some(k)),
    }
}

pub fn cmd_run(cfg: &RunConfig, out: &Path, verbose: u8) -> i32 {
    match run_inner(cfg, out, verbose) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

fn run_inner(cfg: &RunConfig, out: &Path, verbose: u8) -> Result<i32, String> {
    let obj = cfg.load_problem().map_err(|e| e.to_string())?;
    let u0 = cfg.initial.u0.clone().ok_or("initial.u0: missing")?;
    obj.check_point(&u0)
        .map_err(|e| format!("initial.u0: {e}"))?;
    let v0 = initial_velocity(&obj, &u0, &cfg.initial.v0, cfg.params.damping)?;
    let plot_kind = run_plot_kind(cfg, obj.dim())?;

    let trajectory = integrate(
        &obj,
        &cfg.params,
        &DynState::new(cfg.params.t0, u0, v0),
        &cfg.stop,
        cfg.scheme,
    )
    .map_err(|e| e.to_string())?;
    let oracle = pareto_oracle(&cfg.problem);
    let report = analyze(
        &trajectory,
        &obj,
        oracle.as_ref().map(|f| f as &dyn Fn(&[f64]) -> f64),
    )
    .map_err(|e| e.to_string())?;

    create_dir(out)?;
    let csv_path = out.join(&cfg.outputs.csv);
    create_parent(&csv_path)?;
    write_trajectory_csv(&trajectory, &csv_path).map_err(|e| e.to_string())?;

    let last = trajectory.last_state();
    let doc = json!({
        "config": cfg.to_value(),
        "problem": {"dim": obj.dim(), "objectives": obj.labels()},
        "terminal": {
            "t": last.t,
            "u": last.u,
            "v": last.v,
            "values": trajectory.last_diagnostics().values,
        },
        "report": report,
    });
    let report_path = out.join(&cfg.outputs.report);
    create_parent(&report_path)?;
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
    text.push('\n');
    std::fs::write(&report_path, text).map_err(|e| format!("{}: {e}", report_path.display()))?;

    if let (Some(kind), Some(plot)) = (plot_kind, &cfg.outputs.plot) {
        let plot_path = out.join(plot);
        create_parent(&plot_path)?;
        let csv_rel = relative_to(&cfg.outputs.csv, plot);
        let field = (kind == PlotKind::Trajectory2d).then(|| vector_field(&obj, &trajectory));
        emit_plot_script(
            &PlotSource::Trajectory {
                csv: &csv_rel,
                dim: obj.dim(),
                count: obj.count(),
                rows: trajectory.states.len(),
                field: field.as_deref(),
            },
            &plot_path,
            kind,
        )
        .map_err(|e| e.to_string())?;
    }

    println!(
        "stop: {} after {} steps at t = {}",
        trajectory.stop_reason.name(),
        trajectory.steps(),
        last.t
    );
    println!("u = {}", fmt_vec(&last.u));
    println!(
        "|s(u)| = {:e}, |v| = {:e}",
        report.terminal_snorm, report.terminal_vnorm
    );
    if let Some(d) = report.pareto_distance {
        println!("distance to Pareto set = {d:e}");
    }
    if verbose > 0 {
        println!(
            "energy increase per objective = {:?}",
            report.energy_cumulative_increase
        );
        println!("envelope violation = {:e}", report.envelope_violation);
        println!(
            "damping hypothesis satisfied = {}",
            report.dissipation_expected
        );
        println!("wrote {}", csv_path.display());
    }
    Ok(exit_for(trajectory.stop_reason))
}

/// `target` as seen from the directory containing `from`; both are relative
/// to the same output directory.
fn relative_to(target: &Path, from: &Path) -> String {
    let depth = from.parent().map_or(0, |p| p.components().count());
    let mut rel = PathBuf::new();
    for _ in 0..depth {
        rel.push("..");
    }
    rel.push(target);
    rel.to_string_lossy().replace('\\', "/")
}

struct SweepRun {
    summary: RunSummary,
    csv: String,
}

pub fn cmd_sweep(cfg: &SweepConfig, out: &Path, verbose: u8) -> i32 {
    match sweep_inner(cfg, out, verbose) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

fn sweep_inner(cfg: &SweepConfig, out: &Path, verbose: u8) -> Result<i32, String> {
    let t = &cfg.template;
    let obj = t.load_problem().map_err(|e| e.to_string())?;
    let d = obj.dim();
    let sample_box = cfg
        .sample_box
        .clone()
        .unwrap_or_else(|| SampleBox::cube(d, DEFAULT_BOX.0, DEFAULT_BOX.1));
    if sample_box.dim() != d {
        return Err(format!(
            "box: has dimension {}, problem dimension is {d}",
            sample_box.dim()
        ));
    }
    let velocity = cfg.velocity.clone().unwrap_or_else(|| t.initial.v0.clone());
    if let VelocitySpec::Explicit(v) = &velocity {
        if v.len() != d {
            return Err(format!(
                "initial.v0: has {} entries, problem dimension is {d}",
                v.len()
            ));
        }
    }
    let plot_kind = match (&t.outputs.plot, t.outputs.plot_kind) {
        (None, _) => None,
        (Some(_), Some(k @ (PlotKind::Values | PlotKind::Energies))) => {
            return Err(format!("{} plots need a single trajectory", k.name()))
        }
        (Some(_), k) => {
            if d != 2 {
                return Err(format!(
                    "sweep plots need a two-dimensional problem, got dimension {d}"
                ));
            }
            Some(k.unwrap_or(PlotKind::ParetoCloud))
        }
    };

    create_dir(&out.join("runs"))?;
    let oracle = pareto_oracle(&t.problem);
    let one = |run: usize| -> Result<SweepRun, String> {
        let seed = run_seed(t.seed, run);
        let u0 = sample_initial_point(&sample_box, t.seed, run);
        let v0 = initial_velocity(&obj, &u0, &velocity, t.params.damping)?;
        let traj = integrate(
            &obj,
            &t.params,
            &DynState::new(t.params.t0, u0, v0),
            &t.stop,
            t.scheme,
        )
        .map_err(|e| e.to_string())?;
        let csv = format!("runs/run_{run:04}.csv");
        write_trajectory_csv(&traj, &out.join(&csv)).map_err(|e| e.to_string())?;
        let last = traj.last_state();
        let diag = traj.last_diagnostics();
        Ok(SweepRun {
            summary: RunSummary {
                run,
                seed,
                u: last.u.clone(),
                values: diag.values.clone(),
                snorm: diag.snorm,
                stop_reason: traj.stop_reason,
                pareto_distance: oracle.as_ref().map(|f| f(&last.u)),
            },
            csv,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| e.to_string())?;
    let outcomes: Vec<Result<SweepRun, String>> =
        pool.install(|| (0..cfg.n_runs).into_par_iter().map(one).collect());

    let mut runs = Vec::new();
    let mut failures = 0;
    for (run, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => {
                if verbose > 0 {
                    eprintln!(
                        "run {run}: {} at {}",
                        r.summary.stop_reason.name(),
                        fmt_vec(&r.summary.u)
                    );
                }
                runs.push(r);
            }
            Err(e) => {
                failures += 1;
                eprintln!("error: run {run}: {e}");
            }
        }
    }
    if runs.is_empty() {
        return Ok(EXIT_ERROR);
    }

    let summaries: Vec<RunSummary> = runs.iter().map(|r| r.summary.clone()).collect();
    let nondominated_count = write_sweep_summary(
        &summaries,
        &out.join("summary.csv"),
        &out.join("nondominated.csv"),
    )
    .map_err(|e| e.to_string())?;
    let index = SweepIndex {
        problem: t.problem.clone(),
        n_runs: cfg.n_runs,
        base_seed: t.seed,
        sample_box,
        summary: "summary.csv".into(),
        nondominated: "nondominated.csv".into(),
        nondominated_count,
        runs: runs
            .iter()
            .map(|r| SweepIndexEntry {
                run: r.summary.run,
                seed: r.summary.seed,
                csv: r.csv.clone(),
                stop_reason: r.summary.stop_reason,
            })
            .collect(),
    };
    write_sweep_index(&index, &out.join("index.json")).map_err(|e| e.to_string())?;

    if let (Some(kind), Some(plot)) = (plot_kind, &t.outputs.plot) {
        let plot_path = out.join(plot);
        create_parent(&plot_path)?;
        let run_csvs: Vec<String> = runs
            .iter()
            .map(|r| relative_to(Path::new(&r.csv), plot))
            .collect();
        let summary_rel = relative_to(Path::new("summary.csv"), plot);
        let nd_rel = relative_to(Path::new("nondominated.csv"), plot);
        emit_plot_script(
            &PlotSource::Sweep {
                summary_csv: &summary_rel,
                nondominated_csv: &nd_rel,
                run_csvs: &run_csvs,
                dim: d,
                count: obj.count(),
            },
            &plot_path,
            kind,
        )
        .map_err(|e| e.to_string())?;
    }

    let count = |r: StopReason| summaries.iter().filter(|s| s.stop_reason == r).count();
    let (conv, maxed, div) = (
        count(StopReason::Criticality),
        count(StopReason::MaxSteps),
        count(StopReason::Divergence),
    );
    println!(
        "{} runs: {conv} criticality, {maxed} max_steps, {div} divergence, {failures} failed; {nondominated_count} non-dominated",
        cfg.n_runs
    );
    if let Some(worst) = summaries
        .iter()
        .filter_map(|s| s.pareto_distance)
        .reduce(f64::max)
    {
        println!("max distance to Pareto set = {worst:e}");
    }
    Ok(if failures > 0 {
        EXIT_ERROR
    } else if div > 0 {
        EXIT_DIVERGENCE
    } else if maxed > 0 {
        EXIT_MAX_STEPS
    } else {
        EXIT_OK
    })
}

pub fn cmd_check(cfg: &RunConfig, verbose: u8) -> i32 {
    let obj = match cfg.load_problem() {
        Ok(obj) => obj,
        Err(e) => return fail(e),
    };
    let p = &cfg.params;
    println!(
        "problem {}: dimension {}, {} objectives",
        cfg.problem,
        obj.dim(),
        obj.count()
    );
    println!("m = {}, gamma = {}, h = {}", p.mass, p.damping, p.step);
    println!("admissible lambda interval: [0, {}]", p.lambda_max());

    let checks = obj.gradient_checks();
    if !checks.is_empty() {
        println!("gradient checks:");
        for c in checks {
            println!(
                "  {}: {} ({} points, max relative error {:e})",
                c.label,
                if c.passed { "ok" } else { "FAILED" },
                c.points_checked,
                c.max_rel_error
            );
        }
    }
    if verbose > 0 {
        for c in obj.components() {
            println!("  {}: gradient {:?}", c.label, c.gradient_source);
        }
    }

    match hp_report(&obj, p, None) {
        Ok(report) => {
            println!("damping hypothesis gamma^2 > m L_i:");
            for e in &report.entries {
                println!(
                    "  {}: L = {}, margin = {}, {}",
                    e.label,
                    e.lipschitz,
                    e.margin,
                    if e.satisfied { "satisfied" } else { "violated" }
                );
            }
            if report.all_satisfied() {
                EXIT_OK
            } else {
                EXIT_HP_VIOLATED
            }
        }
        Err(e @ DiagnosticsError::MissingLipschitz { .. }) => {
            eprintln!("error: {e}");
            eprintln!(
                "add a \"lipschitz\" field to each objective in the problem file, or use `imog run` to estimate the constants along a trajectory"
            );
            EXIT_MISSING_LIPSCHITZ
        }
        Err(e) => fail(e),
    }
}

pub fn cmd_list_problems() -> i32 {
    for p in BuiltinProblem::ALL {
        let obj = p.objective();
        let lips: Vec<String> = obj
            .lipschitz_bounds()
            .iter()
            .map(|l| l.map_or("?".into(), |l| l.to_string()))
            .collect();
        println!(
            "{:<17} dim {}  objectives {}  L ({})  Pareto set {}",
            p.name(),
            obj.dim(),
            obj.count(),
            lips.join(", "),
            p.pareto_set()
        );
        println!("{:<17} {}", "", p.formula());
    }
    println!(
        "{:<17} dim d  objectives q  L_i = |A_i|_2  Pareto set depends on the data",
        "convex_quadratic"
    );
    println!(
        "{:<17} f_i(u) = 1/2 (u - c_i)^T A_i (u - c_i), library only",
        ""
    );
    EXIT_OK
}

fn read_vector_file(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub fn cmd_min_norm(vectors: &[String], file: Option<&Path>) -> i32 {
    let mut texts = vectors.to_vec();
    if let Some(path) = file {
        match read_vector_file(path) {
            Ok(mut lines) => texts.append(&mut lines),
            Err(e) => return fail(e),
        }
    }
    if texts.is_empty() {
        return fail("min-norm needs at least one vector");
    }
    let parsed: Result<Vec<Vec<f64>>, String> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| parse_list(&format!("vector {}", i + 1), t))
        .collect();
    let result = parsed
        .and_then(|v| GradientBundle::new(v).map_err(|e| e.to_string()))
        .and_then(|b| min_norm_point(&b, DEFAULT_TOL).map_err(|e| e.to_string()));
    match result {
        Ok(r) => {
            println!("point: {}", fmt_vec(&r.point));
            println!("weights: {}", fmt_vec(r.weights.as_slice()));
            println!("norm: {}", r.norm);
            EXIT_OK
        }
        Err(e) => fail(e),
    }
}
