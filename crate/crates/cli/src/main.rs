//! `sgsim` command-line interface.
//!
//! Settings are taken, lowest precedence first, from built-in defaults, the
//! `--config` document, then command-line flags. The output directory falls
//! back to `$SGSIM_OUT_DIR` and then `./sgsim-out` when neither the flag nor
//! the document sets it.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use sgsim_core::analytic::RotationAngle;
use sgsim_core::cqm::d2_fraction_surface;
use sgsim_core::harness::Workers;
use sgsim_core::io::{
    evaluate, figure_rows, write_divergence_csv, write_figure_csv, write_report_json, write_results_csv,
    write_surface_csv, Angle, DistParams, Figure, Method, Preamble, Report, RunConfigFile, RunPlan,
};
use sgsim_core::sp::{Budget, BudgetMode};
use sgsim_core::Error;

const OUT_DIR_ENV: &str = "SGSIM_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "sgsim-out";

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "sgsim", version, about = "Simulate interrupted spin measurements and compare two models of them")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the configured cell (or sweep) and write results.csv and report.json.
    Run(RunArgs),
    /// Run the `[sweep]` grid of the configuration.
    Sweep(RunArgs),
    /// Run the grid and write divergence.csv and fig9_surface.csv.
    Compare(CompareArgs),
    /// Write plot data for one of the distribution figures.
    Dist(DistArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Ticks,
    Moves,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Exact,
    Gaussian,
    Montecarlo,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::Gaussian => Method::Gaussian,
            MethodArg::Montecarlo => Method::MonteCarlo,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FigureArg {
    Fig2,
    Fig3,
    Fig6,
    Fig8,
}

impl From<FigureArg> for Figure {
    fn from(f: FigureArg) -> Self {
        match f {
            FigureArg::Fig2 => Figure::Fig2,
            FigureArg::Fig3 => Figure::Fig3,
            FigureArg::Fig6 => Figure::Fig6,
            FigureArg::Fig8 => Figure::Fig8,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML configuration (JSON when the extension is .json).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Targets per cell.
    #[arg(long, value_name = "M")]
    trajectories: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Lattice size N = 1/ε.
    #[arg(long)]
    lattice: Option<u64>,
    /// Initial +z intensity A0.
    #[arg(long, conflicts_with = "theta0")]
    a0: Option<f64>,
    /// Initial polar angle, e.g. 90deg.
    #[arg(long)]
    theta0: Option<Angle>,
    /// Absorbance of D1 for spin-up targets.
    #[arg(long = "absorbance", short = 'f')]
    absorbance: Option<f64>,
    /// Interactions inside D1: an integer or "unlimited".
    #[arg(long)]
    n_budget: Option<Budget>,
    /// Rotation of D2, e.g. 90deg or 1.5708rad.
    #[arg(long)]
    phi: Option<Angle>,
    /// Record wall-clock runtime in report.json (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Absorbance for the (A0, phi, F) surface; defaults to the device value.
    #[arg(long, value_name = "F")]
    surface_f: Option<f64>,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[arg(value_enum)]
    figure: FigureArg,
    #[arg(long)]
    lattice: Option<u64>,
    #[arg(long)]
    a0: Option<f64>,
    /// Spread ε√n of the walk.
    #[arg(long)]
    sigma: Option<f64>,
    /// Rotation for fig8, e.g. 45deg.
    #[arg(long)]
    phi: Option<Angle>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Grid points for densities and curves.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_name = "M")]
    trajectories: Option<u64>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn config(e: Error) -> Self {
        Failure::new(EXIT_CONFIG, e.to_string())
    }

    fn usage(e: Error) -> Self {
        Failure::new(EXIT_USAGE, e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_FAILURE,
            Error::Config(_) | Error::OutOfRange { .. } => EXIT_CONFIG,
            _ => EXIT_NUMERIC,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_FAILURE, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match cli.command {
        Command::Run(args) => run("run", &args, false, None),
        Command::Sweep(args) => run("sweep", &args, true, None),
        Command::Compare(args) => run("compare", &args.run, false, Some(args.surface_f)),
        Command::Dist(args) => dist(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sgsim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_plan(args: &RunArgs) -> Result<RunPlan, Failure> {
    let mut doc = match &args.config {
        Some(path) => RunConfigFile::load(path).map_err(Failure::config)?,
        None => RunConfigFile::default(),
    };
    let d = &mut doc.device;
    if args.a0.is_some() {
        d.a0 = args.a0;
        d.theta0 = None;
    }
    if args.theta0.is_some() {
        d.theta0 = args.theta0;
        d.a0 = None;
    }
    override_with(&mut d.lattice, args.lattice);
    override_with(&mut d.f, args.absorbance);
    override_with(&mut d.n_budget, args.n_budget);
    override_with(&mut d.phi, args.phi);
    override_with(
        &mut d.mode,
        args.mode.map(|m| match m {
            ModeArg::Ticks => BudgetMode::Ticks,
            ModeArg::Moves => BudgetMode::Moves,
        }),
    );
    override_with(&mut doc.seed, args.seed);
    override_with(&mut doc.trajectories, args.trajectories);
    override_with(&mut doc.method, args.method.map(Method::from));
    override_with(&mut doc.workers, args.workers);
    doc.resolve().map_err(Failure::config)
}

fn override_with<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn out_dir(flag: Option<&Path>, from_config: Option<&Path>) -> PathBuf {
    flag.or(from_config)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
    info!("writing {}", path.display());
    Ok(BufWriter::new(file))
}

fn run(command: &str, args: &RunArgs, require_sweep: bool, surface: Option<Option<f64>>) -> Result<(), Failure> {
    let plan = load_plan(args)?;
    if require_sweep && !plan.is_sweep {
        return Err(Failure::new(EXIT_CONFIG, "`sweep` needs a [sweep] table in the configuration"));
    }
    let dir = out_dir(args.out.as_deref(), plan.out_dir.as_deref());
    fs::create_dir_all(&dir).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", dir.display())))?;

    let started = Instant::now();
    let cells = evaluate(&plan)?;
    let elapsed = started.elapsed().as_secs_f64();
    info!("{} cell(s) in {elapsed:.2} s", cells.len());
    let mut report = Report::new(command, &plan, cells);
    if args.timing {
        report.runtime_seconds = Some(elapsed);
    }

    write_report_json(create(&dir, "report.json")?, &report)?;
    match surface {
        None => write_results_csv(create(&dir, "results.csv")?, &report)?,
        Some(surface_f) => {
            write_divergence_csv(create(&dir, "divergence.csv")?, &report)?;
            let f = surface_f.unwrap_or(plan.device.absorbance);
            let rows = d2_fraction_surface(f).map_err(Failure::config)?;
            let preamble = report.preamble().with("surface_f", f);
            write_surface_csv(create(&dir, "fig9_surface.csv")?, &preamble, &rows)?;
        }
    }

    for cell in &report.cells {
        if let sgsim_core::io::CellResult::Failed { error } = &cell.result {
            eprintln!("sgsim: cell {} failed: {error}", cell.cell);
        }
    }
    if report.all_failed() {
        return Err(Failure::new(EXIT_NUMERIC, "every cell failed"));
    }
    Ok(())
}

fn dist(args: &DistArgs) -> Result<(), Failure> {
    let figure = Figure::from(args.figure);
    let mut p = DistParams::defaults_for(figure);
    override_with_value(&mut p.lattice, args.lattice);
    override_with_value(&mut p.a0, args.a0);
    override_with_value(&mut p.sigma, args.sigma);
    override_with_value(&mut p.phi, args.phi.map(Angle::radians));
    override_with_value(&mut p.method, args.method.map(Method::from));
    override_with_value(&mut p.points, args.points);
    override_with_value(&mut p.trajectories, args.trajectories);
    override_with_value(&mut p.seed, args.seed);
    if let Some(n) = args.workers {
        p.workers = if n == 0 { Workers::Global } else { Workers::Fixed(n) };
    }
    if p.trajectories == 0 {
        return Err(Failure::new(EXIT_USAGE, "--trajectories must be at least 1"));
    }
    RotationAngle::new(p.phi).map_err(Failure::usage)?;

    let rows = figure_rows(figure, &p).map_err(|e| match e {
        Error::Config(_) | Error::OutOfRange { .. } | Error::Validity(_) => Failure::usage(e),
        other => Failure::from(other),
    })?;
    let dir = out_dir(args.out.as_deref(), None);
    fs::create_dir_all(&dir).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", dir.display())))?;
    let preamble = Preamble::new(&format!("dist {figure}"), p.seed, &p);
    write_figure_csv(create(&dir, &format!("{figure}.csv"))?, &preamble, &rows)?;
    Ok(())
}

fn override_with_value<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
