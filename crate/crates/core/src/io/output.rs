//! Result tables and reports.
//!
//! Every CSV file opens with `#` comment lines carrying the tool version, the
//! seed and the canonical configuration document (as one line of JSON),
//! followed by a single header row.

use std::io::Write;

use serde::Serialize;

use super::config::{Method, RunConfigFile, RunPlan};
use crate::cqm::cqm_d2_fraction;
use crate::experiment::{sp_mean_prediction, ComparisonReport, DeviceConfig, PredictionMethod, SpPrediction};
use crate::harness::{run_sweep, CellOutcome};
use crate::Result;

pub const TOOL: &str = "sgsim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellResult {
    /// Monte Carlo ensemble.
    Completed { report: Box<ComparisonReport> },
    /// Analytic prediction, no simulation.
    Predicted {
        prediction: SpPrediction,
        cqm_d2_fraction: f64,
        divergence: f64,
    },
    Failed { error: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellRecord {
    pub cell: u64,
    pub config: DeviceConfig,
    #[serde(flatten)]
    pub result: CellResult,
}

impl CellRecord {
    pub fn is_failed(&self) -> bool {
        matches!(self.result, CellResult::Failed { .. })
    }

    /// SP estimate of the `D2` fraction with its interval, when available.
    fn sp_d2(&self) -> Option<(f64, Option<(f64, f64)>)> {
        match &self.result {
            CellResult::Completed { report } => {
                let s = report.sp_d2_fraction;
                Some((s.estimate, Some((s.lower, s.upper))))
            }
            CellResult::Predicted { prediction, .. } => Some((prediction.d2_fraction, None)),
            CellResult::Failed { .. } => None,
        }
    }

    fn cqm_d2(&self) -> Option<f64> {
        match &self.result {
            CellResult::Completed { report } => Some(report.cqm_d2_fraction),
            CellResult::Predicted { cqm_d2_fraction, .. } => Some(*cqm_d2_fraction),
            CellResult::Failed { .. } => cqm_d2_fraction(self.config.quantized_intensity(), self.config.absorbance, self.config.phi).ok(),
        }
    }
}

/// Evaluates every cell of `plan` with the plan's method.
pub fn evaluate(plan: &RunPlan) -> Result<Vec<CellRecord>> {
    let analytic = match plan.method {
        Method::MonteCarlo => {
            let rows = run_sweep(&plan.sweep, plan.workers)?;
            return Ok(rows
                .into_iter()
                .map(|row| CellRecord {
                    cell: row.cell,
                    config: row.config,
                    result: match row.outcome {
                        CellOutcome::Completed { report, .. } => CellResult::Completed { report },
                        CellOutcome::Failed { error } => CellResult::Failed { error },
                    },
                })
                .collect());
        }
        Method::Exact => PredictionMethod::Exact,
        Method::Gaussian => PredictionMethod::Gaussian,
    };
    let cells = plan.sweep.cells()?;
    Ok(cells
        .into_iter()
        .enumerate()
        .map(|(i, config)| {
            let predicted = sp_mean_prediction(&config, analytic).and_then(|prediction| {
                let cqm = cqm_d2_fraction(config.quantized_intensity(), config.absorbance, config.phi)?;
                Ok(CellResult::Predicted {
                    prediction,
                    cqm_d2_fraction: cqm,
                    divergence: prediction.d2_fraction - cqm,
                })
            });
            let result = predicted.unwrap_or_else(|e| {
                log::warn!("cell {i} has no {} prediction: {e}", plan.method);
                CellResult::Failed { error: e.to_string() }
            });
            CellRecord {
                cell: i as u64,
                config,
                result,
            }
        })
        .collect())
}

/// Structured report of one invocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub trajectories: u64,
    pub method: Method,
    /// Canonical configuration; feeding it back reproduces this report.
    pub config: RunConfigFile,
    pub completed: usize,
    pub failed: usize,
    pub cells: Vec<CellRecord>,
    /// Wall-clock seconds, only when timing was requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl Report {
    pub fn new(command: &str, plan: &RunPlan, cells: Vec<CellRecord>) -> Self {
        let failed = cells.iter().filter(|c| c.is_failed()).count();
        Report {
            tool: TOOL,
            version: VERSION,
            command: command.to_owned(),
            seed: plan.seed(),
            trajectories: plan.trajectories(),
            method: plan.method,
            config: plan.canonical(),
            completed: cells.len() - failed,
            failed,
            cells,
            runtime_seconds: None,
        }
    }

    pub fn all_failed(&self) -> bool {
        self.completed == 0
    }

    pub fn preamble(&self) -> Preamble {
        Preamble::new(&self.command, self.seed, &self.config)
    }
}

/// Comment header for CSV files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preamble(String);

impl Preamble {
    pub fn new(command: &str, seed: u64, config: &impl Serialize) -> Self {
        let json = serde_json::to_string(config).expect("configurations always serialize");
        Preamble(format!("# {TOOL} {VERSION} {command}\n# seed: {seed}\n# config: {json}\n"))
    }

    /// Adds a `# key: value` line.
    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.0.push_str(&format!("# {key}: {value}\n"));
        self
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Shortest round-trip decimal, in scientific notation for very small or
/// very large magnitudes.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn csv_writer<W: Write>(mut w: W, preamble: &Preamble) -> Result<csv::Writer<W>> {
    w.write_all(preamble.as_str().as_bytes())?;
    Ok(csv::Writer::from_writer(w))
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?
        .flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    std::io::Error::other(e.to_string()).into()
}

pub fn write_report_json<W: Write>(mut w: W, report: &Report) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, report).map_err(std::io::Error::other)?;
    w.write_all(b"\n")?;
    Ok(())
}

const RESULT_COLUMNS: [&str; 24] = [
    "cell",
    "lattice",
    "a0",
    "a0_quantized",
    "f",
    "n_budget",
    "mode",
    "phi",
    "trajectories",
    "status",
    "sp_d2_fraction",
    "sp_d2_lower",
    "sp_d2_upper",
    "cqm_d2_fraction",
    "divergence",
    "sp_d1_absorbed",
    "cqm_d1_absorbed",
    "endpoint_mass_s",
    "endpoint_mass_zero",
    "sp_total_spinup",
    "exit_mean_intensity",
    "exit_sd_intensity",
    "mean_moves",
    "error",
];

/// One row per cell.
pub fn write_results_csv<W: Write>(w: W, report: &Report) -> Result<()> {
    let mut out = csv_writer(w, &report.preamble())?;
    out.write_record(RESULT_COLUMNS).map_err(csv_err)?;
    for rec in &report.cells {
        let c = &rec.config;
        let mut row = vec![
            rec.cell.to_string(),
            c.lattice.to_string(),
            fmt_float(c.intensity()),
            fmt_float(c.quantized_intensity()),
            fmt_float(c.absorbance),
            c.effective_budget().to_string(),
            c.mode.to_string(),
            fmt_float(c.phi.radians()),
            report.trajectories.to_string(),
        ];
        let blank = |n: usize| std::iter::repeat_n(String::new(), n);
        match &rec.result {
            CellResult::Completed { report: r } => row.extend([
                "completed".into(),
                fmt_float(r.sp_d2_fraction.estimate),
                fmt_float(r.sp_d2_fraction.lower),
                fmt_float(r.sp_d2_fraction.upper),
                fmt_float(r.cqm_d2_fraction),
                fmt_float(r.divergence.estimate),
                fmt_float(r.sp_d1_absorbed.estimate),
                fmt_float(r.cqm_d1_absorbed),
                fmt_float(r.endpoint_mass_s.estimate),
                fmt_float(r.endpoint_mass_zero.estimate),
                fmt_float(r.sp_total_spinup.estimate),
                fmt_float(r.exit_mean_intensity.estimate),
                fmt_float(r.exit_sd_intensity),
                fmt_float(r.mean_moves),
                String::new(),
            ]),
            CellResult::Predicted {
                prediction,
                cqm_d2_fraction,
                divergence,
            } => {
                row.extend([
                    "predicted".into(),
                    fmt_float(prediction.d2_fraction),
                    String::new(),
                    String::new(),
                    fmt_float(*cqm_d2_fraction),
                    fmt_float(*divergence),
                ]);
                row.extend(blank(9));
            }
            CellResult::Failed { error } => {
                row.push("failed".into());
                row.extend(blank(13));
                row.push(error.clone());
            }
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    finish(out)
}

/// SP minus CQM per cell. `consistent` says whether the divergence interval
/// contains zero.
pub fn write_divergence_csv<W: Write>(w: W, report: &Report) -> Result<()> {
    let mut out = csv_writer(w, &report.preamble())?;
    out.write_record([
        "cell",
        "lattice",
        "a0",
        "f",
        "n_budget",
        "phi",
        "sp_d2_fraction",
        "sp_d2_lower",
        "sp_d2_upper",
        "cqm_d2_fraction",
        "divergence",
        "divergence_lower",
        "divergence_upper",
        "consistent",
    ])
    .map_err(csv_err)?;
    for rec in &report.cells {
        let c = &rec.config;
        let sp = rec.sp_d2();
        let cqm = rec.cqm_d2();
        let interval = sp.and_then(|s| s.1);
        let div = sp.zip(cqm).map(|(s, q)| s.0 - q);
        let div_interval = interval.zip(cqm).map(|((lo, hi), q)| (lo - q, hi - q));
        let consistent = div_interval.map_or(String::new(), |(lo, hi)| (lo <= 0.0 && 0.0 <= hi).to_string());
        out.write_record([
            rec.cell.to_string(),
            c.lattice.to_string(),
            fmt_float(c.intensity()),
            fmt_float(c.absorbance),
            c.effective_budget().to_string(),
            fmt_float(c.phi.radians()),
            opt(sp.map(|s| s.0)),
            opt(interval.map(|i| i.0)),
            opt(interval.map(|i| i.1)),
            opt(cqm),
            opt(div),
            opt(div_interval.map(|i| i.0)),
            opt(div_interval.map(|i| i.1)),
            consistent,
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}

/// The `(A0, φ, F)` surface at absorbance `f`.
pub fn write_surface_csv<W: Write>(w: W, preamble: &Preamble, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = csv_writer(w, preamble)?;
    out.write_record(["A0", "phi", "F"]).map_err(csv_err)?;
    for &(a0, phi, f) in rows {
        out.write_record([fmt_float(a0), fmt_float(phi), fmt_float(f)])
            .map_err(csv_err)?;
    }
    finish(out)
}

/// Labelled `(x, value)` rows of a figure.
pub fn write_figure_csv<W: Write>(w: W, preamble: &Preamble, rows: &[super::FigureRow]) -> Result<()> {
    let mut out = csv_writer(w, preamble)?;
    out.write_record(["kind", "x", "value"]).map_err(csv_err)?;
    for r in rows {
        out.write_record([r.kind.to_string(), fmt_float(r.x), fmt_float(r.value)])
            .map_err(csv_err)?;
    }
    finish(out)
}
