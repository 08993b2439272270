use serde::Serialize;

use super::{exec, Workers};
use crate::analytic::RotationAngle;
use crate::experiment::{ComparisonReport, Coupling, DeviceConfig, EnsembleResult, InitialSpin};
use crate::sp::{Budget, BudgetMode, DEFAULT_CEILING};
use crate::{Error, Result};

/// Cartesian grid of experiment cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub lattice: Vec<u64>,
    pub initial: Vec<InitialSpin>,
    pub absorbance: Vec<f64>,
    pub budget: Vec<Budget>,
    pub phi: Vec<RotationAngle>,
    /// Targets per cell.
    pub trajectories: u64,
    pub seed: u64,
    pub mode: BudgetMode,
    pub coupling: Option<Coupling>,
    pub ceiling: u64,
}

impl SweepSpec {
    /// A one-cell sweep over `config`.
    pub fn single(config: &DeviceConfig, trajectories: u64, seed: u64) -> Self {
        SweepSpec {
            lattice: vec![config.lattice],
            initial: vec![config.initial],
            absorbance: vec![config.absorbance],
            budget: vec![config.budget],
            phi: vec![config.phi],
            trajectories,
            seed,
            mode: config.mode,
            coupling: config.coupling.clone(),
            ceiling: config.ceiling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axes = [
            ("lattice", self.lattice.len()),
            ("a0", self.initial.len()),
            ("f", self.absorbance.len()),
            ("n_budget", self.budget.len()),
            ("phi", self.phi.len()),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, len)| *len == 0) {
            return Err(Error::Config(format!("sweep grid `{name}` is empty")));
        }
        if self.trajectories == 0 {
            return Err(Error::Config("trajectories per cell must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.lattice.len() * self.initial.len() * self.absorbance.len() * self.budget.len() * self.phi.len()
    }

    /// Cells in sweep order: lattice outermost, then A0, f, n, and φ innermost.
    pub fn cells(&self) -> Result<Vec<DeviceConfig>> {
        self.validate()?;
        let mut cells = Vec::with_capacity(self.cell_count());
        for &lattice in &self.lattice {
            for &initial in &self.initial {
                for &absorbance in &self.absorbance {
                    for &budget in &self.budget {
                        for &phi in &self.phi {
                            let config = DeviceConfig {
                                lattice,
                                initial,
                                absorbance,
                                budget,
                                mode: self.mode,
                                phi,
                                coupling: self.coupling.clone(),
                                ceiling: self.ceiling,
                            };
                            config.validate()?;
                            cells.push(config);
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            lattice: vec![1000],
            initial: vec![InitialSpin::Intensity(0.5)],
            absorbance: vec![0.0],
            budget: vec![Budget::Limited(0)],
            phi: vec![RotationAngle::ZERO],
            trajectories: 100_000,
            seed: 0,
            mode: BudgetMode::Moves,
            coupling: None,
            ceiling: DEFAULT_CEILING,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Completed {
        report: Box<ComparisonReport>,
        #[serde(skip)]
        ensemble: Box<EnsembleResult>,
    },
    Failed {
        error: String,
    },
}

impl CellOutcome {
    pub fn report(&self) -> Option<&ComparisonReport> {
        match self {
            CellOutcome::Completed { report, .. } => Some(report),
            CellOutcome::Failed { .. } => None,
        }
    }

    pub fn ensemble(&self) -> Option<&EnsembleResult> {
        match self {
            CellOutcome::Completed { ensemble, .. } => Some(ensemble),
            CellOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub cell: u64,
    pub config: DeviceConfig,
    pub outcome: CellOutcome,
}

/// Runs every cell of `spec`. Cell `i` uses the random streams keyed by
/// `(spec.seed, i)`. A cell that aborts is recorded as failed and the sweep
/// moves on.
pub fn run_sweep(spec: &SweepSpec, workers: Workers) -> Result<Vec<SweepRow>> {
    let cells = spec.cells()?;
    let total = cells.len();
    let rows = cells
        .into_iter()
        .enumerate()
        .map(|(i, config)| {
            log::info!("cell {}/{total}: {}", i + 1, describe(&config));
            let outcome = match exec::run_cell(&config, spec.seed, i as u64, spec.trajectories, workers)
                .and_then(|ensemble| Ok((ComparisonReport::new(&config, &ensemble)?, ensemble)))
            {
                Ok((report, ensemble)) => CellOutcome::Completed {
                    report: Box::new(report),
                    ensemble: Box::new(ensemble),
                },
                Err(e) => {
                    log::warn!("cell {} failed: {e}", i + 1);
                    CellOutcome::Failed { error: e.to_string() }
                }
            };
            SweepRow {
                cell: i as u64,
                config,
                outcome,
            }
        })
        .collect();
    Ok(rows)
}

fn describe(c: &DeviceConfig) -> String {
    format!(
        "N={} A0={:.4} f={} n={} phi={:.4}",
        c.lattice,
        c.intensity(),
        c.absorbance,
        c.effective_budget(),
        c.phi.radians()
    )
}
