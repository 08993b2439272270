use serde::{Deserialize, Serialize};

use super::{DeviceConfig, TargetOutcome};
use crate::analytic::IntensityDistribution;
use crate::cqm::cqm_d2_fraction;
use crate::harness::{exec, Interval, StatSummary, Workers};
use crate::sp::WalkRecord;
use crate::{Error, Result};

/// Integer tallies over an ensemble of targets.
///
/// Everything is an exact count, so merging partial results is associative and
/// commutative and the totals do not depend on how the ensemble was split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleResult {
    lattice: u64,
    config_key: u64,
    trajectories: u64,
    /// Histogram of the `D1`-exit lattice value, indices `0..=N`.
    counts: Vec<u64>,
    absorbed_by_d1: u64,
    detected_by_d2: u64,
    moves_total: u128,
    sum_a: u128,
    sum_a_sq: u128,
}

impl EnsembleResult {
    pub fn empty(lattice: u64, config_key: u64) -> Self {
        EnsembleResult {
            lattice,
            config_key,
            trajectories: 0,
            counts: vec![0; lattice as usize + 1],
            absorbed_by_d1: 0,
            detected_by_d2: 0,
            moves_total: 0,
            sum_a: 0,
            sum_a_sq: 0,
        }
    }

    pub fn for_config(config: &DeviceConfig) -> Self {
        Self::empty(config.lattice, config.fingerprint())
    }

    pub fn record(&mut self, walk: &WalkRecord, outcome: &TargetOutcome) {
        let a = outcome.d1_final_a;
        self.trajectories += 1;
        self.counts[a as usize] += 1;
        self.absorbed_by_d1 += u64::from(outcome.absorbed_by_d1);
        self.detected_by_d2 += u64::from(outcome.detected_by_d2 == Some(true));
        self.moves_total += u128::from(walk.moves_taken);
        self.sum_a += u128::from(a);
        self.sum_a_sq += u128::from(a) * u128::from(a);
    }

    pub fn merge(mut self, other: &EnsembleResult) -> Result<Self> {
        if self.lattice != other.lattice || self.config_key != other.config_key {
            return Err(Error::Mismatch(format!(
                "lattice {} / config {:016x} vs lattice {} / config {:016x}",
                self.lattice, self.config_key, other.lattice, other.config_key
            )));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.trajectories += other.trajectories;
        self.absorbed_by_d1 += other.absorbed_by_d1;
        self.detected_by_d2 += other.detected_by_d2;
        self.moves_total += other.moves_total;
        self.sum_a += other.sum_a;
        self.sum_a_sq += other.sum_a_sq;
        Ok(self)
    }

    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    pub fn config_key(&self) -> u64 {
        self.config_key
    }

    pub fn trajectories(&self) -> u64 {
        self.trajectories
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn absorbed_by_d1(&self) -> u64 {
        self.absorbed_by_d1
    }

    pub fn detected_by_d2(&self) -> u64 {
        self.detected_by_d2
    }

    /// Targets that passed `D1` and were not counted by `D2`.
    pub fn transmitted_undetected(&self) -> u64 {
        self.trajectories - self.absorbed_by_d1 - self.detected_by_d2
    }

    /// Walks that terminated at `a = N`, whether or not `D1` then absorbed them.
    pub fn ended_at_one(&self) -> u64 {
        self.counts[self.lattice as usize]
    }

    pub fn ended_at_zero(&self) -> u64 {
        self.counts[0]
    }

    pub fn mean_moves(&self) -> f64 {
        self.moves_total as f64 / self.trajectories as f64
    }

    /// Sum of the exit lattice values and of their squares.
    pub fn moments(&self) -> (u128, u128) {
        (self.sum_a, self.sum_a_sq)
    }

    /// Mean exit intensity with a t interval.
    pub fn mean_intensity(&self) -> StatSummary {
        let m = self.trajectories;
        let n = self.lattice as f64;
        if m == 0 {
            return StatSummary::mean_t(f64::NAN, f64::NAN, 0);
        }
        let mean_a = self.sum_a as f64 / m as f64;
        StatSummary::mean_t(mean_a / n, self.sample_sd_lattice() / n, m)
    }

    /// Sample standard deviation of the exit intensity `A`.
    pub fn sample_sd_intensity(&self) -> f64 {
        self.sample_sd_lattice() / self.lattice as f64
    }

    fn sample_sd_lattice(&self) -> f64 {
        let m = self.trajectories;
        if m < 2 {
            return f64::NAN;
        }
        // Σ(a − ā)² = Σa² − (Σa)²/m, evaluated exactly in integers as
        // (mΣa² − (Σa)²)/m.
        let numer = u128::from(m) * self.sum_a_sq - self.sum_a * self.sum_a;
        (numer as f64 / m as f64 / (m - 1) as f64).sqrt()
    }

    /// Empirical exit distribution with explicit endpoint masses.
    pub fn distribution(&self) -> Result<IntensityDistribution> {
        let m = self.trajectories as f64;
        let last = self.lattice as usize;
        let interior = self.counts[1..last]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as u64 + 1, c as f64 / m))
            .collect();
        IntensityDistribution::new(
            self.lattice,
            interior,
            self.counts[0] as f64 / m,
            self.counts[last] as f64 / m,
        )
    }
}

/// Merges two partial ensembles of the same configuration.
pub fn histogram_merge(h1: &EnsembleResult, h2: &EnsembleResult) -> Result<EnsembleResult> {
    h1.clone().merge(h2)
}

/// Stochastic-process estimates next to the conventional closed forms.
///
/// All fractions are relative to the number of launched targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub trajectories: u64,
    /// `a0/N`, the initial intensity actually simulated.
    pub a0_quantized: f64,
    pub quantization_error: f64,
    pub sp_d2_fraction: StatSummary,
    pub cqm_d2_fraction: f64,
    pub sp_d1_absorbed: StatSummary,
    pub cqm_d1_absorbed: f64,
    /// Fraction of walks that terminated at `A = 1`.
    pub endpoint_mass_s: StatSummary,
    pub endpoint_mass_zero: StatSummary,
    /// `D2` detections plus `D1` absorptions.
    pub sp_total_spinup: StatSummary,
    pub exit_mean_intensity: StatSummary,
    pub exit_sd_intensity: f64,
    pub mean_moves: f64,
    /// `sp_d2_fraction − cqm_d2_fraction`; the interval is the SP interval
    /// shifted by the exact CQM value.
    pub divergence: Interval,
}

impl ComparisonReport {
    pub fn new(config: &DeviceConfig, result: &EnsembleResult) -> Result<Self> {
        let m = result.trajectories;
        let a0 = config.quantized_intensity();
        let sp_d2 = StatSummary::wilson(result.detected_by_d2, m);
        let cqm_d2 = cqm_d2_fraction(a0, config.absorbance, config.phi)?;
        Ok(ComparisonReport {
            trajectories: m,
            a0_quantized: a0,
            quantization_error: config.quantization_error(),
            sp_d2_fraction: sp_d2,
            cqm_d2_fraction: cqm_d2,
            sp_d1_absorbed: StatSummary::wilson(result.absorbed_by_d1, m),
            cqm_d1_absorbed: config.absorbance * a0,
            endpoint_mass_s: StatSummary::wilson(result.ended_at_one(), m),
            endpoint_mass_zero: StatSummary::wilson(result.ended_at_zero(), m),
            sp_total_spinup: StatSummary::wilson(result.detected_by_d2 + result.absorbed_by_d1, m),
            exit_mean_intensity: result.mean_intensity(),
            exit_sd_intensity: result.sample_sd_intensity(),
            mean_moves: result.mean_moves(),
            divergence: Interval {
                estimate: sp_d2.estimate - cqm_d2,
                lower: sp_d2.lower - cqm_d2,
                upper: sp_d2.upper - cqm_d2,
            },
        })
    }
}

/// Simulates `trajectories` independent targets. Trajectory `i` draws from the
/// stream `(seed, cell 0, i)`, so the result is a pure function of
/// `(config, trajectories, seed)`.
pub fn run_ensemble(config: &DeviceConfig, trajectories: u64, seed: u64) -> Result<(EnsembleResult, ComparisonReport)> {
    run_ensemble_with(config, trajectories, seed, Workers::Global)
}

pub fn run_ensemble_with(
    config: &DeviceConfig,
    trajectories: u64,
    seed: u64,
    workers: Workers,
) -> Result<(EnsembleResult, ComparisonReport)> {
    if trajectories == 0 {
        return Err(Error::out_of_range("M", 0.0, "[1, ∞)"));
    }
    let result = exec::run_cell(config, seed, 0, trajectories, workers)?;
    let report = ComparisonReport::new(config, &result)?;
    Ok((result, report))
}
