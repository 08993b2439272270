//! The two-device experiment under the stochastic-process model.
//!
//! A target enters the partial absorber `D1` with `+z` intensity `A0`. Inside
//! `D1` its lattice intensity walks for up to `n` interactions. Targets whose
//! walk terminated at `A = 1` are absorbed with probability `f`; every other
//! target reaches the detector `D2`, rotated by `φ`, which counts it with
//! probability `B(A, φ)`.

mod ensemble;
mod pipeline;
mod prediction;

use serde::{Deserialize, Serialize};

use crate::analytic::{check_intensity, intensity_from_angle, RotationAngle, SpinAngle};
use crate::cqm::check_absorbance;
use crate::sp::{Budget, BudgetMode, WalkOptions, DEFAULT_CEILING};
use crate::{Error, Result};

pub use ensemble::{histogram_merge, run_ensemble, run_ensemble_with, ComparisonReport, EnsembleResult};
pub use pipeline::{simulate_target, Pipeline, TargetOutcome};
pub use prediction::{sp_mean_prediction, PredictionMethod, SpPrediction};

/// Initial spin, either as the `+z` intensity or as the polar angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpin {
    Intensity(f64),
    Angle(SpinAngle),
}

impl InitialSpin {
    pub fn intensity(&self) -> f64 {
        match *self {
            InitialSpin::Intensity(a) => a,
            InitialSpin::Angle(theta) => intensity_from_angle(theta),
        }
    }
}

/// Piecewise-linear map from absorbance `f` to the interaction budget `n`,
/// for modelling a physical barrier whose thickness sets both.
///
/// Points are `(f, n)` pairs; outside the covered range the nearest end value
/// applies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, u64)>", into = "Vec<(f64, u64)>")]
pub struct Coupling {
    points: Vec<(f64, u64)>,
}

impl Coupling {
    pub fn new(mut points: Vec<(f64, u64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("coupling needs at least one (f, n) point".into()));
        }
        for &(f, _) in &points {
            check_absorbance(f)?;
        }
        points.sort_by(|x, y| x.0.total_cmp(&y.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("coupling lists the same f twice".into()));
        }
        Ok(Coupling { points })
    }

    pub fn budget_for(&self, f: f64) -> u64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if f <= first.0 {
            return first.1;
        }
        if f >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|p| p.0 <= f);
        let (f0, n0) = pts[i - 1];
        let (f1, n1) = pts[i];
        let t = (f - f0) / (f1 - f0);
        (n0 as f64 + t * (n1 as f64 - n0 as f64)).round() as u64
    }
}

impl TryFrom<Vec<(f64, u64)>> for Coupling {
    type Error = Error;

    fn try_from(points: Vec<(f64, u64)>) -> Result<Self> {
        Coupling::new(points)
    }
}

impl From<Coupling> for Vec<(f64, u64)> {
    fn from(c: Coupling) -> Self {
        c.points
    }
}

/// Parameters of one experimental cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    /// `N = 1/ε`.
    pub lattice: u64,
    pub initial: InitialSpin,
    /// Absorbance `f` of `D1` for spin-up targets.
    pub absorbance: f64,
    /// Interaction budget `n` inside `D1`. Overridden by `coupling` when set.
    pub budget: Budget,
    pub mode: BudgetMode,
    /// Rotation of `D2`.
    pub phi: RotationAngle,
    pub coupling: Option<Coupling>,
    /// Ceiling for unlimited walks.
    pub ceiling: u64,
}

impl DeviceConfig {
    pub fn new(lattice: u64, a0: f64, absorbance: f64, budget: Budget, phi: RotationAngle) -> Result<Self> {
        let config = DeviceConfig {
            lattice,
            initial: InitialSpin::Intensity(a0),
            absorbance,
            budget,
            mode: BudgetMode::Moves,
            phi,
            coupling: None,
            ceiling: DEFAULT_CEILING,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_mode(self, mode: BudgetMode) -> Self {
        DeviceConfig { mode, ..self }
    }

    pub fn with_coupling(self, coupling: Coupling) -> Self {
        DeviceConfig {
            coupling: Some(coupling),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lattice == 0 {
            return Err(Error::out_of_range("N", 0.0, "[1, ∞)"));
        }
        check_intensity("A0", self.initial.intensity())?;
        check_absorbance(self.absorbance)?;
        if self.ceiling == 0 {
            return Err(Error::out_of_range("ceiling", 0.0, "[1, ∞)"));
        }
        Ok(())
    }

    /// The requested `A0` before quantization.
    pub fn intensity(&self) -> f64 {
        self.initial.intensity()
    }

    /// `a0 = round(A0·N)`, ties rounding up.
    pub fn a0(&self) -> u64 {
        (self.intensity() * self.lattice as f64 + 0.5).floor() as u64
    }

    /// `A0` as realized on the lattice, `a0/N`.
    pub fn quantized_intensity(&self) -> f64 {
        self.a0() as f64 / self.lattice as f64
    }

    pub fn quantization_error(&self) -> f64 {
        (self.quantized_intensity() - self.intensity()).abs()
    }

    pub fn effective_budget(&self) -> Budget {
        match &self.coupling {
            Some(c) => Budget::Limited(c.budget_for(self.absorbance)),
            None => self.budget,
        }
    }

    pub fn walk_options(&self) -> WalkOptions {
        WalkOptions::new(self.effective_budget(), self.mode).with_ceiling(self.ceiling)
    }

    /// Stable 64-bit fingerprint of the configuration, used to refuse merging
    /// ensembles from different cells.
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_vec(self).expect("device configs always serialize");
        fnv1a(&json)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}
