//! Run configuration documents.
//!
//! A run is described by a TOML (or JSON) document:
//!
//! ```toml
//! seed = 7
//! trajectories = 100000
//! method = "montecarlo"      # or "exact", "gaussian"
//!
//! [device]
//! lattice = 1000
//! a0 = 0.5                   # or theta0 = "90deg"
//! f = 1.0
//! n_budget = "unlimited"     # or an integer
//! mode = "moves"             # or "ticks"
//! phi = "90deg"              # angles need a "deg" or "rad" suffix
//!
//! [sweep]                    # optional; a missing axis uses the device value
//! f = [0.0, 0.5, 1.0]
//! phi = ["0deg", "45deg", "90deg"]
//!
//! [output]
//! dir = "results"
//! ```
//!
//! Unknown keys are rejected and every physical parameter is range-checked
//! when the document is resolved into a [`RunPlan`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analytic::{RotationAngle, SpinAngle};
use crate::experiment::{Coupling, DeviceConfig, InitialSpin};
use crate::harness::{SweepSpec, Workers};
use crate::sp::{Budget, BudgetMode, DEFAULT_CEILING};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRAJECTORIES: u64 = 100_000;
pub const DEFAULT_LATTICE: u64 = 1000;

/// An angle written with an explicit unit, e.g. `"45deg"` or `"0.785rad"`.
///
/// Stored in radians; serialized back as `"<radians>rad"`, which parses to
/// the identical value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(f64);

impl Angle {
    pub fn from_radians(rad: f64) -> Self {
        Angle(rad)
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (number, to_rad) = if let Some(x) = t.strip_suffix("deg").or_else(|| t.strip_suffix('°')) {
            (x, std::f64::consts::PI / 180.0)
        } else if let Some(x) = t.strip_suffix("rad") {
            (x, 1.0)
        } else {
            return Err(Error::Config(format!(
                "angle {s:?} needs a unit suffix, e.g. \"90deg\" or \"1.5708rad\""
            )));
        };
        let value: f64 = number
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("angle {s:?} is not a number")))?;
        if !value.is_finite() {
            return Err(Error::Config(format!("angle {s:?} is not finite")));
        }
        Ok(Angle(value * to_rad))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}rad", self.0)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an angle string with a unit, such as \"90deg\" or \"1.5708rad\"")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Angle, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<Angle, E> {
                Err(E::custom(format!("angle {v} needs a unit: write \"{v}deg\" or \"{v}rad\"")))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Angle, E> {
                self.visit_f64(v as f64)
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Angle, E> {
                self.visit_f64(v as f64)
            }
        }
        d.deserialize_any(Visitor)
    }
}

/// How `sp_d2_fraction` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Simulate an ensemble of targets.
    #[default]
    MonteCarlo,
    /// Exact binomial law of a short walk.
    Exact,
    /// Gaussian approximation of the walk.
    Gaussian,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::MonteCarlo => "montecarlo",
            Method::Exact => "exact",
            Method::Gaussian => "gaussian",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Angle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_budget: Option<Budget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<BudgetMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Angle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Coupling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<Angle>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_budget: Option<Vec<Budget>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Angle>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// The configuration document as written by the user.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    /// Worker threads; 0 or absent uses every core. Does not affect results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub device: DeviceSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl RunConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a document, as JSON when the extension is `.json` and as TOML
    /// otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        };
        parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks and resolves the document against the built-in defaults.
    pub fn resolve(&self) -> Result<RunPlan> {
        let d = &self.device;
        let initial = match (d.a0, d.theta0) {
            (Some(_), Some(_)) => return Err(Error::Config("device sets both a0 and theta0".into())),
            (Some(a), None) => InitialSpin::Intensity(a),
            (None, Some(t)) => InitialSpin::Angle(SpinAngle::new(t.radians())?),
            (None, None) => InitialSpin::Intensity(0.5),
        };
        let device = DeviceConfig {
            lattice: d.lattice.unwrap_or(DEFAULT_LATTICE),
            initial,
            absorbance: d.f.unwrap_or(0.0),
            budget: d.n_budget.unwrap_or(Budget::Unlimited),
            mode: d.mode.unwrap_or_default(),
            phi: RotationAngle::new(d.phi.map_or(0.0, Angle::radians))?,
            coupling: d.coupling.clone(),
            ceiling: d.ceiling.unwrap_or(DEFAULT_CEILING),
        };
        device.validate()?;

        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        let trajectories = self.trajectories.unwrap_or(DEFAULT_TRAJECTORIES);
        if trajectories == 0 {
            return Err(Error::Config("trajectories must be at least 1".into()));
        }
        let mut sweep = SweepSpec::single(&device, trajectories, seed);
        if let Some(s) = &self.sweep {
            if let Some(v) = &s.lattice {
                sweep.lattice = v.clone();
            }
            sweep.initial = match (&s.a0, &s.theta0) {
                (Some(_), Some(_)) => return Err(Error::Config("sweep sets both a0 and theta0".into())),
                (Some(v), None) => v.iter().map(|&a| InitialSpin::Intensity(a)).collect(),
                (None, Some(v)) => v
                    .iter()
                    .map(|t| SpinAngle::new(t.radians()).map(InitialSpin::Angle))
                    .collect::<Result<_>>()?,
                (None, None) => sweep.initial,
            };
            if let Some(v) = &s.f {
                sweep.absorbance = v.clone();
            }
            if let Some(v) = &s.n_budget {
                sweep.budget = v.clone();
            }
            if let Some(v) = &s.phi {
                sweep.phi = v.iter().map(|p| RotationAngle::new(p.radians())).collect::<Result<_>>()?;
            }
        }
        // range-checks every cell
        sweep.cells()?;

        let workers = match self.workers {
            None | Some(0) => Workers::Global,
            Some(n) => Workers::Fixed(n),
        };
        Ok(RunPlan {
            device,
            sweep,
            is_sweep: self.sweep.is_some(),
            method: self.method.unwrap_or_default(),
            workers,
            out_dir: self.output.as_ref().and_then(|o| o.dir.clone()),
        })
    }
}

/// A fully checked run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub device: DeviceConfig,
    /// One cell unless the document had a `[sweep]` table.
    pub sweep: SweepSpec,
    pub is_sweep: bool,
    pub method: Method,
    pub workers: Workers,
    pub out_dir: Option<PathBuf>,
}

impl RunPlan {
    pub fn seed(&self) -> u64 {
        self.sweep.seed
    }

    pub fn trajectories(&self) -> u64 {
        self.sweep.trajectories
    }

    /// The plan written back as a document with every setting explicit.
    ///
    /// Worker count and output directory are left out because they do not
    /// change any result; feeding this document back reproduces the run.
    pub fn canonical(&self) -> RunConfigFile {
        let d = &self.device;
        let (a0, theta0) = initial_fields(d.initial);
        let sweep = self.is_sweep.then(|| {
            let s = &self.sweep;
            let all_angles = s.initial.iter().all(|i| matches!(i, InitialSpin::Angle(_)));
            let (a0, theta0) = if all_angles && !s.initial.is_empty() {
                (None, Some(s.initial.iter().map(|i| Angle(angle_of(*i))).collect()))
            } else {
                (Some(s.initial.iter().map(InitialSpin::intensity).collect()), None)
            };
            SweepSection {
                lattice: Some(s.lattice.clone()),
                a0,
                theta0,
                f: Some(s.absorbance.clone()),
                n_budget: Some(s.budget.clone()),
                phi: Some(s.phi.iter().map(|p| Angle(p.radians())).collect()),
            }
        });
        RunConfigFile {
            seed: Some(self.seed()),
            trajectories: Some(self.trajectories()),
            method: Some(self.method),
            workers: None,
            device: DeviceSection {
                lattice: Some(d.lattice),
                a0,
                theta0,
                f: Some(d.absorbance),
                n_budget: Some(d.budget),
                mode: Some(d.mode),
                phi: Some(Angle(d.phi.radians())),
                coupling: d.coupling.clone(),
                ceiling: Some(d.ceiling),
            },
            sweep,
            output: None,
        }
    }
}

fn initial_fields(i: InitialSpin) -> (Option<f64>, Option<Angle>) {
    match i {
        InitialSpin::Intensity(a) => (Some(a), None),
        InitialSpin::Angle(t) => (None, Some(Angle(t.radians()))),
    }
}

fn angle_of(i: InitialSpin) -> f64 {
    match i {
        InitialSpin::Angle(t) => t.radians(),
        InitialSpin::Intensity(a) => SpinAngle::from_intensity(a).map_or(0.0, SpinAngle::radians),
    }
}
