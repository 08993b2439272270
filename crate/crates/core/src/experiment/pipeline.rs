use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DeviceConfig;
use crate::analytic::rotate_intensity;
use crate::sp::{run_walk, Canonical, WalkOptions, WalkRecord};
use crate::Result;

/// What happened to one target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetOutcome {
    pub d1_final_a: u64,
    pub absorbed_by_d1: bool,
    /// `None` when the target never reached `D2`.
    pub detected_by_d2: Option<bool>,
}

/// A [`DeviceConfig`] resolved into the pieces needed per target.
#[derive(Clone, Debug)]
pub struct Pipeline {
    a0: u64,
    lattice: u64,
    model: Canonical,
    walk: WalkOptions,
    absorbance: f64,
    phi: crate::analytic::RotationAngle,
}

impl Pipeline {
    pub fn new(config: &DeviceConfig) -> Result<Self> {
        config.validate()?;
        Ok(Pipeline {
            a0: config.a0(),
            lattice: config.lattice,
            model: Canonical::new(config.lattice)?,
            walk: config.walk_options(),
            absorbance: config.absorbance,
            phi: config.phi,
        })
    }

    pub fn a0(&self) -> u64 {
        self.a0
    }

    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    /// Runs one target through both devices. Draw order on `rng`: the walk,
    /// then the absorption coin (only at `a = N`), then the detection coin.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(WalkRecord, TargetOutcome)> {
        let walk = run_walk(self.a0, &self.model, &self.walk, rng)?;
        let a = walk.final_a;
        if a == self.lattice && rng.random::<f64>() < self.absorbance {
            return Ok((
                walk,
                TargetOutcome {
                    d1_final_a: a,
                    absorbed_by_d1: true,
                    detected_by_d2: None,
                },
            ));
        }
        let b = rotate_intensity(a as f64 / self.lattice as f64, self.phi);
        let detected = rng.random::<f64>() < b;
        Ok((
            walk,
            TargetOutcome {
                d1_final_a: a,
                absorbed_by_d1: false,
                detected_by_d2: Some(detected),
            },
        ))
    }
}

/// Simulates a single target for `config`.
pub fn simulate_target<R: Rng + ?Sized>(config: &DeviceConfig, rng: &mut R) -> Result<TargetOutcome> {
    Ok(Pipeline::new(config)?.simulate(rng)?.1)
}
