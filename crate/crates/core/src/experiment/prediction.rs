use serde::{Deserialize, Serialize};

use super::DeviceConfig;
use crate::analytic::{binomial_distribution, mean_rotated_intensity, rotate_intensity};
use crate::sp::{Budget, BudgetMode};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionMethod {
    /// Average over the exact short-walk binomial law.
    Exact,
    /// Average over the Gaussian approximation with `σ = √n / N`.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpPrediction {
    /// Predicted fraction of all targets counted by `D2`.
    pub d2_fraction: f64,
    pub method: PredictionMethod,
    /// Gaussian mass outside `[0, 1]`; only for the Gaussian method.
    pub gaussian_tail_mass: Option<f64>,
}

/// Analytic stochastic-process prediction of the `D2` fraction, without
/// simulation.
///
/// With an unrotated detector optional stopping fixes the answer at
/// `A0 − f·s`: `s = 0` when no walk can reach `A = 1` within the budget,
/// `s = A0` for an unlimited budget. Other budgets at `φ = 0` with `f > 0`
/// have no closed form.
///
/// With a rotated detector the budget must be a move count. The exact method
/// needs walks that cannot touch either endpoint; the Gaussian method accepts
/// any move count and reports how much mass its approximation puts outside
/// `[0, 1]`.
pub fn sp_mean_prediction(config: &DeviceConfig, method: PredictionMethod) -> Result<SpPrediction> {
    config.validate()?;
    let lattice = config.lattice;
    let a0 = config.a0();
    let a0_intensity = config.quantized_intensity();
    let f = config.absorbance;
    let budget = config.effective_budget();
    let within_exact_regime = |n: u64| a0 > n && a0 + n < lattice;
    let result = |d2_fraction, gaussian_tail_mass| SpPrediction {
        d2_fraction,
        method,
        gaussian_tail_mass,
    };

    if config.phi.radians() == 0.0 {
        let s = match budget {
            Budget::Unlimited => a0_intensity,
            _ if f == 0.0 => 0.0,
            // n ticks never contain more than n moves, so this covers both modes
            Budget::Limited(n) if within_exact_regime(n) => 0.0,
            Budget::Limited(n) => {
                return Err(Error::Validity(format!(
                    "{n} interactions from a0 = {a0} can reach A = 1 and f = {f} > 0"
                )))
            }
        };
        return Ok(result(a0_intensity - f * s, None));
    }

    let n = match (budget, config.mode) {
        (Budget::Limited(n), BudgetMode::Moves) => n,
        (Budget::Limited(0), BudgetMode::Ticks) => 0,
        (Budget::Unlimited, _) => {
            return Err(Error::Validity(
                "a rotated detector after a complete walk has no closed-form prediction here".into(),
            ))
        }
        (Budget::Limited(_), BudgetMode::Ticks) => {
            return Err(Error::Validity("analytic predictions need a budget counted in moves".into()))
        }
    };
    if n == 0 {
        return Ok(result(rotate_intensity(a0_intensity, config.phi), None));
    }
    match method {
        PredictionMethod::Exact => {
            let dist = binomial_distribution(a0, lattice, n)?;
            Ok(result(dist.expect(|a| rotate_intensity(a, config.phi)), None))
        }
        PredictionMethod::Gaussian => {
            let sigma = (n as f64).sqrt() / lattice as f64;
            let mean = mean_rotated_intensity(sigma, config.phi, a0_intensity)?;
            Ok(result(mean.value, Some(mean.out_of_range_mass)))
        }
    }
}
