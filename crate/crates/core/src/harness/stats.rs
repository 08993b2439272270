//! Point estimates with 95% confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
    pub count: u64,
}

impl StatSummary {
    /// Wilson score interval for `successes` out of `trials`.
    pub fn wilson(successes: u64, trials: u64) -> Self {
        Self::wilson_with_z(successes, trials, Z_95)
    }

    pub fn wilson_with_z(successes: u64, trials: u64, z: f64) -> Self {
        if trials == 0 {
            return StatSummary {
                estimate: f64::NAN,
                lower: 0.0,
                upper: 1.0,
                half_width: 0.5,
                count: 0,
            };
        }
        let n = trials as f64;
        let p = successes.min(trials) as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let margin = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        // the exact bounds at 0 and m successes are 0 and 1
        let lower = if successes == 0 { 0.0 } else { (center - margin).max(0.0) };
        let upper = if successes >= trials { 1.0 } else { (center + margin).min(1.0) };
        StatSummary {
            estimate: p,
            lower,
            upper,
            half_width: 0.5 * (upper - lower),
            count: trials,
        }
    }

    /// Student-t interval for a sample mean.
    pub fn mean_t(mean: f64, sample_sd: f64, count: u64) -> Self {
        let half_width = if count < 2 {
            f64::INFINITY
        } else {
            let t = StudentsT::new(0.0, 1.0, (count - 1) as f64)
                .expect("positive degrees of freedom")
                .inverse_cdf(0.975);
            t * sample_sd / (count as f64).sqrt()
        };
        StatSummary {
            estimate: mean,
            lower: mean - half_width,
            upper: mean + half_width,
            half_width,
            count,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Standard error implied by the half-width of a 95% interval.
    pub fn standard_error(&self) -> f64 {
        self.half_width / Z_95
    }
}

/// A difference with a propagated interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}
