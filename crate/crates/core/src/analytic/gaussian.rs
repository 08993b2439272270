//! Gaussian approximation to a short walk and the densities it induces.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::Serialize;
use statrs::function::erf::erfc;

use super::quad::{integrate_with_breaks, Integral};
use super::{check_intensity, rotate_intensity, RotationAngle};
use crate::{Error, Result};

/// Absolute tolerance for the quadrature means.
pub const QUAD_TOL: f64 = 1e-9;

/// Gaussian mass outside `[0, 1]` above which the approximation is flagged.
pub const VALIDITY_TAIL_MASS: f64 = 1e-6;

/// Peaks narrower than this many σ are pinned with breakpoints.
const PEAK_HALF_WIDTH: f64 = 8.0;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::out_of_range("sigma", sigma, "(0, ∞)"))
    }
}

/// `exp(−(A − A0)²/(2σ²)) / (σ√(2π))`.
pub fn gaussian_pdf(a: f64, a0: f64, sigma: f64) -> f64 {
    let z = (a - a0) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Gaussian mass below 0 and above 1.
pub(crate) fn tail_masses(a0: f64, sigma: f64) -> (f64, f64) {
    let scale = sigma * SQRT_2;
    (0.5 * erfc(a0 / scale), 0.5 * erfc((1.0 - a0) / scale))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotatedMean {
    /// Mean rotated-frame intensity over the Gaussian truncated to `[0, 1]`.
    pub value: f64,
    /// Gaussian mass falling outside `[0, 1]`.
    pub out_of_range_mass: f64,
    pub quad_error: f64,
}

impl RotatedMean {
    /// False when the Gaussian spills more than [`VALIDITY_TAIL_MASS`] outside `[0, 1]`.
    pub fn is_valid(&self) -> bool {
        self.out_of_range_mass <= VALIDITY_TAIL_MASS
    }
}

/// Mean detected fraction `∫ B(A, φ) p(A) dA` for a Gaussian `p` centred at
/// `a0` with spread `sigma`.
///
/// `B(A, φ)` is only defined on `[0, 1]`, so the Gaussian is truncated there and
/// renormalized; a warning is logged when the discarded tail exceeds
/// [`VALIDITY_TAIL_MASS`].
pub fn mean_rotated_intensity(sigma: f64, phi: RotationAngle, a0: f64) -> Result<RotatedMean> {
    check_sigma(sigma)?;
    check_intensity("A0", a0)?;
    let (lo_tail, hi_tail) = tail_masses(a0, sigma);
    let in_range = 1.0 - lo_tail - hi_tail;
    let out_of_range_mass = lo_tail + hi_tail;
    if out_of_range_mass > VALIDITY_TAIL_MASS {
        log::warn!(
            "Gaussian with A0 = {a0}, sigma = {sigma} puts {out_of_range_mass:.3e} of its mass outside [0, 1]"
        );
    }

    // A = (1 − cos u)/2 removes the square-root endpoint behaviour of B(A, φ):
    // √(A(1 − A)) = sin(u)/2 and dA = sin(u)/2 du.
    let to_u = |a: f64| (1.0 - 2.0 * a).clamp(-1.0, 1.0).acos();
    let integrand = |u: f64| {
        let a = 0.5 * (1.0 - u.cos());
        rotate_intensity(a.clamp(0.0, 1.0), phi) * gaussian_pdf(a, a0, sigma) * 0.5 * u.sin()
    };
    let mut breaks = vec![0.0, PI];
    for k in [-PEAK_HALF_WIDTH, -1.0, 0.0, 1.0, PEAK_HALF_WIDTH] {
        let a = a0 + k * sigma;
        if a > 0.0 && a < 1.0 {
            breaks.push(to_u(a));
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let Integral { value, error, .. } = integrate_with_breaks(integrand, &breaks, 0.1 * QUAD_TOL * in_range)?;
    Ok(RotatedMean {
        value: value / in_range,
        out_of_range_mass,
        quad_error: error / in_range,
    })
}

/// Density of `B = 1/2 + √(A(1 − A))` on `(1/2, 1)` when `A` is Gaussian about
/// `1/2` with spread `sigma`.
///
/// The shape is `|dA/dB| · p_A(A(B))` along the branch `A ≥ 1/2`,
///
/// `(2B − 1) / (2√(B(1 − B))) · exp(−B(1 − B)/(2σ²)) / (σ√(2π))`,
///
/// scaled by a constant `κ` computed numerically so that the density integrates
/// to one. Both branches `A = 1/2 ± √(B(1 − B))` map onto the same `B`, so `κ`
/// comes out close to 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotatedDensity {
    sigma: f64,
    kappa: f64,
}

impl RotatedDensity {
    pub fn new(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        let shape = Self { sigma, kappa: 1.0 };
        let area = shape.integrate_t(|_| 1.0)?;
        Ok(RotatedDensity {
            sigma,
            kappa: 1.0 / area.value,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The normalization constant applied to the unnormalized shape.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn exponent_factor(&self, b: f64) -> f64 {
        (-b * (1.0 - b) / (2.0 * self.sigma * self.sigma)).exp() / (self.sigma * (2.0 * PI).sqrt())
    }

    pub fn pdf(&self, b: f64) -> Result<f64> {
        if !(b > 0.5 && b < 1.0) {
            return Err(Error::out_of_range("B", b, "(1/2, 1)"));
        }
        let jacobian = (2.0 * b - 1.0) / (2.0 * (b * (1.0 - b)).sqrt());
        Ok(self.kappa * jacobian * self.exponent_factor(b))
    }

    /// `∫ g(B) pdf(B) dB` over `(1/2, 1)`, substituting `B = 1 − t²` so that the
    /// `1/√(1 − B)` singularity at `B = 1` cancels against `dB = −2t dt`.
    fn integrate_t(&self, g: impl Fn(f64) -> f64) -> Result<Integral> {
        let integrand = |t: f64| {
            let b = 1.0 - t * t;
            self.kappa * g(b) * (2.0 * b - 1.0) / b.sqrt() * self.exponent_factor(b)
        };
        let mut breaks = vec![0.0, FRAC_1_SQRT_2];
        for k in [1.0, PEAK_HALF_WIDTH] {
            let t = k * self.sigma;
            if t < FRAC_1_SQRT_2 {
                breaks.push(t);
            }
        }
        breaks.sort_by(f64::total_cmp);
        integrate_with_breaks(integrand, &breaks, 0.1 * QUAD_TOL)
    }

    /// Mean of `B` under this density.
    pub fn mean(&self) -> Result<f64> {
        Ok(self.integrate_t(|b| b)?.value)
    }
}

/// Normalized density of the quarter-turn intensity `B`; see [`RotatedDensity`].
pub fn b_density_halfpi(b: f64, sigma: f64) -> Result<f64> {
    RotatedDensity::new(sigma)?.pdf(b)
}
