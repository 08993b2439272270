//! Closed-form geometry and distributions.
//!
//! Spin states live in the z–x plane with polar angle `θ` measured from `+z`.
//! The spin-up intensity along `+z` is `A = cos²(θ/2)`; a detector rotated by
//! `φ` about `y` sees `B = cos²((φ − θ)/2)`.

mod binomial;
mod gaussian;

pub(crate) use gaussian::tail_masses;
pub mod quad;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use binomial::binomial_distribution;
pub use gaussian::{
    b_density_halfpi, gaussian_pdf, mean_rotated_intensity, RotatedDensity, RotatedMean, QUAD_TOL,
    VALIDITY_TAIL_MASS,
};

/// Polar angle of the initial spin, `θ ∈ [0, π]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SpinAngle(f64);

impl SpinAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if (0.0..=PI).contains(&theta) {
            Ok(SpinAngle(theta))
        } else {
            Err(Error::out_of_range("theta", theta, "[0, π]"))
        }
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::new(deg.to_radians())
    }

    /// The angle whose spin-up intensity is `a`.
    pub fn from_intensity(a: f64) -> Result<Self> {
        check_intensity("A", a)?;
        Ok(SpinAngle(2.0 * a.sqrt().acos()))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SpinAngle {
    type Error = Error;

    fn try_from(theta: f64) -> Result<Self> {
        Self::new(theta)
    }
}

impl From<SpinAngle> for f64 {
    fn from(a: SpinAngle) -> f64 {
        a.0
    }
}

/// Detector rotation about the beam axis, `φ ∈ [0, π]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RotationAngle(f64);

impl RotationAngle {
    pub const ZERO: RotationAngle = RotationAngle(0.0);
    pub const QUARTER_TURN: RotationAngle = RotationAngle(PI / 2.0);

    pub fn new(phi: f64) -> Result<Self> {
        if (0.0..=PI).contains(&phi) {
            Ok(RotationAngle(phi))
        } else {
            Err(Error::out_of_range("phi", phi, "[0, π]"))
        }
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::new(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RotationAngle {
    type Error = Error;

    fn try_from(phi: f64) -> Result<Self> {
        Self::new(phi)
    }
}

impl From<RotationAngle> for f64 {
    fn from(a: RotationAngle) -> f64 {
        a.0
    }
}

pub(crate) fn check_intensity(what: &'static str, a: f64) -> Result<()> {
    if (0.0..=1.0).contains(&a) {
        Ok(())
    } else {
        Err(Error::out_of_range(what, a, "[0, 1]"))
    }
}

/// `A = cos²(θ/2)`.
pub fn intensity_from_angle(theta: SpinAngle) -> f64 {
    let c = (theta.0 / 2.0).cos();
    c * c
}

/// Spin-up intensity in a frame rotated by `φ`, for a state on the upper
/// semicircle with `+z` intensity `a`:
///
/// `B = A cos²(φ/2) + (1 − A) sin²(φ/2) + sin φ √(A(1 − A))`.
///
/// `a` must lie in `[0, 1]`.
#[inline]
pub fn rotate_intensity(a: f64, phi: RotationAngle) -> f64 {
    debug_assert!((0.0..=1.0).contains(&a), "intensity {a} outside [0, 1]");
    let (s, c) = (phi.0 / 2.0).sin_cos();
    let cross = (a * (1.0 - a)).max(0.0).sqrt();
    (a * c * c + (1.0 - a) * s * s + phi.0.sin() * cross).clamp(0.0, 1.0)
}

/// The quarter-turn special case `B = 1/2 + √(A(1 − A))`.
#[inline]
pub fn rotate_intensity_halfpi(a: f64) -> f64 {
    0.5 + (a * (1.0 - a)).max(0.0).sqrt()
}

/// Inverse of [`rotate_intensity_halfpi`] on the branch `A ≥ 1/2`:
/// `A = 1/2 + √(B(1 − B))`.
///
/// A state confined to the upper semicircle never has `B < 1/2`.
pub fn inverse_rotate_halfpi(b: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&b) {
        return Err(Error::out_of_range("B", b, "[1/2, 1]"));
    }
    Ok(0.5 + (b * (1.0 - b)).sqrt())
}

/// Distribution of lattice intensities with explicit endpoint masses.
///
/// `mass_at_one` is the fraction of walks that terminated at `A = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityDistribution {
    lattice: u64,
    /// `(a, mass)` for `0 < a < N`, sorted by `a`, zero masses omitted.
    interior: Vec<(u64, f64)>,
    mass_at_zero: f64,
    mass_at_one: f64,
}

impl IntensityDistribution {
    pub const TOTAL_MASS_TOL: f64 = 1e-12;

    pub fn new(lattice: u64, mut interior: Vec<(u64, f64)>, mass_at_zero: f64, mass_at_one: f64) -> Result<Self> {
        if lattice == 0 {
            return Err(Error::out_of_range("N", 0.0, "[1, ∞)"));
        }
        interior.retain(|&(_, m)| m != 0.0);
        interior.sort_by_key(|&(a, _)| a);
        let masses = interior.iter().map(|&(_, m)| m).chain([mass_at_zero, mass_at_one]);
        let mut total = 0.0;
        for m in masses {
            if m.is_nan() || m < 0.0 {
                return Err(Error::out_of_range("mass", m, "[0, 1]"));
            }
            total += m;
        }
        if (total - 1.0).abs() > Self::TOTAL_MASS_TOL {
            return Err(Error::out_of_range("total mass", total, "1 ± 1e-12"));
        }
        if let Some(&(a, _)) = interior.iter().find(|&&(a, _)| a == 0 || a >= lattice) {
            return Err(Error::out_of_range("interior a", a as f64, "(0, N)"));
        }
        if interior.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("duplicate lattice site in distribution".into()));
        }
        Ok(IntensityDistribution {
            lattice,
            interior,
            mass_at_zero,
            mass_at_one,
        })
    }

    pub fn point_mass(a: u64, lattice: u64) -> Result<Self> {
        match a {
            0 => Self::new(lattice, vec![], 1.0, 0.0),
            a if a == lattice => Self::new(lattice, vec![], 0.0, 1.0),
            a => Self::new(lattice, vec![(a, 1.0)], 0.0, 0.0),
        }
    }

    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    pub fn interior(&self) -> &[(u64, f64)] {
        &self.interior
    }

    pub fn mass_at_zero(&self) -> f64 {
        self.mass_at_zero
    }

    pub fn mass_at_one(&self) -> f64 {
        self.mass_at_one
    }

    /// Mass at lattice site `a` (including the endpoints).
    pub fn mass(&self, a: u64) -> f64 {
        if a == 0 {
            self.mass_at_zero
        } else if a == self.lattice {
            self.mass_at_one
        } else {
            self.interior
                .binary_search_by_key(&a, |&(site, _)| site)
                .map_or(0.0, |i| self.interior[i].1)
        }
    }

    /// All `(A, mass)` pairs including both endpoints.
    pub fn iter_intensities(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.lattice as f64;
        std::iter::once((0.0, self.mass_at_zero))
            .chain(self.interior.iter().map(move |&(a, m)| (a as f64 / n, m)))
            .chain(std::iter::once((1.0, self.mass_at_one)))
    }

    /// Expectation of `g(A)`.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.iter_intensities().map(|(a, m)| m * g(a)).sum()
    }
}

/// Mean intensity `Σ (a/N)·mass + 1·mass_at_one`.
pub fn mean_intensity(dist: &IntensityDistribution) -> f64 {
    let n = dist.lattice as f64;
    dist.interior.iter().map(|&(a, m)| a as f64 / n * m).sum::<f64>() + dist.mass_at_one
}
