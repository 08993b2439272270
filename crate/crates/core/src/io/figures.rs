//! Plot data for the distribution figures.
//!
//! Each figure is a list of labelled `(x, value)` rows. Continuous densities
//! use the label `density`, lattice masses `mass`, and the δ-masses at the
//! endpoints `mass_at_zero` / `mass_at_one`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::config::Method;
use crate::analytic::{
    binomial_distribution, gaussian_pdf, rotate_intensity, IntensityDistribution, RotatedDensity, RotationAngle,
};
use crate::experiment::{run_ensemble_with, DeviceConfig};
use crate::harness::Workers;
use crate::sp::Budget;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Exit intensity distribution of a short walk, Gaussian by default.
    Fig2,
    /// Exit intensity distribution of a long walk with endpoint masses.
    Fig3,
    /// Density of the rotated intensity `B` at `φ = π/2`, `A0 = 1/2`.
    Fig6,
    /// `B(A, φ)` against `A`.
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig2, Figure::Fig3, Figure::Fig6, Figure::Fig8];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig6 => "fig6",
            Figure::Fig8 => "fig8",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown figure {s:?}; expected fig2, fig3, fig6 or fig8")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FigureRow {
    pub kind: &'static str,
    pub x: f64,
    pub value: f64,
}

impl FigureRow {
    fn new(kind: &'static str, x: f64, value: f64) -> Self {
        FigureRow { kind, x, value }
    }
}

/// Inputs for a figure. Fields a figure does not use are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistParams {
    pub lattice: u64,
    pub a0: f64,
    /// Spread `ε√n`; the walk length is `n = round((σN)²)` moves.
    pub sigma: f64,
    pub phi: f64,
    pub method: Method,
    pub points: usize,
    pub trajectories: u64,
    pub seed: u64,
    #[serde(skip)]
    pub workers: Workers,
}

impl DistParams {
    pub fn defaults_for(figure: Figure) -> Self {
        let base = DistParams {
            lattice: 1000,
            a0: 0.5,
            sigma: 0.15,
            phi: 0.0,
            method: Method::Gaussian,
            points: 201,
            trajectories: 100_000,
            seed: 0,
            workers: Workers::Global,
        };
        match figure {
            Figure::Fig2 | Figure::Fig6 => base,
            Figure::Fig3 => DistParams {
                a0: 2.0 / 3.0,
                sigma: 0.3,
                method: Method::MonteCarlo,
                ..base
            },
            Figure::Fig8 => DistParams {
                phi: std::f64::consts::FRAC_PI_4,
                ..base
            },
        }
    }

    pub fn moves(&self) -> u64 {
        (self.sigma * self.lattice as f64).powi(2).round() as u64
    }

    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config("need at least 2 points".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::out_of_range("sigma", self.sigma, "(0, ∞)"));
        }
        Ok(())
    }
}

pub fn figure_rows(figure: Figure, p: &DistParams) -> Result<Vec<FigureRow>> {
    p.validate()?;
    match figure {
        Figure::Fig2 | Figure::Fig3 => intensity_distribution(p),
        Figure::Fig6 => rotated_density(p.sigma, p.points),
        Figure::Fig8 => Ok(rotation_curve(RotationAngle::new(p.phi)?, p.points)),
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| {
        if i + 1 == points {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (points - 1) as f64
        }
    })
}

/// Exit distribution of the `D1` walk, by the requested method.
pub fn intensity_distribution(p: &DistParams) -> Result<Vec<FigureRow>> {
    let config = DeviceConfig::new(p.lattice, p.a0, 0.0, Budget::Limited(p.moves()), RotationAngle::ZERO)?;
    match p.method {
        Method::Gaussian => {
            let a0 = config.quantized_intensity();
            let (below, above) = crate::analytic::tail_masses(a0, p.sigma);
            let mut rows: Vec<FigureRow> = grid(0.0, 1.0, p.points)
                .map(|x| FigureRow::new("density", x, gaussian_pdf(x, a0, p.sigma)))
                .collect();
            rows.push(FigureRow::new("mass_at_zero", 0.0, below));
            rows.push(FigureRow::new("mass_at_one", 1.0, above));
            Ok(rows)
        }
        Method::Exact => Ok(mass_rows(&binomial_distribution(config.a0(), p.lattice, p.moves())?)),
        Method::MonteCarlo => {
            let (ensemble, _) = run_ensemble_with(&config, p.trajectories, p.seed, p.workers)?;
            Ok(mass_rows(&ensemble.distribution()?))
        }
    }
}

fn mass_rows(dist: &IntensityDistribution) -> Vec<FigureRow> {
    let n = dist.lattice() as f64;
    let mut rows: Vec<FigureRow> = dist
        .interior()
        .iter()
        .map(|&(a, m)| FigureRow::new("mass", a as f64 / n, m))
        .collect();
    rows.push(FigureRow::new("mass_at_zero", 0.0, dist.mass_at_zero()));
    rows.push(FigureRow::new("mass_at_one", 1.0, dist.mass_at_one()));
    rows
}

/// Density of `B` on `(1/2, 1)` at cell midpoints; it diverges at `B = 1`.
pub fn rotated_density(sigma: f64, points: usize) -> Result<Vec<FigureRow>> {
    let density = RotatedDensity::new(sigma)?;
    (0..points)
        .map(|i| {
            let b = 0.5 + 0.5 * (i as f64 + 0.5) / points as f64;
            Ok(FigureRow::new("density", b, density.pdf(b)?))
        })
        .collect()
}

/// `(A, B(A, φ))` for `A` on an even grid over `[0, 1]`.
pub fn rotation_curve(phi: RotationAngle, points: usize) -> Vec<FigureRow> {
    grid(0.0, 1.0, points)
        .map(|a| FigureRow::new("curve", a, rotate_intensity(a, phi)))
        .collect()
}
