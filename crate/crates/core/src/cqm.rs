//! Conventional three-outcome model of a partial absorber.
//!
//! A target with spin-up intensity `A0` leaves an absorber of absorbance `f`
//! as one of three pure states: spin-up and absorbed (probability `f·A0`),
//! spin-down and transmitted (`f·(1 − A0)`), or unchanged (`1 − f`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{check_intensity, rotate_intensity, RotationAngle};
use crate::{Error, Result};

pub(crate) fn check_absorbance(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::out_of_range("f", f, "[0, 1]"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CqmOutcomeProbs {
    pub p_absorbed_up: f64,
    pub p_spin_down: f64,
    pub p_original: f64,
}

pub fn cqm_outcome_probs(a0: f64, f: f64) -> Result<CqmOutcomeProbs> {
    check_intensity("A0", a0)?;
    check_absorbance(f)?;
    Ok(CqmOutcomeProbs {
        p_absorbed_up: f * a0,
        p_spin_down: f * (1.0 - a0),
        p_original: 1.0 - f,
    })
}

/// Mean fraction of all targets counted by a detector rotated by `φ` behind
/// the absorber:
///
/// `F = (1 − f)A0 cos²(φ/2) + (1 − A0) sin²(φ/2) + (1 − f) sin φ √(A0(1 − A0))`.
pub fn cqm_d2_fraction(a0: f64, f: f64, phi: RotationAngle) -> Result<f64> {
    check_intensity("A0", a0)?;
    check_absorbance(f)?;
    let (s, c) = (phi.radians() / 2.0).sin_cos();
    let kept = 1.0 - f;
    let value = kept * a0 * c * c + (1.0 - a0) * s * s + kept * phi.radians().sin() * (a0 * (1.0 - a0)).sqrt();
    Ok(value.clamp(0.0, 1.0))
}

/// Same quantity as [`cqm_d2_fraction`], summed outcome by outcome: the
/// spin-down branch is seen with `sin²(φ/2)`, the surviving original state with
/// its rotated intensity.
pub fn cqm_d2_fraction_by_outcome(a0: f64, f: f64, phi: RotationAngle) -> Result<f64> {
    let probs = cqm_outcome_probs(a0, f)?;
    let down_seen = (phi.radians() / 2.0).sin().powi(2);
    Ok(probs.p_spin_down * down_seen + probs.p_original * rotate_intensity(a0, phi))
}

/// Total spin-up conversions over both devices: `f·A0 + (1 − A0)·0 + (1 − f)·A0`.
pub fn cqm_total_spinup(a0: f64, f: f64) -> Result<f64> {
    let probs = cqm_outcome_probs(a0, f)?;
    let total = probs.p_absorbed_up + probs.p_spin_down * 0.0 + probs.p_original * a0;
    debug_assert!((total - a0).abs() <= 4.0 * f64::EPSILON, "{total} != {a0}");
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CqmOutcome {
    AbsorbedByD1,
    DetectedByD2,
    /// Passed both devices without being counted.
    Transmitted,
}

/// Draws one target through the absorber and the rotated detector.
pub fn cqm_sample_outcome<R: Rng + ?Sized>(a0: f64, f: f64, phi: RotationAngle, rng: &mut R) -> Result<CqmOutcome> {
    let probs = cqm_outcome_probs(a0, f)?;
    let u: f64 = rng.random();
    let detect_prob = if u < probs.p_absorbed_up {
        return Ok(CqmOutcome::AbsorbedByD1);
    } else if u < probs.p_absorbed_up + probs.p_spin_down {
        (phi.radians() / 2.0).sin().powi(2)
    } else {
        rotate_intensity(a0, phi)
    };
    Ok(if rng.random::<f64>() < detect_prob {
        CqmOutcome::DetectedByD2
    } else {
        CqmOutcome::Transmitted
    })
}

/// Surface `(A0, φ, F)` on the grid `A0 ∈ {0, 0.05, …, 1}`, `φ ∈ {0, π/40, …, π}`.
pub fn d2_fraction_surface(f: f64) -> Result<Vec<(f64, f64, f64)>> {
    check_absorbance(f)?;
    let mut rows = Vec::with_capacity(21 * 41);
    for i in 0..=20 {
        let a0 = i as f64 / 20.0;
        for j in 0..=40 {
            let phi = RotationAngle::new(std::f64::consts::PI * j as f64 / 40.0)?;
            rows.push((a0, phi.radians(), cqm_d2_fraction(a0, f, phi)?));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn phi(x: f64) -> RotationAngle {
        RotationAngle::new(x).unwrap()
    }

    #[test]
    fn outcome_probs_examples() {
        let p = cqm_outcome_probs(0.7, 0.0).unwrap();
        assert_eq!((p.p_absorbed_up, p.p_spin_down, p.p_original), (0.0, 0.0, 1.0));
        for f in [0.0, 0.25, 1.0] {
            let p = cqm_outcome_probs(1.0, f).unwrap();
            assert_eq!((p.p_absorbed_up, p.p_spin_down, p.p_original), (f, 0.0, 1.0 - f));
            let p = cqm_outcome_probs(0.0, f).unwrap();
            assert_eq!((p.p_absorbed_up, p.p_spin_down, p.p_original), (0.0, f, 1.0 - f));
        }
        assert!(cqm_outcome_probs(1.1, 0.5).is_err());
        assert!(cqm_outcome_probs(0.5, -0.1).is_err());
    }

    #[test]
    fn d2_fraction_examples() {
        for (a0, f) in [(0.3, 0.2), (2.0 / 3.0, 0.9), (1.0, 0.5)] {
            assert!((cqm_d2_fraction(a0, f, RotationAngle::ZERO).unwrap() - (1.0 - f) * a0).abs() < 1e-15);
        }
        assert!((cqm_d2_fraction(0.5, 1.0, RotationAngle::QUARTER_TURN).unwrap() - 0.25).abs() < 1e-15);
        for p in [0.0, 0.7, PI / 2.0, 2.9, PI] {
            let v = cqm_d2_fraction(0.35, 0.0, phi(p)).unwrap();
            assert!((v - rotate_intensity(0.35, phi(p))).abs() < 1e-15);
        }
        assert!(cqm_d2_fraction(0.5, 2.0, RotationAngle::ZERO).is_err());
    }

    #[test]
    fn total_spinup_is_a0() {
        assert_eq!(cqm_total_spinup(0.5, 0.3).unwrap(), 0.5);
        assert_eq!(cqm_total_spinup(0.0, 0.8).unwrap(), 0.0);
        assert_eq!(cqm_total_spinup(1.0, 0.8).unwrap(), 1.0);
    }

    #[test]
    fn sampling_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(cqm_sample_outcome(1.0, 0.0, RotationAngle::ZERO, &mut rng).unwrap(), CqmOutcome::DetectedByD2);
            assert_eq!(cqm_sample_outcome(1.0, 1.0, phi(1.0), &mut rng).unwrap(), CqmOutcome::AbsorbedByD1);
        }
    }

    #[test]
    fn sampling_frequency_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 1_000_000u64;
        for (a0, f, p) in [(0.5, 0.4, PI / 2.0), (0.2, 0.7, PI / 3.0)] {
            let expected = cqm_d2_fraction(a0, f, phi(p)).unwrap();
            let hits = (0..m)
                .filter(|_| cqm_sample_outcome(a0, f, phi(p), &mut rng).unwrap() == CqmOutcome::DetectedByD2)
                .count();
            let freq = hits as f64 / m as f64;
            let sd = (expected * (1.0 - expected) / m as f64).sqrt();
            assert!((freq - expected).abs() < 3.0 * sd, "{freq} vs {expected}");
        }
    }

    #[test]
    fn surface_grid_shape() {
        let rows = d2_fraction_surface(1.0).unwrap();
        assert_eq!(rows.len(), 21 * 41);
        let (_, _, f) = rows.iter().find(|r| r.0 == 0.5 && (r.1 - PI / 2.0).abs() < 1e-15).unwrap();
        assert!((f - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn closed_form_equals_outcome_sum(a0 in 0.0f64..=1.0, f in 0.0f64..=1.0, p in 0.0f64..=PI) {
            let closed = cqm_d2_fraction(a0, f, phi(p)).unwrap();
            let summed = cqm_d2_fraction_by_outcome(a0, f, phi(p)).unwrap();
            prop_assert!((closed - summed).abs() < 1e-12);
        }

        #[test]
        fn fraction_non_increasing_in_absorbance(a0 in 0.0f64..=1.0, f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0, p in 0.0f64..=PI) {
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let at_lo = cqm_d2_fraction(a0, lo, phi(p)).unwrap();
            let at_hi = cqm_d2_fraction(a0, hi, phi(p)).unwrap();
            prop_assert!(at_hi <= at_lo + 1e-15);
        }

        #[test]
        fn zero_rotation_plus_absorbed_is_a0(a0 in 0.0f64..=1.0, f in 0.0f64..=1.0) {
            let d2 = cqm_d2_fraction(a0, f, RotationAngle::ZERO).unwrap();
            prop_assert!((d2 + f * a0 - a0).abs() < 1e-15);
        }
    }
}
