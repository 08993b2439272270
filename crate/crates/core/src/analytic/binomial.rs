use statrs::function::factorial::ln_binomial;

use super::IntensityDistribution;
use crate::{Error, Result};

/// Exact law of `a` after `n_moves` fair ±1 moves from `a0`, valid while no
/// path can have touched an endpoint.
///
/// Site `a0 + m` (with `m ≡ n (mod 2)`, `|m| ≤ n`) carries mass
/// `2⁻ⁿ · C(n, (m + n)/2)`.
pub fn binomial_distribution(a0: u64, lattice: u64, n_moves: u64) -> Result<IntensityDistribution> {
    if a0 > lattice {
        return Err(Error::out_of_range("a0", a0 as f64, "[0, N]"));
    }
    if n_moves >= a0 || a0 + n_moves >= lattice {
        return Err(Error::Validity(format!(
            "{n_moves} moves from a0 = {a0} can reach an endpoint of [0, {lattice}]"
        )));
    }
    let ln2n = n_moves as f64 * std::f64::consts::LN_2;
    let mut interior: Vec<(u64, f64)> = (0..=n_moves)
        .map(|ups| {
            let site = a0 + 2 * ups - n_moves;
            (site, (ln_binomial(n_moves, ups) - ln2n).exp())
        })
        .collect();
    // The mass function is symmetric and sums to one; renormalize away the
    // ~1e-15 rounding left by the log-gamma evaluation.
    let total: f64 = interior.iter().map(|&(_, m)| m).sum();
    for (_, m) in &mut interior {
        *m /= total;
    }
    IntensityDistribution::new(lattice, interior, 0.0, 0.0)
}
