#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pools adjacent bins until every pooled bin reaches `min` under `weight`.
fn pool<T: Copy>(bins: &[T], weight: impl Fn(&[T]) -> f64, min: f64) -> Vec<Vec<T>> {
    let mut groups: Vec<Vec<T>> = Vec::new();
    let mut current = Vec::new();
    for &b in bins {
        current.push(b);
        if weight(&current) >= min {
            groups.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(current),
            None => groups.push(current),
        }
    }
    groups
}

fn upper_tail(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat)
}

/// p-value of the chi-square test that two equal-size samples share a law.
pub fn chi2_two_sample(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert_eq!(a.iter().sum::<u64>(), b.iter().sum::<u64>(), "equal sample sizes");
    let pairs: Vec<(u64, u64)> = a.iter().copied().zip(b.iter().copied()).collect();
    let groups = pool(&pairs, |g| g.iter().map(|&(x, y)| (x + y) as f64).sum(), 20.0);
    let stat: f64 = groups
        .iter()
        .map(|g| {
            let x: f64 = g.iter().map(|p| p.0 as f64).sum();
            let y: f64 = g.iter().map(|p| p.1 as f64).sum();
            (x - y).powi(2) / (x + y)
        })
        .sum();
    upper_tail(stat, groups.len() - 1)
}

/// p-value of the goodness-of-fit test of `counts` against `probs`.
pub fn chi2_fit(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let m: u64 = counts.iter().sum();
    let cells: Vec<(u64, f64)> = counts.iter().copied().zip(probs.iter().map(|p| p * m as f64)).collect();
    let groups = pool(&cells, |g| g.iter().map(|c| c.1).sum(), 10.0);
    let stat: f64 = groups
        .iter()
        .map(|g| {
            let o: f64 = g.iter().map(|c| c.0 as f64).sum();
            let e: f64 = g.iter().map(|c| c.1).sum();
            (o - e).powi(2) / e
        })
        .sum();
    upper_tail(stat, groups.len() - 1)
}

/// `|x − target| ≤ 3·sqrt(p(1 − p)/m)` with `p = target`.
pub fn within_3sd(freq: f64, target: f64, m: u64) -> bool {
    (freq - target).abs() <= 3.0 * (target * (1.0 - target) / m as f64).sqrt()
}
