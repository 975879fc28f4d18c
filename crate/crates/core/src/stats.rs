//! Rank-sum test and binomial confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Two-sided standard normal quantile for a central `confidence` mass.
pub fn z_for_confidence(confidence: f64) -> f64 {
    std_normal().inverse_cdf(0.5 + confidence / 2.0)
}

/// Mann–Whitney U test (normal approximation, tie-corrected).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankTest {
    pub n_x: usize,
    pub n_y: usize,
    /// U statistic of the first sample.
    pub u: f64,
    pub z: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Cliff's delta, `P(X > Y) - P(X < Y)`.
    pub effect_size: f64,
}

/// Average ranks (1-based) and the tie term `Σ(t³ - t)`.
fn ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            out[k] = avg;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (out, ties)
}

pub fn mann_whitney(x: &[f64], y: &[f64]) -> Result<RankTest> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 1,
            got: x.len().min(y.len()),
        });
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidParams("NaN in rank-test sample".into()));
    }
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (r, ties) = ranks(&pooled);
    let rank_sum_x: f64 = r[..x.len()].iter().sum();
    let u = rank_sum_x - n1 * (n1 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let n = n1 + n2;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)).max(1.0));
    let (z, p_value) = if var <= 0.0 {
        (0.0, 1.0)
    } else {
        let dev = ((u - mean).abs() - 0.5).max(0.0);
        let z = dev / var.sqrt() * (u - mean).signum();
        let p = 2.0 * (1.0 - std_normal().cdf(z.abs()));
        (z, p.min(1.0))
    };
    Ok(RankTest {
        n_x: x.len(),
        n_y: y.len(),
        u,
        z,
        p_value,
        effect_size: 2.0 * u / (n1 * n2) - 1.0,
    })
}

/// Binomial proportion with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl Proportion {
    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

pub fn wilson_interval(successes: usize, trials: usize, confidence: f64) -> Proportion {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_for_confidence(confidence);
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Proportion {
        successes,
        trials,
        estimate: p,
        ci_low: (center - half).max(0.0),
        ci_high: (center + half).min(1.0),
        confidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        let (r, t) = ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, 6.0);
    }

    #[test]
    fn u_statistic_by_pair_counting() {
        let x = [1.2, 3.4, 0.5, 7.7, 2.2];
        let y = [0.1, 2.9, 6.0, 4.4];
        let brute: f64 = x
            .iter()
            .flat_map(|a| y.iter().map(move |b| if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 }))
            .sum();
        let t = mann_whitney(&x, &y).unwrap();
        assert_eq!(t.u, brute);
        assert!((t.effect_size - (2.0 * brute / 20.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn known_p_value() {
        // x entirely above y, n = 10 each: U = 100, mean 50, var 175
        let x: Vec<f64> = (10..20).map(f64::from).collect();
        let y: Vec<f64> = (0..10).map(f64::from).collect();
        let t = mann_whitney(&x, &y).unwrap();
        let z = (50.0 - 0.5) / 175f64.sqrt();
        assert!((t.z - z).abs() < 1e-12);
        assert!((t.p_value - 1.826e-4).abs() < 2e-6, "p {}", t.p_value);
        assert_eq!(t.effect_size, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        let same = [2.0; 8];
        let t = mann_whitney(&same, &same).unwrap();
        assert_eq!(t.p_value, 1.0);
        let x = [1.0, 2.0, 3.0];
        let t = mann_whitney(&x, &x).unwrap();
        assert!(t.p_value > 0.99);
        assert!(mann_whitney(&[], &x).is_err());
    }

    #[test]
    fn wilson_reference() {
        // 50/100 at 95 %: 0.4038 .. 0.5962
        let p = wilson_interval(50, 100, 0.95);
        assert!((p.ci_low - 0.40383).abs() < 1e-4);
        assert!((p.ci_high - 0.59617).abs() < 1e-4);
        assert!(p.contains(0.5));
        let p = wilson_interval(0, 10, 0.99);
        assert_eq!(p.ci_low, 0.0);
        assert!((z_for_confidence(0.99) - 2.575_829).abs() < 1e-5);
    }
}
