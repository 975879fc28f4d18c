//! Passive eavesdropper.
//!
//! Eve reads the same channel mean squares as Alice and Bob but has no access
//! to either resistor choice. Nothing here reads [`ChannelRecord::truth`];
//! labels only enter through the explicit oracle argument of
//! [`eve_guess_mixed_ordering`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{resistance_from_mean_squares, ChannelRecord, MeasureChannel, NoiseParams};
use crate::seed::derive_seed;
use crate::stats::{mann_whitney, wilson_interval, Proportion, RankTest};

pub const MIN_GUESS_OBSERVATIONS: usize = 1000;

const SPLIT_SEED: u64 = 0x5EED_5911;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveObservation {
    pub slot_index: usize,
    pub r_loop_estimate: f64,
    pub u_mean_square: f64,
    pub i_mean_square: f64,
}

pub fn eve_observe(record: &ChannelRecord, params: &NoiseParams, slot_index: usize) -> Result<EveObservation> {
    if record.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: record.len(),
        });
    }
    let u_mean_square = record.u_mean_square();
    let i_mean_square = record.i_mean_square();
    Ok(EveObservation {
        slot_index,
        r_loop_estimate: resistance_from_mean_squares(u_mean_square, i_mean_square, params, MeasureChannel::Both)?,
        u_mean_square,
        i_mean_square,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    UMeanSquare,
    IMeanSquare,
    RLoop,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::UMeanSquare, Statistic::IMeanSquare, Statistic::RLoop];

    pub fn of(self, obs: &EveObservation) -> f64 {
        match self {
            Statistic::UMeanSquare => obs.u_mean_square,
            Statistic::IMeanSquare => obs.i_mean_square,
            Statistic::RLoop => obs.r_loop_estimate,
        }
    }
}

/// Decision stump: predicts `true` when `value > threshold` (or `<=` if inverted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub statistic: Statistic,
    pub threshold: f64,
    pub inverted: bool,
}

impl Stump {
    pub fn predict(&self, obs: &EveObservation) -> bool {
        (self.statistic.of(obs) > self.threshold) != self.inverted
    }
}

/// Best-accuracy stump for one statistic by sweeping every split point.
fn fit_stump(statistic: Statistic, obs: &[&EveObservation], labels: &[bool]) -> (Stump, usize) {
    let mut idx: Vec<usize> = (0..obs.len()).collect();
    idx.sort_by(|&a, &b| statistic.of(obs[a]).total_cmp(&statistic.of(obs[b])));
    let total_true = labels.iter().filter(|&&l| l).count();
    let n = obs.len();
    // Threshold below everything: predict all `true` above it.
    let mut best = (f64::NEG_INFINITY, total_true.max(n - total_true), total_true < n - total_true);
    let mut true_below = 0;
    for k in 0..n {
        if labels[idx[k]] {
            true_below += 1;
        }
        if k + 1 < n && statistic.of(obs[idx[k]]) == statistic.of(obs[idx[k + 1]]) {
            continue;
        }
        let below = k + 1;
        // predict true above: correct = false below + true above
        let correct = (below - true_below) + (total_true - true_below);
        let inv_correct = n - correct;
        let thr = statistic.of(obs[idx[k]]);
        if correct > best.1 {
            best = (thr, correct, false);
        }
        if inv_correct > best.1 {
            best = (thr, inv_correct, true);
        }
    }
    (
        Stump {
            statistic,
            threshold: best.0,
            inverted: best.2,
        },
        best.1,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessReport {
    pub stump: Stump,
    pub train_size: usize,
    /// Accuracy on the held-out half.
    pub accuracy: Proportion,
}

/// Fits the best single-threshold classifier over every recorded statistic
/// on one half of the observations and scores it on the other half. The
/// halves are a fixed hash partition of positions, so index-structured
/// labels cannot leak into the split.
pub fn threshold_classifier(observations: &[EveObservation], labels: &[bool], confidence: f64) -> Result<GuessReport> {
    assert_eq!(observations.len(), labels.len());
    if observations.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: observations.len(),
        });
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..observations.len()).partition(|&i| derive_seed(SPLIT_SEED, &[i as u64]) & 1 == 0);
    if train.is_empty() || test.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: observations.len(),
        });
    }
    let train_obs: Vec<&EveObservation> = train.iter().map(|&i| &observations[i]).collect();
    let train_labels: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
    let (stump, _) = Statistic::ALL
        .iter()
        .map(|&s| fit_stump(s, &train_obs, &train_labels))
        .max_by_key(|(_, correct)| *correct)
        .expect("at least one statistic");
    let correct = test
        .iter()
        .filter(|&&i| stump.predict(&observations[i]) == labels[i])
        .count();
    Ok(GuessReport {
        stump,
        train_size: train.len(),
        accuracy: wilson_interval(correct, test.len(), confidence),
    })
}

/// Eve's best attempt at telling `R_L|R_H` from `R_H|R_L` on mixed slots.
///
/// `truth` maps a slot index to `true` when Alice held `R_L`; it is used only
/// to label the training half and score the held-out half.
pub fn eve_guess_mixed_ordering<F>(observations: &[EveObservation], truth: F, confidence: f64) -> Result<GuessReport>
where
    F: Fn(usize) -> bool,
{
    if observations.len() < MIN_GUESS_OBSERVATIONS {
        return Err(Error::InsufficientSamples {
            needed: MIN_GUESS_OBSERVATIONS,
            got: observations.len(),
        });
    }
    let labels: Vec<bool> = observations.iter().map(|o| truth(o.slot_index)).collect();
    threshold_classifier(observations, &labels, confidence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndistinguishabilityReport {
    pub u_mean_square: RankTest,
    pub i_mean_square: RankTest,
}

impl IndistinguishabilityReport {
    /// Family-wise decision over both statistics (Bonferroni).
    pub fn rejects(&self, alpha: f64) -> bool {
        self.min_p_value() < alpha / 2.0
    }

    pub fn min_p_value(&self) -> f64 {
        self.u_mean_square.p_value.min(self.i_mean_square.p_value)
    }
}

pub fn rank_test_observations(a: &[EveObservation], b: &[EveObservation]) -> Result<IndistinguishabilityReport> {
    let col = |xs: &[EveObservation], s: Statistic| xs.iter().map(|o| s.of(o)).collect::<Vec<_>>();
    Ok(IndistinguishabilityReport {
        u_mean_square: mann_whitney(&col(a, Statistic::UMeanSquare), &col(b, Statistic::UMeanSquare))?,
        i_mean_square: mann_whitney(&col(a, Statistic::IMeanSquare), &col(b, Statistic::IMeanSquare))?,
    })
}

/// Rank-sum comparison of per-slot `<U²>` and `<I²>` between two record sets.
pub fn indistinguishability_test(
    lh_records: &[ChannelRecord],
    hl_records: &[ChannelRecord],
    params: &NoiseParams,
) -> Result<IndistinguishabilityReport> {
    if lh_records.is_empty() || hl_records.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 1,
            got: lh_records.len().min(hl_records.len()),
        });
    }
    let observe = |rs: &[ChannelRecord]| -> Result<Vec<EveObservation>> {
        rs.iter().enumerate().map(|(k, r)| eve_observe(r, params, k)).collect()
    };
    rank_test_observations(&observe(lh_records)?, &observe(hl_records)?)
}
