//! Time model for bit, key and network-wide exchanges.
//!
//! One slot measures for `window` correlation times `τ = 1/B`; a secure bit
//! needs two slots on average, so one KE of `k` bits lasts `2·window·k·τ`.

use serde::{Deserialize, Serialize};

use crate::exchange::NoiseParams;
use crate::grid::Network;
use crate::schedule::{ke_count_closed_form, rounds_at_distance};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEFAULT_BANDWIDTH_SAFETY: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    pub tau_kljn: f64,
    pub slot_duration: f64,
    pub be_duration_avg: f64,
    pub ke_duration: f64,
    pub speed_of_light_c: f64,
    pub bandwidth_safety_factor: f64,
}

impl TimingModel {
    pub fn new(params: &NoiseParams, key_length: usize) -> Self {
        let tau_kljn = 1.0 / params.b_kljn;
        let slot_duration = params.measurement_window_factor as f64 * tau_kljn;
        let be_duration_avg = 2.0 * slot_duration;
        TimingModel {
            tau_kljn,
            slot_duration,
            be_duration_avg,
            ke_duration: key_length as f64 * be_duration_avg,
            speed_of_light_c: SPEED_OF_LIGHT,
            bandwidth_safety_factor: DEFAULT_BANDWIDTH_SAFETY,
        }
    }
}

pub fn slot_duration(params: &NoiseParams) -> f64 {
    TimingModel::new(params, 0).slot_duration
}

/// Average time to exchange a `key_length`-bit key over one loop.
pub fn ke_duration(params: &NoiseParams, key_length: usize) -> f64 {
    TimingModel::new(params, key_length).ke_duration
}

/// Pessimistic total: every KE lasts as long as the longest loop's, at `params.b_kljn`.
pub fn network_key_distribution_time(n: usize, params: &NoiseParams, key_length: usize) -> f64 {
    ke_count_closed_form(n) as f64 * ke_duration(params, key_length)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BandwidthCheck {
    Ok { limit_hz: f64 },
    Violation { max_admissible_hz: f64 },
}

impl BandwidthCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, BandwidthCheck::Ok { .. })
    }
}

/// `B ≤ (c / L) / safety_factor`.
pub fn validate_bandwidth(b_kljn: f64, loop_length_m: f64, safety_factor: f64) -> BandwidthCheck {
    let limit = SPEED_OF_LIGHT / loop_length_m / safety_factor;
    if b_kljn <= limit {
        BandwidthCheck::Ok { limit_hz: limit }
    } else {
        BandwidthCheck::Violation {
            max_admissible_hz: limit,
        }
    }
}

/// Extension beyond the uniform-KE model: each phase runs at the largest
/// bandwidth its loop length admits, so short loops finish sooner.
pub fn per_distance_time(network: &Network, params: &NoiseParams, key_length: usize, safety_factor: f64) -> f64 {
    let n = network.size();
    (1..=n)
        .map(|d| {
            let length = d as f64 * network.segment_length_m();
            let b = SPEED_OF_LIGHT / length / safety_factor;
            let p = NoiseParams { b_kljn: b, ..*params };
            rounds_at_distance(n, d) as f64 * ke_duration(&p, key_length)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub ke_count: usize,
    pub ke_duration_s: f64,
    pub total_s: f64,
}

pub fn timing_table(ns: impl IntoIterator<Item = usize>, params: &NoiseParams, key_length: usize) -> Vec<TimingRow> {
    let ke = ke_duration(params, key_length);
    ns.into_iter()
        .map(|n| TimingRow {
            n,
            ke_count: ke_count_closed_form(n),
            ke_duration_s: ke,
            total_s: network_key_distribution_time(n, params, key_length),
        })
        .collect()
}
