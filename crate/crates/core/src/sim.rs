//! Full-network run: schedule, filter configuration, and every pairwise exchange.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rand::Rng;

use crate::adversary::{eve_guess_mixed_ordering, eve_observe, rank_test_observations, EveObservation, GuessReport, IndistinguishabilityReport, MIN_GUESS_OBSERVATIONS};
use crate::error::Result;
use crate::exchange::{exchange_key, simulate_slot, ExchangeReport, NoiseParams};
use crate::fabric::{modes_for_round, verify_round_isolation, IsolationViolation};
use crate::grid::Network;
use crate::schedule::{full_schedule, ke_count_closed_form, verify_schedule, ScheduleViolation};
use crate::seed::{derive_seed, loop_rng, rng_from};
use crate::timing::{network_key_distribution_time, slot_duration};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub params: NoiseParams,
    pub key_length: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub index: usize,
    pub phase_distance: usize,
    pub loops: Vec<(usize, usize)>,
    pub isolation_violations: Vec<IsolationViolation>,
    /// Slots used by the slowest loop of the round.
    pub max_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveSummary {
    pub mixed_slots: usize,
    pub lh_slots: usize,
    pub hl_slots: usize,
    pub rank_test: Option<IndistinguishabilityReport>,
    /// Present once enough mixed slots were observed.
    pub ordering_guess: Option<GuessReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSimulation {
    pub config: SimulationConfig,
    pub schedule_violations: Vec<ScheduleViolation>,
    pub round_count: usize,
    pub closed_form: usize,
    pub rounds: Vec<RoundResult>,
    /// One report per host pair, ordered by `(left, right)`.
    pub exchanges: Vec<ExchangeReport>,
    pub eve: EveSummary,
    pub simulated_elapsed_s: f64,
    pub model_elapsed_s: f64,
}

impl NetworkSimulation {
    pub fn isolation_clean(&self) -> bool {
        self.rounds.iter().all(|r| r.isolation_violations.is_empty())
    }

    pub fn total_bits(&self) -> usize {
        self.exchanges.iter().map(|e| e.key_length).sum()
    }

    pub fn total_bit_errors(&self) -> usize {
        self.exchanges.iter().map(|e| e.bit_errors).sum()
    }

    pub fn bit_error_rate(&self) -> f64 {
        let bits = self.total_bits();
        if bits == 0 {
            0.0
        } else {
            self.total_bit_errors() as f64 / bits as f64
        }
    }
}

/// Hex SHA-256 of a key packed MSB-first.
pub fn key_digest(bits: &[bool]) -> String {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | ((b as u8) << (7 - k))))
        .collect();
    let mut h = Sha256::new();
    h.update((bits.len() as u64).to_be_bytes());
    h.update(&bytes);
    hex::encode(h.finalize())
}

pub fn simulate_network(config: &SimulationConfig) -> Result<NetworkSimulation> {
    config.params.validate()?;
    let network = Network::new(config.n)?;
    let schedule = full_schedule(&network);
    let schedule_violations = verify_schedule(&schedule);

    let mut rounds = Vec::with_capacity(schedule.round_count());
    let mut exchanges = Vec::with_capacity(network.pair_count());
    for (index, (d, round)) in schedule.rounds().enumerate() {
        let state = modes_for_round(&network, round)?;
        let isolation_violations = verify_round_isolation(&state, round);
        let reports: Vec<ExchangeReport> = round
            .loops
            .par_iter()
            .map(|&lp| exchange_key(lp, config.key_length, &config.params, &mut loop_rng(config.seed, lp)))
            .collect::<Result<_>>()?;
        rounds.push(RoundResult {
            index,
            phase_distance: d,
            loops: round.loops.iter().map(|l| (l.left(), l.right())).collect(),
            isolation_violations,
            max_slots: reports.iter().map(|r| r.slots).max().unwrap_or(0),
        });
        exchanges.extend(reports);
    }
    exchanges.sort_by_key(|e| (e.left, e.right));

    let slot_s = slot_duration(&config.params);
    let simulated_elapsed_s = rounds.iter().map(|r| r.max_slots as f64 * slot_s).sum();

    Ok(NetworkSimulation {
        config: *config,
        schedule_violations,
        round_count: schedule.round_count(),
        closed_form: ke_count_closed_form(config.n),
        eve: eve_summary(&exchanges)?,
        rounds,
        exchanges,
        simulated_elapsed_s,
        model_elapsed_s: network_key_distribution_time(config.n, &config.params, config.key_length),
    })
}

/// Harness-side grouping of Eve's observations by the hidden ordering.
fn eve_summary(exchanges: &[ExchangeReport]) -> Result<EveSummary> {
    let mut lh: Vec<EveObservation> = Vec::new();
    let mut hl: Vec<EveObservation> = Vec::new();
    let mut mixed: Vec<(EveObservation, bool)> = Vec::new();
    for t in exchanges.iter().flat_map(|e| &e.trace) {
        if t.bit_a == t.bit_b {
            continue;
        }
        let alice_low = !t.bit_a;
        let obs = EveObservation {
            slot_index: mixed.len(),
            ..t.eve
        };
        mixed.push((obs, alice_low));
        if alice_low {
            lh.push(obs);
        } else {
            hl.push(obs);
        }
    }
    let rank_test = if lh.is_empty() || hl.is_empty() {
        None
    } else {
        Some(rank_test_observations(&lh, &hl)?)
    };
    let ordering_guess = if mixed.len() >= MIN_GUESS_OBSERVATIONS {
        let obs: Vec<EveObservation> = mixed.iter().map(|(o, _)| *o).collect();
        Some(eve_guess_mixed_ordering(&obs, |k| mixed[k].1, 0.99)?)
    } else {
        None
    };
    Ok(EveSummary {
        mixed_slots: mixed.len(),
        lh_slots: lh.len(),
        hl_slots: hl.len(),
        rank_test,
        ordering_guess,
    })
}

/// Result of an eavesdropper campaign over freshly simulated mixed slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveCampaign {
    pub slots: usize,
    pub lh_slots: usize,
    pub hl_slots: usize,
    pub ordering_guess: GuessReport,
    pub rank_test: IndistinguishabilityReport,
}

/// Simulates `slots` mixed slots with a uniformly random ordering each and
/// runs both eavesdropper analyses on them.
pub fn mixed_ordering_campaign(params: &NoiseParams, slots: usize, seed: u64, confidence: f64) -> Result<EveCampaign> {
    params.validate()?;
    let mut rng = rng_from(derive_seed(seed, &[EVE_CAMPAIGN_STREAM]));
    let mut obs = Vec::with_capacity(slots);
    let mut alice_low = Vec::with_capacity(slots);
    for k in 0..slots {
        let low: bool = rng.random();
        let record = simulate_slot(!low, low, params, &mut rng);
        obs.push(eve_observe(&record, params, k)?);
        alice_low.push(low);
    }
    let ordering_guess = eve_guess_mixed_ordering(&obs, |k| alice_low[k], confidence)?;
    let (lh, hl): (Vec<_>, Vec<_>) = obs.iter().zip(&alice_low).partition(|(_, &low)| low);
    let lh: Vec<EveObservation> = lh.into_iter().map(|(o, _)| *o).collect();
    let hl: Vec<EveObservation> = hl.into_iter().map(|(o, _)| *o).collect();
    Ok(EveCampaign {
        slots,
        lh_slots: lh.len(),
        hl_slots: hl.len(),
        rank_test: rank_test_observations(&lh, &hl)?,
        ordering_guess,
    })
}

const EVE_CAMPAIGN_STREAM: u64 = 0xE5E;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_length_and_bits() {
        assert_ne!(key_digest(&[true]), key_digest(&[true, false]));
        assert_ne!(key_digest(&[true, false]), key_digest(&[false, true]));
        assert_eq!(key_digest(&[]).len(), 64);
    }

    #[test]
    fn small_network_smoke() {
        let cfg = SimulationConfig {
            n: 3,
            params: NoiseParams::default(),
            key_length: 5,
            seed: 1,
        };
        let sim = simulate_network(&cfg).unwrap();
        assert_eq!(sim.exchanges.len(), 6);
        assert!(sim.exchanges.iter().all(|e| e.alice_key == e.bob_key));
        assert!(sim.isolation_clean());
        assert!(sim.schedule_violations.is_empty());
        assert_eq!(sim.round_count, 4);
        assert_eq!(sim, simulate_network(&cfg).unwrap());
    }
}
