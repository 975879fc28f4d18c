//! Noise-based bit exchange over a single loop.
//!
//! Each slot both parties connect `R_L` (bit 0) or `R_H` (bit 1) with a noise
//! generator at the common effective temperature. The channel mean squares
//! follow the Johnson formula
//!
//! ```text
//! <U²> = 4 k T_eff R_loop B        <I²> = 4 k T_eff B / R_loop
//! ```
//!
//! with `R_loop = R_A + R_B`. Knowing its own resistor, each party reads the
//! other's bit from the loop resistance whenever the choices differ.

use std::cell::Cell;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::adversary::{eve_observe, EveObservation};
use crate::error::{Error, Result};
use crate::grid::Loop;

pub const BOLTZMANN_K: f64 = 1.380_649e-23;

pub type Bit = bool;

/// Physical parameters of a KLJN exchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Effective noise temperature, K.
    pub t_eff: f64,
    /// Noise bandwidth, Hz.
    pub b_kljn: f64,
    /// Resistance for bit 0, Ω.
    pub r_low: f64,
    /// Resistance for bit 1, Ω.
    pub r_high: f64,
    pub boltzmann_k: f64,
    /// Correlation times per measurement slot.
    pub measurement_window_factor: usize,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            t_eff: 1e9,
            b_kljn: 1e4,
            r_low: 1e3,
            r_high: 1e4,
            boltzmann_k: BOLTZMANN_K,
            measurement_window_factor: 100,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.r_low) && positive(self.r_high) && self.r_low < self.r_high) {
            return Err(Error::InvalidParams(format!(
                "need 0 < r_low < r_high, got r_low={} r_high={}",
                self.r_low, self.r_high
            )));
        }
        if !positive(self.t_eff) {
            return Err(Error::InvalidParams(format!("t_eff must be positive, got {}", self.t_eff)));
        }
        if !positive(self.b_kljn) {
            return Err(Error::InvalidParams(format!("b_kljn must be positive, got {}", self.b_kljn)));
        }
        if !positive(self.boltzmann_k) {
            return Err(Error::InvalidParams("boltzmann_k must be positive".into()));
        }
        if self.measurement_window_factor == 0 {
            return Err(Error::InvalidParams("measurement_window_factor must be at least 1".into()));
        }
        Ok(())
    }

    /// `4 k T_eff B`, the noise power per ohm.
    pub fn noise_scale(&self) -> f64 {
        4.0 * self.boltzmann_k * self.t_eff * self.b_kljn
    }

    pub fn resistor(&self, bit: Bit) -> f64 {
        if bit {
            self.r_high
        } else {
            self.r_low
        }
    }

    /// Nyquist rate of the ideal `[0, B]` band.
    pub fn sample_rate(&self) -> f64 {
        2.0 * self.b_kljn
    }

    /// Samples per slot: window factor × samples per correlation time.
    pub fn samples_per_slot(&self) -> usize {
        2 * self.measurement_window_factor
    }

    /// The three possible loop resistances: LL, mixed, HH.
    pub fn loop_hypotheses(&self) -> [f64; 3] {
        [2.0 * self.r_low, self.r_low + self.r_high, 2.0 * self.r_high]
    }
}

/// Closed-form `(<U²>, <I²>)` for a loop resistance.
pub fn expected_mean_squares(r_loop: f64, params: &NoiseParams) -> Result<(f64, f64)> {
    if !(r_loop.is_finite() && r_loop > 0.0) {
        return Err(Error::NonPositiveResistance(r_loop));
    }
    let s = params.noise_scale();
    Ok((s * r_loop, s / r_loop))
}

/// Hidden resistor choices of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotTruth {
    pub bit_a: Bit,
    pub bit_b: Bit,
}

impl SlotTruth {
    pub fn is_mixed(self) -> bool {
        self.bit_a != self.bit_b
    }
}

thread_local! {
    static TRUTH_READS: Cell<u64> = const { Cell::new(0) };
}

/// Number of ground-truth reads made on this thread.
pub fn truth_reads() -> u64 {
    TRUTH_READS.with(Cell::get)
}

/// Sampled channel voltage and current over one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRecord {
    pub u_samples: Vec<f64>,
    pub i_samples: Vec<f64>,
    pub sample_rate: f64,
    truth: SlotTruth,
}

impl ChannelRecord {
    pub fn from_parts(u_samples: Vec<f64>, i_samples: Vec<f64>, sample_rate: f64, truth: SlotTruth) -> Self {
        assert_eq!(u_samples.len(), i_samples.len(), "u and i traces must have equal length");
        ChannelRecord {
            u_samples,
            i_samples,
            sample_rate,
            truth,
        }
    }

    /// Ground truth for test oracles. Every call is counted in [`truth_reads`].
    pub fn truth(&self) -> SlotTruth {
        TRUTH_READS.with(|c| c.set(c.get() + 1));
        self.truth
    }

    pub fn len(&self) -> usize {
        self.u_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_samples.is_empty()
    }

    pub fn u_mean_square(&self) -> f64 {
        mean_square(&self.u_samples)
    }

    pub fn i_mean_square(&self) -> f64 {
        mean_square(&self.i_samples)
    }
}

pub fn mean_square(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64
}

/// One measurement slot with the given resistor choices.
///
/// Generator voltages are i.i.d. Gaussian at the Nyquist rate with variance
/// `4kT_eff R B`. The current is the Kirchhoff loop current
/// `(U_A - U_B) / (R_A + R_B)`. The voltage is the divider voltage scaled by
/// `R_loop / sqrt(R_A R_B)` so that it reads the loop resistance; it stays
/// uncorrelated with the current and symmetric under swapping the parties.
pub fn simulate_slot<R: Rng + ?Sized>(bit_a: Bit, bit_b: Bit, params: &NoiseParams, rng: &mut R) -> ChannelRecord {
    let ra = params.resistor(bit_a);
    let rb = params.resistor(bit_b);
    let s = params.noise_scale();
    let (sigma_a, sigma_b) = ((s * ra).sqrt(), (s * rb).sqrt());
    let (gain_a, gain_b) = ((rb / ra).sqrt(), (ra / rb).sqrt());
    let r_loop = ra + rb;
    let m = params.samples_per_slot();
    let mut u = Vec::with_capacity(m);
    let mut i = Vec::with_capacity(m);
    for _ in 0..m {
        let za: f64 = rng.sample(StandardNormal);
        let zb: f64 = rng.sample(StandardNormal);
        let (ua, ub) = (sigma_a * za, sigma_b * zb);
        u.push(ua * gain_a + ub * gain_b);
        i.push((ua - ub) / r_loop);
    }
    ChannelRecord {
        u_samples: u,
        i_samples: i,
        sample_rate: params.sample_rate(),
        truth: SlotTruth { bit_a, bit_b },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureChannel {
    Voltage,
    Current,
    Both,
}

/// Loop resistance from measured mean squares by inverting the Johnson formula.
pub fn resistance_from_mean_squares(u_ms: f64, i_ms: f64, params: &NoiseParams, channel: MeasureChannel) -> Result<f64> {
    let s = params.noise_scale();
    let from_u = || {
        if u_ms > 0.0 {
            Ok(u_ms / s)
        } else {
            Err(Error::EstimationFailed("zero voltage mean square"))
        }
    };
    let from_i = || {
        if i_ms > 0.0 {
            Ok(s / i_ms)
        } else {
            Err(Error::EstimationFailed("zero current mean square"))
        }
    };
    match channel {
        MeasureChannel::Voltage => from_u(),
        MeasureChannel::Current => from_i(),
        MeasureChannel::Both => Ok((from_u()? * from_i()?).sqrt()),
    }
}

pub fn estimate_loop_resistance(record: &ChannelRecord, params: &NoiseParams, channel: MeasureChannel) -> Result<f64> {
    if record.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: record.len(),
        });
    }
    resistance_from_mean_squares(record.u_mean_square(), record.i_mean_square(), params, channel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    SecureBit,
    DiscardSame,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub classification: Classification,
    pub inferred_peer_bit: Option<Bit>,
    pub r_loop_estimate: f64,
}

/// Nearest loop-resistance hypothesis on a log scale, i.e. thresholds at the
/// geometric midpoints of `{2R_L, R_L+R_H, 2R_H}`.
pub fn classify_slot(r_estimate: f64, own_bit: Bit, params: &NoiseParams) -> SlotOutcome {
    let [ll, mixed, hh] = params.loop_hypotheses();
    let lo_mid = (ll * mixed).sqrt();
    let hi_mid = (mixed * hh).sqrt();
    let (classification, inferred_peer_bit) = if r_estimate < lo_mid {
        if own_bit {
            (Classification::Indeterminate, None)
        } else {
            (Classification::DiscardSame, None)
        }
    } else if r_estimate > hi_mid {
        if own_bit {
            (Classification::DiscardSame, None)
        } else {
            (Classification::Indeterminate, None)
        }
    } else {
        (Classification::SecureBit, Some(!own_bit))
    };
    SlotOutcome {
        classification,
        inferred_peer_bit,
        r_loop_estimate: r_estimate,
    }
}

/// Per-slot row of an exchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotTrace {
    pub slot: usize,
    pub bit_a: Bit,
    pub bit_b: Bit,
    pub r_estimate: f64,
    pub alice: Classification,
    pub bob: Classification,
    pub kept: bool,
    pub eve: EveObservation,
}

/// Result of exchanging one key over one loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeReport {
    pub left: usize,
    pub right: usize,
    pub key_length: usize,
    /// Alice's key: her own resistor bits on kept slots.
    pub alice_key: Vec<Bit>,
    /// Bob's key: his inferred Alice bits on kept slots.
    pub bob_key: Vec<Bit>,
    pub agreement: Vec<bool>,
    pub slots: usize,
    pub kept_slots: usize,
    pub discarded_same: usize,
    pub indeterminate: usize,
    /// Slots where exactly one party saw a secure bit.
    pub disputed: usize,
    /// Slots where Alice's classification contradicts the hidden choices.
    pub misclassified: usize,
    pub bit_errors: usize,
    pub bit_error_rate: f64,
    pub trace: Vec<SlotTrace>,
}

impl ExchangeReport {
    pub fn keys_agree(&self) -> bool {
        self.bit_errors == 0
    }
}

fn truth_classification(truth: SlotTruth) -> Classification {
    if truth.is_mixed() {
        Classification::SecureBit
    } else {
        Classification::DiscardSame
    }
}

/// Runs slots with fresh random bits until `key_length` slots are kept.
///
/// A slot is kept when both parties classify it as a secure bit; any other
/// combination is discarded by public announcement.
pub fn exchange_key<R: Rng + ?Sized>(lp: Loop, key_length: usize, params: &NoiseParams, rng: &mut R) -> Result<ExchangeReport> {
    params.validate()?;
    let mut report = ExchangeReport {
        left: lp.left(),
        right: lp.right(),
        key_length,
        alice_key: Vec::with_capacity(key_length),
        bob_key: Vec::with_capacity(key_length),
        agreement: Vec::with_capacity(key_length),
        slots: 0,
        kept_slots: 0,
        discarded_same: 0,
        indeterminate: 0,
        disputed: 0,
        misclassified: 0,
        bit_errors: 0,
        bit_error_rate: 0.0,
        trace: Vec::new(),
    };
    while report.kept_slots < key_length {
        let bit_a: Bit = rng.random();
        let bit_b: Bit = rng.random();
        let record = simulate_slot(bit_a, bit_b, params, rng);
        let slot = report.slots;
        let r_est = estimate_loop_resistance(&record, params, MeasureChannel::Both)?;
        let alice = classify_slot(r_est, bit_a, params);
        let bob = classify_slot(r_est, bit_b, params);
        let truth = SlotTruth { bit_a, bit_b };

        if alice.classification != truth_classification(truth) {
            report.misclassified += 1;
        }
        let kept = match (alice.classification, bob.classification) {
            (Classification::SecureBit, Classification::SecureBit) => {
                let bob_bit = bob.inferred_peer_bit.expect("secure bit carries a peer bit");
                report.alice_key.push(bit_a);
                report.bob_key.push(bob_bit);
                report.agreement.push(bit_a == bob_bit);
                if bit_a != bob_bit {
                    report.bit_errors += 1;
                }
                report.kept_slots += 1;
                true
            }
            (Classification::SecureBit, _) | (_, Classification::SecureBit) => {
                report.disputed += 1;
                false
            }
            (Classification::Indeterminate, _) | (_, Classification::Indeterminate) => {
                report.indeterminate += 1;
                false
            }
            _ => {
                report.discarded_same += 1;
                false
            }
        };
        report.trace.push(SlotTrace {
            slot,
            bit_a,
            bit_b,
            r_estimate: r_est,
            alice: alice.classification,
            bob: bob.classification,
            kept,
            eve: eve_observe(&record, params, slot)?,
        });
        report.slots += 1;
    }
    if key_length > 0 {
        report.bit_error_rate = report.bit_errors as f64 / key_length as f64;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Network;
    use crate::seed::rng_from;

    fn p() -> NoiseParams {
        NoiseParams::default()
    }

    #[test]
    fn params_validation() {
        assert!(p().validate().is_ok());
        assert!(NoiseParams { r_low: 5.0, r_high: 5.0, ..p() }.validate().is_err());
        assert!(NoiseParams { r_low: -1.0, ..p() }.validate().is_err());
        assert!(NoiseParams { t_eff: 0.0, ..p() }.validate().is_err());
        assert!(NoiseParams { b_kljn: 0.0, ..p() }.validate().is_err());
    }

    #[test]
    fn expected_mean_squares_shape() {
        let (u1, i1) = expected_mean_squares(2e3, &p()).unwrap();
        let (u2, i2) = expected_mean_squares(4e3, &p()).unwrap();
        assert!((u2 / u1 - 2.0).abs() < 1e-12);
        assert!((i1 / i2 - 2.0).abs() < 1e-12);
        let s = p().noise_scale();
        assert!((u1 * i1 / (s * s) - 1.0).abs() < 1e-12);
        assert!((u2 * i2 / (s * s) - 1.0).abs() < 1e-12);
        // 4 · 1.380649e-23 · 1e9 · 1e4 · 2e3
        assert!((u1 - 1.104_519_2e-6).abs() < 1e-13);
        assert!(expected_mean_squares(0.0, &p()).is_err());
        assert!(expected_mean_squares(-3.0, &p()).is_err());
    }

    #[test]
    fn record_shape_and_determinism() {
        let a = simulate_slot(false, true, &p(), &mut rng_from(7));
        let b = simulate_slot(false, true, &p(), &mut rng_from(7));
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        assert_eq!(a.sample_rate, 2e4);
    }

    #[test]
    fn temperature_scales_voltage() {
        let hot = NoiseParams { t_eff: 4e9, ..p() };
        let mut rng = rng_from(3);
        let (mut cold_sum, mut hot_sum) = (0.0, 0.0);
        for _ in 0..400 {
            cold_sum += simulate_slot(true, false, &p(), &mut rng).u_mean_square();
            hot_sum += simulate_slot(true, false, &hot, &mut rng).u_mean_square();
        }
        // 400 slots × 200 samples: relative SE ≈ 0.5 %
        let ratio = hot_sum / cold_sum;
        assert!((ratio - 4.0).abs() < 4.0 * 0.05, "ratio {ratio}");
    }

    #[test]
    fn exact_inversion() {
        let r = 7_321.0;
        let params = p();
        let level = (params.noise_scale() * r).sqrt();
        let cur = (params.noise_scale() / r).sqrt();
        let rec = ChannelRecord::from_parts(vec![level; 10], vec![cur; 10], 2e4, SlotTruth { bit_a: false, bit_b: true });
        for ch in [MeasureChannel::Voltage, MeasureChannel::Current, MeasureChannel::Both] {
            let est = estimate_loop_resistance(&rec, &params, ch).unwrap();
            assert!((est / r - 1.0).abs() < 1e-12, "{ch:?}: {est}");
        }
        let zero = ChannelRecord::from_parts(vec![0.0; 4], vec![0.0; 4], 2e4, SlotTruth { bit_a: false, bit_b: false });
        assert!(matches!(estimate_loop_resistance(&zero, &params, MeasureChannel::Voltage), Err(Error::EstimationFailed(_))));
        let short = ChannelRecord::from_parts(vec![1.0], vec![1.0], 2e4, SlotTruth { bit_a: false, bit_b: false });
        assert!(estimate_loop_resistance(&short, &params, MeasureChannel::Both).is_err());
    }

    #[test]
    fn classification_rules() {
        let params = p();
        let out = classify_slot(11e3, false, &params);
        assert_eq!(out.classification, Classification::SecureBit);
        assert_eq!(out.inferred_peer_bit, Some(true));
        let out = classify_slot(11e3, true, &params);
        assert_eq!(out.inferred_peer_bit, Some(false));
        assert_eq!(classify_slot(2e3, false, &params).classification, Classification::DiscardSame);
        assert_eq!(classify_slot(2e3, true, &params).classification, Classification::Indeterminate);
        assert_eq!(classify_slot(20e3, true, &params).classification, Classification::DiscardSame);
        let ind = classify_slot(20e3, false, &params);
        assert_eq!(ind.classification, Classification::Indeterminate);
        assert_eq!(ind.inferred_peer_bit, None);
    }

    #[test]
    fn estimate_tracks_loop_resistance() {
        let params = p();
        let mut rng = rng_from(11);
        // relative SE per channel sqrt(2/200) = 0.1; allow 3 SE
        for (a, b) in [(false, false), (false, true), (true, true)] {
            let truth = params.resistor(a) + params.resistor(b);
            let mut v_sum = 0.0;
            let mut c_sum = 0.0;
            let trials = 200;
            for _ in 0..trials {
                let rec = simulate_slot(a, b, &params, &mut rng);
                let v = estimate_loop_resistance(&rec, &params, MeasureChannel::Voltage).unwrap();
                let c = estimate_loop_resistance(&rec, &params, MeasureChannel::Current).unwrap();
                assert!((v / truth - 1.0).abs() < 3.0 * 0.1 * 1.5);
                v_sum += v;
                c_sum += c;
            }
            let (v_mean, c_mean) = (v_sum / trials as f64, c_sum / trials as f64);
            // mean of 200 estimates: SE ≈ 0.1/sqrt(200) ≈ 0.7 %; 1/x bias of current ≈ 1 %
            assert!((v_mean / truth - 1.0).abs() < 0.03, "voltage {v_mean} vs {truth}");
            assert!((c_mean / truth - 1.0).abs() < 0.04, "current {c_mean} vs {truth}");
        }
    }

    #[test]
    fn exchange_basics() {
        let net = Network::new(3).unwrap();
        let lp = Loop::new(&net, 0, 2).unwrap();
        let empty = exchange_key(lp, 0, &p(), &mut rng_from(1)).unwrap();
        assert_eq!(empty.slots, 0);
        assert!(empty.alice_key.is_empty());

        let r1 = exchange_key(lp, 64, &p(), &mut rng_from(5)).unwrap();
        let r2 = exchange_key(lp, 64, &p(), &mut rng_from(5)).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.alice_key.len(), 64);
        assert_eq!(r1.bob_key.len(), 64);
        assert_eq!(r1.trace.len(), r1.slots);
        assert_eq!(r1.slots, r1.kept_slots + r1.discarded_same + r1.indeterminate + r1.disputed);
        assert!(r1.keys_agree());
    }
}
