use std::path::Path;

use kljn_core::fabric::IsolationViolation;
use kljn_core::sim::{key_digest, EveSummary};
use kljn_core::timing::slot_duration;
use kljn_core::{ke_duration, simulate_network, NoiseParams, ScheduleViolation, SimulationConfig};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{summary, write_csv_tables, write_json};
use crate::{CliError, SCHEMA_VERSION};

#[derive(Serialize)]
struct ConfigDoc {
    n: usize,
    seed: u64,
    key_bits: usize,
    params: NoiseParams,
}

#[derive(Serialize)]
struct ScheduleCheck<'a> {
    round_count: usize,
    closed_form: usize,
    violations: &'a [ScheduleViolation],
}

#[derive(Serialize)]
struct RoundIsolation<'a> {
    round: usize,
    phase_distance: usize,
    violations: &'a [IsolationViolation],
}

#[derive(Serialize)]
struct IsolationCheck<'a> {
    rounds_checked: usize,
    rounds_clean: usize,
    failures: Vec<RoundIsolation<'a>>,
}

#[derive(Serialize)]
struct PairDoc {
    left: usize,
    right: usize,
    distance: usize,
    alice_key_digest: String,
    bob_key_digest: String,
    keys_agree: bool,
    slots: usize,
    kept_slots: usize,
    discarded_same: usize,
    indeterminate: usize,
    disputed: usize,
    bit_errors: usize,
    bit_error_rate: f64,
}

#[derive(Serialize)]
struct Totals {
    pairs: usize,
    pairs_agreeing: usize,
    key_bits: usize,
    bit_errors: usize,
    bit_error_rate: f64,
    slots: usize,
}

#[derive(Serialize)]
struct TimingDoc {
    slot_duration_s: f64,
    ke_duration_s: f64,
    /// Sum over rounds of the slowest loop's slot time.
    simulated_elapsed_s: f64,
    /// KE count × average KE duration.
    model_elapsed_s: f64,
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    schema_version: u32,
    command: &'static str,
    config: ConfigDoc,
    schedule: ScheduleCheck<'a>,
    isolation: IsolationCheck<'a>,
    pairs: Vec<PairDoc>,
    totals: Totals,
    eve: &'a EveSummary,
    timing: TimingDoc,
}

#[derive(Serialize)]
struct SecretPair {
    left: usize,
    right: usize,
    alice_key: String,
    bob_key: String,
}

#[derive(Serialize)]
struct SecretsDoc {
    schema_version: u32,
    seed: u64,
    pairs: Vec<SecretPair>,
}

fn bits(key: &[bool]) -> String {
    key.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn run(cfg: &RunConfig, emit_secrets: Option<&Path>, trace: Option<&Path>) -> Result<(), CliError> {
    cfg.require_json("simulate")?;
    let n = cfg.require_n()?;
    let seed = cfg.seed.ok_or_else(|| CliError::Usage("--seed is required for simulate".into()))?;
    let params = cfg.params()?;
    let sim_cfg = SimulationConfig {
        n,
        params,
        key_length: cfg.key_bits(),
        seed,
    };
    let sim = simulate_network(&sim_cfg)?;

    let failures: Vec<RoundIsolation> = sim
        .rounds
        .iter()
        .filter(|r| !r.isolation_violations.is_empty())
        .map(|r| RoundIsolation {
            round: r.index,
            phase_distance: r.phase_distance,
            violations: &r.isolation_violations,
        })
        .collect();
    let pairs: Vec<PairDoc> = sim
        .exchanges
        .iter()
        .map(|e| PairDoc {
            left: e.left,
            right: e.right,
            distance: e.right - e.left,
            alice_key_digest: key_digest(&e.alice_key),
            bob_key_digest: key_digest(&e.bob_key),
            keys_agree: e.keys_agree(),
            slots: e.slots,
            kept_slots: e.kept_slots,
            discarded_same: e.discarded_same,
            indeterminate: e.indeterminate,
            disputed: e.disputed,
            bit_errors: e.bit_errors,
            bit_error_rate: e.bit_error_rate,
        })
        .collect();
    let doc = SimulateDoc {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        config: ConfigDoc {
            n,
            seed,
            key_bits: sim_cfg.key_length,
            params,
        },
        schedule: ScheduleCheck {
            round_count: sim.round_count,
            closed_form: sim.closed_form,
            violations: &sim.schedule_violations,
        },
        isolation: IsolationCheck {
            rounds_checked: sim.rounds.len(),
            rounds_clean: sim.rounds.len() - failures.len(),
            failures,
        },
        totals: Totals {
            pairs: pairs.len(),
            pairs_agreeing: pairs.iter().filter(|p| p.keys_agree).count(),
            key_bits: sim.total_bits(),
            bit_errors: sim.total_bit_errors(),
            bit_error_rate: sim.bit_error_rate(),
            slots: sim.exchanges.iter().map(|e| e.slots).sum(),
        },
        pairs,
        eve: &sim.eve,
        timing: TimingDoc {
            slot_duration_s: slot_duration(&params),
            ke_duration_s: ke_duration(&params, sim_cfg.key_length),
            simulated_elapsed_s: sim.simulated_elapsed_s,
            model_elapsed_s: sim.model_elapsed_s,
        },
    };
    let out = cfg.out.as_deref();
    write_json(out, &doc)?;

    if let Some(path) = emit_secrets {
        let secrets = SecretsDoc {
            schema_version: SCHEMA_VERSION,
            seed,
            pairs: sim
                .exchanges
                .iter()
                .map(|e| SecretPair {
                    left: e.left,
                    right: e.right,
                    alice_key: bits(&e.alice_key),
                    bob_key: bits(&e.bob_key),
                })
                .collect(),
        };
        write_json(Some(path), &secrets)?;
    }

    if let Some(path) = trace {
        let header = ["left", "right", "slot", "bit_a", "bit_b", "r_estimate", "alice", "bob", "kept"]
            .map(String::from)
            .to_vec();
        let class = |c| serde_json::to_value(c).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let rows = sim
            .exchanges
            .iter()
            .flat_map(|e| {
                e.trace.iter().map(move |t| {
                    vec![
                        e.left.to_string(),
                        e.right.to_string(),
                        t.slot.to_string(),
                        (t.bit_a as u8).to_string(),
                        (t.bit_b as u8).to_string(),
                        t.r_estimate.to_string(),
                        class(t.alice),
                        class(t.bob),
                        t.kept.to_string(),
                    ]
                })
            })
            .collect();
        write_csv_tables(Some(path), &[(header, rows)])?;
    }

    summary(
        out,
        &format!(
            "n={n} pairs={} agreeing={} ber={:.3e} rounds={} isolation_clean={}/{} simulated={:.2}s model={:.2}s",
            doc.totals.pairs,
            doc.totals.pairs_agreeing,
            doc.totals.bit_error_rate,
            sim.round_count,
            doc.isolation.rounds_clean,
            doc.isolation.rounds_checked,
            sim.simulated_elapsed_s,
            sim.model_elapsed_s
        ),
    );

    if !sim.schedule_violations.is_empty() {
        return Err(CliError::Verification(format!("schedule: {} violations", sim.schedule_violations.len())));
    }
    if !sim.isolation_clean() {
        return Err(CliError::Verification(format!(
            "filter isolation: {} rounds failed",
            doc.isolation.rounds_checked - doc.isolation.rounds_clean
        )));
    }
    Ok(())
}
