use kljn_core::schedule::rounds_at_distance;
use kljn_core::sim::{mixed_ordering_campaign, EveCampaign};
use kljn_core::timing::{timing_table, TimingRow};
use kljn_core::{full_schedule, ke_count_closed_form, Network};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::output::{summary, write_csv_tables, write_json};
use crate::{CliError, SCHEMA_VERSION};

const EVE_CONFIDENCE: f64 = 0.99;

#[derive(Clone, Serialize)]
struct CountRow {
    n: usize,
    closed_form: usize,
    enumerated: usize,
    sum_min: usize,
    matches: bool,
}

#[derive(Serialize)]
struct AnalyzeDoc {
    schema_version: u32,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    ke_counts: Option<Vec<CountRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Vec<TimingRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eve: Option<EveCampaign>,
}

type Table = (Vec<String>, Vec<Vec<String>>);

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn count_rows(n_max: usize) -> Vec<CountRow> {
    (1..=n_max)
        .map(|n| {
            let closed_form = ke_count_closed_form(n);
            let enumerated = full_schedule(&Network::new(n).expect("n >= 1")).round_count();
            let sum_min = (1..=n).map(|d| rounds_at_distance(n, d)).sum();
            CountRow {
                n,
                closed_form,
                enumerated,
                sum_min,
                matches: closed_form == enumerated && enumerated == sum_min,
            }
        })
        .collect()
}

pub fn run(cfg: &RunConfig, n_max: usize, timing: bool, eve: bool, slots: usize) -> Result<(), CliError> {
    if n_max == 0 {
        return Err(CliError::Usage("--n-max must be at least 1".into()));
    }
    let params = cfg.params()?;
    let ns: Vec<usize> = match cfg.n {
        Some(n) => vec![n as usize],
        None => (1..=n_max).collect(),
    };

    let counts = (!timing && !eve).then(|| count_rows(ns.last().copied().unwrap_or(n_max)));
    let timing_rows = timing.then(|| timing_table(ns.iter().copied(), &params, cfg.key_bits()));
    let campaign = if eve {
        Some(mixed_ordering_campaign(&params, slots, cfg.seed.unwrap_or(0), EVE_CONFIDENCE)?)
    } else {
        None
    };

    let out = cfg.out.as_deref();
    match cfg.format() {
        Format::Json => write_json(
            out,
            &AnalyzeDoc {
                schema_version: SCHEMA_VERSION,
                command: "analyze",
                ke_counts: counts.clone(),
                timing: timing_rows.clone(),
                eve: campaign.clone(),
            },
        )?,
        Format::Csv => {
            let mut tables: Vec<Table> = Vec::new();
            if let Some(c) = &counts {
                tables.push((
                    header(&["n", "closed_form", "enumerated", "sum_min", "matches"]),
                    c.iter()
                        .map(|r| vec![r.n.to_string(), r.closed_form.to_string(), r.enumerated.to_string(), r.sum_min.to_string(), r.matches.to_string()])
                        .collect(),
                ));
            }
            if let Some(t) = &timing_rows {
                tables.push((
                    header(&["n", "ke_count", "ke_duration_s", "total_s"]),
                    t.iter()
                        .map(|r| vec![r.n.to_string(), r.ke_count.to_string(), r.ke_duration_s.to_string(), r.total_s.to_string()])
                        .collect(),
                ));
            }
            if let Some(e) = &campaign {
                let a = &e.ordering_guess.accuracy;
                tables.push((
                    header(&[
                        "slots", "lh_slots", "hl_slots", "accuracy", "ci_low", "ci_high", "ci_contains_half", "u_p_value", "i_p_value", "u_effect", "i_effect",
                    ]),
                    vec![vec![
                        e.slots.to_string(),
                        e.lh_slots.to_string(),
                        e.hl_slots.to_string(),
                        a.estimate.to_string(),
                        a.ci_low.to_string(),
                        a.ci_high.to_string(),
                        a.contains(0.5).to_string(),
                        e.rank_test.u_mean_square.p_value.to_string(),
                        e.rank_test.i_mean_square.p_value.to_string(),
                        e.rank_test.u_mean_square.effect_size.to_string(),
                        e.rank_test.i_mean_square.effect_size.to_string(),
                    ]],
                ));
            }
            write_csv_tables(out, &tables)?;
        }
    }

    let mut failures = Vec::new();
    if let Some(c) = &counts {
        let bad = c.iter().filter(|r| !r.matches).count();
        summary(out, &format!("ke counts: {}/{} rows match", c.len() - bad, c.len()));
        if bad > 0 {
            failures.push(format!("{bad} ke-count rows disagree"));
        }
    }
    if let Some(t) = &timing_rows {
        for r in t {
            summary(out, &format!("n={} ke_count={} ke_duration={:.3}s total={:.3}s", r.n, r.ke_count, r.ke_duration_s, r.total_s));
        }
    }
    if let Some(e) = &campaign {
        let a = &e.ordering_guess.accuracy;
        summary(
            out,
            &format!(
                "eve: accuracy={:.4} {}% CI=[{:.4}, {:.4}] rank p(U)={:.3} p(I)={:.3}",
                a.estimate,
                a.confidence * 100.0,
                a.ci_low,
                a.ci_high,
                e.rank_test.u_mean_square.p_value,
                e.rank_test.i_mean_square.p_value
            ),
        );
        if !a.contains(0.5) {
            failures.push("eavesdropper accuracy CI excludes 0.5".into());
        }
    }
    if !failures.is_empty() {
        return Err(CliError::Verification(failures.join("; ")));
    }
    Ok(())
}
