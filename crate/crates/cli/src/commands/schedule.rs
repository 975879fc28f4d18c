use kljn_core::schedule::SCHEDULE_CSV_HEADER;
use kljn_core::{full_schedule, ke_count_closed_form, verify_schedule, Network, Schedule};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::output::{summary, write_csv_tables, write_json};
use crate::{CliError, SCHEMA_VERSION};

#[derive(Serialize)]
struct ScheduleDoc<'a> {
    schema_version: u32,
    command: &'static str,
    round_count: usize,
    closed_form: usize,
    schedule: &'a Schedule,
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let n = cfg.require_n()?;
    let network = Network::new(n)?;
    let schedule = full_schedule(&network);
    let round_count = schedule.round_count();
    let closed_form = ke_count_closed_form(n);
    let out = cfg.out.as_deref();

    match cfg.format() {
        Format::Json => write_json(
            out,
            &ScheduleDoc {
                schema_version: SCHEMA_VERSION,
                command: "schedule",
                round_count,
                closed_form,
                schedule: &schedule,
            },
        )?,
        Format::Csv => {
            let header = SCHEDULE_CSV_HEADER.iter().map(|s| s.to_string()).collect();
            let rows = schedule.csv_rows().iter().map(|r| r.iter().map(usize::to_string).collect()).collect();
            write_csv_tables(out, &[(header, rows)])?;
        }
    }

    let violations = verify_schedule(&schedule);
    summary(
        out,
        &format!(
            "n={n} rounds={round_count} closed_form={closed_form} {}",
            if violations.is_empty() { "ok" } else { "MISMATCH" }
        ),
    );
    if !violations.is_empty() {
        return Err(CliError::Verification(format!("{} schedule violations", violations.len())));
    }
    Ok(())
}
