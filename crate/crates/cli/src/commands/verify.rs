use kljn_core::fabric::{dump, HostDump};
use kljn_core::{box_config, full_schedule, modes_for_round, verify_round_isolation, FilterBoxConfig, HostMode, IsolationViolation, Network};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{summary, write_json};
use crate::{CliError, SCHEMA_VERSION};

pub fn parse_flip(s: &str) -> Result<(usize, usize), String> {
    let (r, h) = s.split_once(':').ok_or_else(|| format!("expected ROUND:HOST, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(r)?, parse(h)?))
}

#[derive(Serialize)]
struct FilterTables {
    state_1: FilterBoxConfig,
    state_2: FilterBoxConfig,
}

#[derive(Serialize)]
struct RoundDoc {
    index: usize,
    phase_distance: usize,
    loops: Vec<(usize, usize)>,
    modes: Vec<HostMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fabric: Option<Vec<HostDump>>,
    violations: Vec<IsolationViolation>,
}

#[derive(Serialize)]
struct VerifyDoc {
    schema_version: u32,
    command: &'static str,
    n: usize,
    rounds_total: usize,
    rounds_clean: usize,
    filter_tables: FilterTables,
    rounds: Vec<RoundDoc>,
}

pub fn run(cfg: &RunConfig, flips: &[(usize, usize)], dump_fabric: bool) -> Result<(), CliError> {
    cfg.require_json("verify-filters")?;
    let n = cfg.require_n()?;
    let network = Network::new(n)?;
    let schedule = full_schedule(&network);
    for &(round, host) in flips {
        if round >= schedule.round_count() || host > n {
            return Err(CliError::Usage(format!(
                "--flip {round}:{host} outside {} rounds / hosts 0..={n}",
                schedule.round_count()
            )));
        }
    }

    let mut rounds = Vec::with_capacity(schedule.round_count());
    for (index, (d, round)) in schedule.rounds().enumerate() {
        let mut state = modes_for_round(&network, round)?;
        for &(_, host) in flips.iter().filter(|(r, _)| *r == index) {
            state = state.with_mode(host, state.mode(host).flipped());
        }
        rounds.push(RoundDoc {
            index,
            phase_distance: d,
            loops: round.loops.iter().map(|l| (l.left(), l.right())).collect(),
            modes: state.modes().to_vec(),
            fabric: dump_fabric.then(|| dump(&state)),
            violations: verify_round_isolation(&state, round),
        });
    }
    let rounds_clean = rounds.iter().filter(|r| r.violations.is_empty()).count();
    let doc = VerifyDoc {
        schema_version: SCHEMA_VERSION,
        command: "verify-filters",
        n,
        rounds_total: rounds.len(),
        rounds_clean,
        filter_tables: FilterTables {
            state_1: box_config(HostMode::State1),
            state_2: box_config(HostMode::State2),
        },
        rounds,
    };
    let out = cfg.out.as_deref();
    write_json(out, &doc)?;
    summary(out, &format!("n={n} {rounds_clean}/{} rounds clean", doc.rounds_total));
    for r in doc.rounds.iter().filter(|r| !r.violations.is_empty()) {
        eprintln!("round {} (d={}): {:?}", r.index, r.phase_distance, r.violations);
    }
    if rounds_clean != doc.rounds_total {
        return Err(CliError::Verification(format!(
            "{} of {} rounds violate isolation",
            doc.rounds_total - rounds_clean,
            doc.rounds_total
        )));
    }
    Ok(())
}
