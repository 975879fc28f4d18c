//! Distance-by-distance KE round schedule.
//!
//! Phase `d` connects every pair of hosts `d` apart. Loops `(i, i + d)` with
//! the same residue `i mod d` tile the line end-to-start, so each residue
//! class is one round of simultaneous, segment-disjoint exchanges.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Loop, Network, Segment};

/// Largest network size the exhaustive round oracle will attempt.
pub const ORACLE_MAX_N: usize = 14;

/// Loops that exchange keys simultaneously during one KE period.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub loops: Vec<Loop>,
}

impl Round {
    pub fn new(mut loops: Vec<Loop>) -> Self {
        loops.sort();
        Round { loops }
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    /// Hosts that terminate a loop in this round.
    pub fn endpoints(&self) -> BTreeSet<usize> {
        self.loops.iter().flat_map(|l| [l.left(), l.right()]).collect()
    }

    /// First overlapping pair, if any.
    pub fn first_overlap(&self) -> Option<(Loop, Loop)> {
        for (i, a) in self.loops.iter().enumerate() {
            for b in &self.loops[i + 1..] {
                if a.overlaps(*b) {
                    return Some((*a, *b));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub distance: usize,
    pub rounds: Vec<Round>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub network: Network,
    pub phases: Vec<Phase>,
}

impl Schedule {
    pub fn round_count(&self) -> usize {
        self.phases.iter().map(|p| p.rounds.len()).sum()
    }

    /// Rounds in execution order, tagged with their phase distance.
    pub fn rounds(&self) -> impl Iterator<Item = (usize, &Round)> {
        self.phases
            .iter()
            .flat_map(|p| p.rounds.iter().map(move |r| (p.distance, r)))
    }

    /// One CSV row per loop: `phase_distance,round_index,loop_left,loop_right`.
    /// `round_index` counts within the phase.
    pub fn csv_rows(&self) -> Vec<[usize; 4]> {
        let mut rows = Vec::new();
        for phase in &self.phases {
            for (r, round) in phase.rounds.iter().enumerate() {
                for lp in &round.loops {
                    rows.push([phase.distance, r, lp.left(), lp.right()]);
                }
            }
        }
        rows
    }
}

pub const SCHEDULE_CSV_HEADER: [&str; 4] = ["phase_distance", "round_index", "loop_left", "loop_right"];

/// Rounds for phase `d`: round `r` holds every `(i, i + d)` with `i ≡ r (mod d)`.
pub fn rounds_for_distance(network: &Network, d: usize) -> Result<Vec<Round>> {
    let n = network.size();
    if d == 0 || d > n {
        return Err(Error::DistanceOutOfRange { d, n });
    }
    let rounds = (0..d)
        .map(|r| {
            let loops = (r..=n - d)
                .step_by(d)
                .map(|i| Loop::new_unchecked(i, i + d))
                .collect();
            Round { loops }
        })
        .filter(|round: &Round| !round.is_empty())
        .collect();
    Ok(rounds)
}

pub fn full_schedule(network: &Network) -> Schedule {
    let phases = (1..=network.size())
        .map(|d| Phase {
            distance: d,
            rounds: rounds_for_distance(network, d).expect("distance within 1..=n"),
        })
        .collect();
    Schedule {
        network: *network,
        phases,
    }
}

/// Rounds needed at distance `d`: `min(d, n + 1 - d)`.
pub fn rounds_at_distance(n: usize, d: usize) -> usize {
    d.min(n + 1 - d)
}

/// `((n+1)/2)²` for odd `n`, `n²/4 + n/2` for even `n`.
pub fn ke_count_closed_form(n: usize) -> usize {
    if n % 2 == 1 {
        let h = n.div_ceil(2);
        h * h
    } else {
        n * n / 4 + n / 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleViolation {
    InvalidLoop {
        phase_distance: usize,
        round_index: usize,
        left: usize,
        right: usize,
    },
    WrongDistance {
        phase_distance: usize,
        round_index: usize,
        left: usize,
        right: usize,
    },
    Overlap {
        phase_distance: usize,
        round_index: usize,
        a: Loop,
        b: Loop,
        segment: Segment,
    },
    MissingPair {
        left: usize,
        right: usize,
    },
    DuplicatePair {
        left: usize,
        right: usize,
        count: usize,
    },
    PhaseOrder {
        expected: usize,
        found: usize,
    },
    RoundCount {
        actual: usize,
        closed_form: usize,
    },
}

/// Checks overlap, completeness, phase order and round count. Empty on success.
pub fn verify_schedule(schedule: &Schedule) -> Vec<ScheduleViolation> {
    let net = &schedule.network;
    let n = net.size();
    let mut out = Vec::new();

    for (k, phase) in schedule.phases.iter().enumerate() {
        if phase.distance != k + 1 {
            out.push(ScheduleViolation::PhaseOrder {
                expected: k + 1,
                found: phase.distance,
            });
        }
    }
    if schedule.phases.len() != n {
        out.push(ScheduleViolation::PhaseOrder {
            expected: n,
            found: schedule.phases.len(),
        });
    }

    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for phase in &schedule.phases {
        for (r, round) in phase.rounds.iter().enumerate() {
            for lp in &round.loops {
                if lp.left() >= lp.right() || lp.right() > n {
                    out.push(ScheduleViolation::InvalidLoop {
                        phase_distance: phase.distance,
                        round_index: r,
                        left: lp.left(),
                        right: lp.right(),
                    });
                    continue;
                }
                if lp.distance() != phase.distance {
                    out.push(ScheduleViolation::WrongDistance {
                        phase_distance: phase.distance,
                        round_index: r,
                        left: lp.left(),
                        right: lp.right(),
                    });
                }
                *seen.entry((lp.left(), lp.right())).or_default() += 1;
            }
            for (i, a) in round.loops.iter().enumerate() {
                for b in &round.loops[i + 1..] {
                    if let Some(segment) = a.shared_segment(*b) {
                        out.push(ScheduleViolation::Overlap {
                            phase_distance: phase.distance,
                            round_index: r,
                            a: *a,
                            b: *b,
                            segment,
                        });
                    }
                }
            }
        }
    }

    for pair in net.all_pairs() {
        match seen.get(&(pair.left(), pair.right())) {
            None => out.push(ScheduleViolation::MissingPair {
                left: pair.left(),
                right: pair.right(),
            }),
            Some(&c) if c > 1 => out.push(ScheduleViolation::DuplicatePair {
                left: pair.left(),
                right: pair.right(),
                count: c,
            }),
            _ => {}
        }
    }

    let actual = schedule.round_count();
    let closed_form = ke_count_closed_form(n);
    if actual != closed_form {
        out.push(ScheduleViolation::RoundCount {
            actual,
            closed_form,
        });
    }
    out
}

/// Minimum number of rounds for all distance-`d` pairs, by exhaustive search.
///
/// Builds the conflict graph from explicit segment sets and tries `k = 1, 2, ...`
/// colors with plain backtracking. Does not rely on the residue-class rule.
pub fn min_rounds_oracle(n: usize, d: usize) -> Result<usize> {
    if n > ORACLE_MAX_N {
        return Err(Error::SearchBudgetExceeded {
            n,
            max: ORACLE_MAX_N,
        });
    }
    if d == 0 || d > n {
        return Err(Error::DistanceOutOfRange { d, n });
    }
    let segs: Vec<BTreeSet<usize>> = (0..=n - d).map(|i| (i..i + d).collect()).collect();
    let m = segs.len();
    let conflict: Vec<Vec<bool>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| a != b && segs[a].intersection(&segs[b]).next().is_some())
                .collect()
        })
        .collect();

    fn assign(v: usize, k: usize, colors: &mut Vec<usize>, conflict: &[Vec<bool>]) -> bool {
        if v == colors.len() {
            return true;
        }
        for c in 0..k {
            if (0..v).all(|u| !(conflict[v][u] && colors[u] == c)) {
                colors[v] = c;
                if assign(v + 1, k, colors, conflict) {
                    return true;
                }
            }
        }
        false
    }

    let mut colors = vec![usize::MAX; m];
    (1..=m)
        .find(|&k| assign(0, k, &mut colors, &conflict))
        .ok_or(Error::EstimationFailed("no coloring found"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n: usize) -> Network {
        Network::new(n).unwrap()
    }

    fn pairs(round: &Round) -> Vec<(usize, usize)> {
        round.loops.iter().map(|l| (l.left(), l.right())).collect()
    }

    #[test]
    fn n7_phases_match_figures() {
        let r = rounds_for_distance(&net(7), 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(pairs(&r[0]), (0..7).map(|i| (i, i + 1)).collect::<Vec<_>>());

        let r = rounds_for_distance(&net(7), 3).unwrap();
        let got: Vec<_> = r.iter().map(pairs).collect();
        assert_eq!(got, vec![vec![(0, 3), (3, 6)], vec![(1, 4), (4, 7)], vec![(2, 5)]]);

        let r = rounds_for_distance(&net(7), 7).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(pairs(&r[0]), vec![(0, 7)]);

        let per_d: Vec<_> = (1..=7).map(|d| rounds_for_distance(&net(7), d).unwrap().len()).collect();
        assert_eq!(per_d, vec![1, 2, 3, 4, 3, 2, 1]);
        let per_d: Vec<_> = (1..=8).map(|d| rounds_for_distance(&net(8), d).unwrap().len()).collect();
        assert_eq!(per_d, vec![1, 2, 3, 4, 4, 3, 2, 1]);
    }

    #[test]
    fn distance_out_of_range() {
        assert!(matches!(rounds_for_distance(&net(7), 0), Err(Error::DistanceOutOfRange { .. })));
        assert!(matches!(rounds_for_distance(&net(7), 8), Err(Error::DistanceOutOfRange { .. })));
    }

    #[test]
    fn full_schedule_totals() {
        assert_eq!(full_schedule(&net(7)).round_count(), 16);
        assert_eq!(full_schedule(&net(8)).round_count(), 20);
        let s1 = full_schedule(&net(1));
        assert_eq!(s1.round_count(), 1);
        assert_eq!(pairs(&s1.phases[0].rounds[0]), vec![(0, 1)]);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(ke_count_closed_form(7), 16);
        assert_eq!(ke_count_closed_form(8), 20);
        assert_eq!(ke_count_closed_form(12), 42);
        assert_eq!(ke_count_closed_form(1), 1);
        for n in 1..=200 {
            let sum: usize = (1..=n).map(|d| rounds_at_distance(n, d)).sum();
            assert_eq!(ke_count_closed_form(n), sum, "n = {n}");
        }
    }

    #[test]
    fn verify_flags_violations() {
        assert!(verify_schedule(&full_schedule(&net(7))).is_empty());

        let mut bad = full_schedule(&net(7));
        let n7 = net(7);
        bad.phases[2].rounds[0] = Round::new(vec![
            Loop::new(&n7, 0, 3).unwrap(),
            Loop::new(&n7, 1, 4).unwrap(),
        ]);
        let v = verify_schedule(&bad);
        assert!(v.iter().any(|x| matches!(x,
            ScheduleViolation::Overlap { segment: Segment(1), .. })));

        let mut missing = full_schedule(&net(7));
        missing.phases[2].rounds[2].loops.clear();
        let v = verify_schedule(&missing);
        assert!(v.contains(&ScheduleViolation::MissingPair { left: 2, right: 5 }));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(min_rounds_oracle(7, 4).unwrap(), 4);
        assert_eq!(min_rounds_oracle(8, 5).unwrap(), 4);
        assert_eq!(min_rounds_oracle(5, 2).unwrap(), 2);
        assert!(matches!(min_rounds_oracle(15, 3), Err(Error::SearchBudgetExceeded { .. })));
    }

    #[test]
    fn csv_rows_cover_every_pair() {
        let s = full_schedule(&net(5));
        let rows = s.csv_rows();
        assert_eq!(rows.len(), 15);
        assert_eq!(rows[0], [1, 0, 0, 1]);
    }
}
