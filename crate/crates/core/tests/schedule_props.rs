use std::collections::BTreeMap;

use kljn_core::schedule::rounds_at_distance;
use kljn_core::{full_schedule, ke_count_closed_form, min_rounds_oracle, rounds_for_distance, verify_schedule, Network};
use proptest::prelude::*;

#[test]
fn round_count_matches_closed_form_up_to_200() {
    for n in 1..=200 {
        let s = full_schedule(&Network::new(n).unwrap());
        let sum: usize = (1..=n).map(|d| d.min(n + 1 - d)).sum();
        assert_eq!(s.round_count(), ke_count_closed_form(n), "n = {n}");
        assert_eq!(s.round_count(), sum, "n = {n}");
    }
}

#[test]
fn per_distance_counts_are_optimal() {
    for n in 1..=14 {
        let net = Network::new(n).unwrap();
        for d in 1..=n {
            let got = rounds_for_distance(&net, d).unwrap().len();
            assert_eq!(got, min_rounds_oracle(n, d).unwrap(), "n = {n}, d = {d}");
            assert_eq!(got, rounds_at_distance(n, d));
            assert_eq!(got, rounds_at_distance(n, n + 1 - d));
        }
    }
}

#[test]
fn n12_enumerates_to_42() {
    assert_eq!(full_schedule(&Network::new(12).unwrap()).round_count(), 42);
}

proptest! {
    #[test]
    fn every_pair_once_and_rounds_disjoint(n in 1usize..=50) {
        let net = Network::new(n).unwrap();
        let s = full_schedule(&net);
        prop_assert!(verify_schedule(&s).is_empty());

        let mut seen = BTreeMap::new();
        for (d, round) in s.rounds() {
            prop_assert!(!round.is_empty());
            for w in round.loops.windows(2) {
                prop_assert!(w[0].left() < w[1].left());
                prop_assert!(w[0].right() <= w[1].left());
            }
            for lp in &round.loops {
                prop_assert_eq!(lp.distance(), d);
                *seen.entry((lp.left(), lp.right())).or_insert(0) += 1;
            }
        }
        prop_assert_eq!(seen.len(), net.pair_count());
        prop_assert!(seen.values().all(|&c| c == 1));
        let distances: Vec<usize> = s.phases.iter().map(|p| p.distance).collect();
        prop_assert_eq!(distances, (1..=n).collect::<Vec<_>>());
    }

}

