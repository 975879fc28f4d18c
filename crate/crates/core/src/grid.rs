//! One-dimensional chain network and key-exchange loops.
//!
//! A network of size `n` has hosts `0..=n` joined by `n` unit wire segments.
//! A loop occupies every segment between its two endpoint hosts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default physical length of one wire segment, in meters.
pub const DEFAULT_SEGMENT_LENGTH_M: f64 = 1000.0;

/// Chain network with hosts `0..=size_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Network {
    size_n: usize,
    segment_length_m: f64,
}

impl Network {
    pub fn new(size_n: usize) -> Result<Self> {
        Self::with_segment_length(size_n, DEFAULT_SEGMENT_LENGTH_M)
    }

    pub fn with_segment_length(size_n: usize, segment_length_m: f64) -> Result<Self> {
        if size_n == 0 {
            return Err(Error::InvalidNetworkSize(size_n));
        }
        if !(segment_length_m.is_finite() && segment_length_m > 0.0) {
            return Err(Error::InvalidParams(format!(
                "segment length must be positive, got {segment_length_m}"
            )));
        }
        Ok(Network {
            size_n,
            segment_length_m,
        })
    }

    /// Number of segments, `N`.
    pub fn size(&self) -> usize {
        self.size_n
    }

    pub fn host_count(&self) -> usize {
        self.size_n + 1
    }

    pub fn hosts(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.size_n
    }

    pub fn segment_length_m(&self) -> f64 {
        self.segment_length_m
    }

    /// Physical wire length spanned by `lp`.
    pub fn loop_length_m(&self, lp: Loop) -> f64 {
        lp.distance() as f64 * self.segment_length_m
    }

    /// All unordered host pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn all_pairs(&self) -> impl Iterator<Item = Loop> + '_ {
        let n = self.size_n;
        (0..n).flat_map(move |i| (i + 1..=n).map(move |j| Loop { left: i, right: j }))
    }

    pub fn pair_count(&self) -> usize {
        self.host_count() * self.size_n / 2
    }
}

/// Unit wire segment between hosts `i` and `i + 1`, identified by `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment(pub usize);

impl Segment {
    pub fn endpoints(self) -> (usize, usize) {
        (self.0, self.0 + 1)
    }
}

/// Interval `[left, right]` of hosts joined by a single KLJN loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Loop {
    left: usize,
    right: usize,
}

impl Loop {
    /// Builds a loop checked against `network`.
    pub fn new(network: &Network, left: usize, right: usize) -> Result<Self> {
        if left >= right || right > network.size() {
            return Err(Error::InvalidLoop {
                left,
                right,
                n: network.size(),
            });
        }
        Ok(Loop { left, right })
    }

    pub(crate) fn new_unchecked(left: usize, right: usize) -> Self {
        debug_assert!(left < right);
        Loop { left, right }
    }

    pub fn left(self) -> usize {
        self.left
    }

    pub fn right(self) -> usize {
        self.right
    }

    pub fn distance(self) -> usize {
        self.right - self.left
    }

    pub fn segments(self) -> impl Iterator<Item = Segment> {
        (self.left..self.right).map(Segment)
    }

    pub fn contains_segment(self, seg: Segment) -> bool {
        self.left <= seg.0 && seg.0 < self.right
    }

    /// True iff the two loops share at least one wire segment.
    ///
    /// Touching at a single host is not an overlap: that host uses its left
    /// unit for one loop and its right unit for the other.
    pub fn overlaps(self, other: Loop) -> bool {
        self.left < other.right && other.left < self.right
    }

    /// First segment shared with `other`, if any.
    pub fn shared_segment(self, other: Loop) -> Option<Segment> {
        if self.overlaps(other) {
            Some(Segment(self.left.max(other.left)))
        } else {
            None
        }
    }
}

impl std::fmt::Display for Loop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.left, self.right)
    }
}

pub fn loops_overlap(a: Loop, b: Loop) -> bool {
    a.overlaps(b)
}

/// Sort-and-sweep check that a set of loops is pairwise segment-disjoint.
pub fn pairwise_disjoint(loops: &[Loop]) -> bool {
    let mut sorted = loops.to_vec();
    sorted.sort();
    sorted.windows(2).all(|w| w[0].right <= w[1].left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn lp(l: usize, r: usize) -> Loop {
        Loop::new(&Network::new(20).unwrap(), l, r).unwrap()
    }

    fn segs(l: Loop) -> Vec<(usize, usize)> {
        l.segments().map(Segment::endpoints).collect()
    }

    #[test]
    fn segment_enumeration() {
        assert_eq!(segs(lp(0, 1)), vec![(0, 1)]);
        assert_eq!(segs(lp(0, 3)), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(segs(lp(3, 6)), vec![(3, 4), (4, 5), (5, 6)]);
    }

    #[test]
    fn overlap_examples() {
        assert!(!loops_overlap(lp(0, 1), lp(1, 2)));
        assert!(!loops_overlap(lp(0, 3), lp(3, 6)));
        assert!(loops_overlap(lp(0, 3), lp(1, 4)));
        assert_eq!(lp(0, 3).shared_segment(lp(1, 4)), Some(Segment(1)));
    }

    #[test]
    fn construction_rejects_bad_loops() {
        let net = Network::new(7).unwrap();
        assert!(Loop::new(&net, 3, 3).is_err());
        assert!(Loop::new(&net, 4, 2).is_err());
        assert!(Loop::new(&net, 0, 8).is_err());
        assert!(Network::new(0).is_err());
        assert_eq!(net.hosts().collect::<Vec<_>>(), (0..=7).collect::<Vec<_>>());
        assert_eq!(net.all_pairs().count(), 28);
        assert_eq!(net.pair_count(), 28);
    }

    fn any_loop(n: usize) -> impl Strategy<Value = Loop> {
        (0..n).prop_flat_map(move |l| (Just(l), l + 1..=n)).prop_map(|(l, r)| Loop::new_unchecked(l, r))
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric_and_matches_segment_sets(a in any_loop(30), b in any_loop(30)) {
            let sa: BTreeSet<_> = a.segments().collect();
            let sb: BTreeSet<_> = b.segments().collect();
            let brute = sa.intersection(&sb).next().is_some();
            prop_assert_eq!(loops_overlap(a, b), brute);
            prop_assert_eq!(loops_overlap(a, b), loops_overlap(b, a));
            prop_assert_eq!(sa.len(), a.distance());
        }

        #[test]
        fn equal_distance_overlap_rule(d in 1usize..10, x in 0usize..20, y in 0usize..20) {
            let a = Loop::new_unchecked(x, x + d);
            let b = Loop::new_unchecked(y, y + d);
            prop_assert_eq!(a.overlaps(b), x.abs_diff(y) < d);
        }

        #[test]
        fn sweep_agrees_with_pairwise(loops in proptest::collection::vec(any_loop(15), 0..6)) {
            let pairwise = loops.iter().enumerate().all(|(i, a)| {
                loops[i + 1..].iter().all(|b| !a.overlaps(*b))
            });
            prop_assert_eq!(pairwise_disjoint(&loops), pairwise);
        }
    }
}
