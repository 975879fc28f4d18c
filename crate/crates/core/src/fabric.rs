//! Switched filter boxes and band reachability.
//!
//! Every host sits behind a filter box with five ideal filters. Each filter
//! either passes or rejects each of the two bands. Per host the box wires
//! six terminals:
//!
//! ```text
//!            UnitL             UnitR
//!              |B                 |B
//!  ... --- LineL --A-- Mid --A-- LineR --- ...
//!              |\______ C ______/|
//!              D                  E
//!               \---- Power -----/
//! ```
//!
//! Line terminals of neighboring hosts are joined by the wire segment, which
//! carries both bands. Host 0 has no left unit and host `N` no right unit.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Network;
use crate::schedule::Round;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Kljn,
    Power,
}

/// Host filter-box mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HostMode {
    /// Inactive: KLJN band passes by, host sees power only.
    #[serde(rename = "state_1")]
    State1,
    /// Active: left and right units each face their own side of the line.
    #[serde(rename = "state_2")]
    State2,
}

impl HostMode {
    pub fn flipped(self) -> Self {
        match self {
            HostMode::State1 => HostMode::State2,
            HostMode::State2 => HostMode::State1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterFlags {
    pub passes_kljn: bool,
    pub passes_power: bool,
}

impl FilterFlags {
    const fn new(passes_kljn: bool, passes_power: bool) -> Self {
        FilterFlags {
            passes_kljn,
            passes_power,
        }
    }

    pub fn passes(self, band: Band) -> bool {
        match band {
            Band::Kljn => self.passes_kljn,
            Band::Power => self.passes_power,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterBoxConfig {
    pub mode: HostMode,
    pub a: FilterFlags,
    pub b: FilterFlags,
    pub c: FilterFlags,
    pub d: FilterFlags,
    pub e: FilterFlags,
}

const STATE_1: FilterBoxConfig = FilterBoxConfig {
    mode: HostMode::State1,
    a: FilterFlags::new(true, true),
    b: FilterFlags::new(false, false),
    c: FilterFlags::new(true, false),
    d: FilterFlags::new(false, true),
    e: FilterFlags::new(false, true),
};

const STATE_2: FilterBoxConfig = FilterBoxConfig {
    mode: HostMode::State2,
    a: FilterFlags::new(false, true),
    b: FilterFlags::new(true, false),
    c: FilterFlags::new(false, false),
    d: FilterFlags::new(false, true),
    e: FilterFlags::new(false, true),
};

/// Truth-table row set for a host mode.
pub fn box_config(mode: HostMode) -> FilterBoxConfig {
    match mode {
        HostMode::State1 => STATE_1,
        HostMode::State2 => STATE_2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    LineLeft,
    LineRight,
    Mid,
    UnitLeft,
    UnitRight,
    Power,
}

const PORTS: [Port; 6] = [
    Port::LineLeft,
    Port::LineRight,
    Port::Mid,
    Port::UnitLeft,
    Port::UnitRight,
    Port::Power,
];

/// A terminal inside host `host`'s filter box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Terminal {
    pub host: usize,
    pub port: Port,
}

impl Terminal {
    fn index(self) -> usize {
        self.host * PORTS.len() + self.port as usize
    }

    pub fn is_unit(self) -> bool {
        matches!(self.port, Port::UnitLeft | Port::UnitRight)
    }

    pub fn is_line(self) -> bool {
        matches!(self.port, Port::LineLeft | Port::LineRight | Port::Mid)
    }
}

fn term(host: usize, port: Port) -> Terminal {
    Terminal { host, port }
}

/// Mode of every host in the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FabricState {
    pub network: Network,
    modes: Vec<HostMode>,
}

impl FabricState {
    pub fn uniform(network: Network, mode: HostMode) -> Self {
        FabricState {
            modes: vec![mode; network.host_count()],
            network,
        }
    }

    pub fn mode(&self, host: usize) -> HostMode {
        self.modes[host]
    }

    pub fn modes(&self) -> &[HostMode] {
        &self.modes
    }

    pub fn with_mode(&self, host: usize, mode: HostMode) -> Self {
        let mut next = self.clone();
        next.modes[host] = mode;
        next
    }

    fn has_terminal(&self, t: Terminal) -> bool {
        let n = self.network.size();
        !(t.host == 0 && t.port == Port::UnitLeft || t.host == n && t.port == Port::UnitRight)
    }

    /// All terminals that exist in this fabric.
    pub fn terminals(&self) -> impl Iterator<Item = Terminal> + '_ {
        self.network
            .hosts()
            .flat_map(|h| PORTS.iter().map(move |&p| term(h, p)))
            .filter(|t| self.has_terminal(*t))
    }

    /// Edges present for `band`.
    fn edges(&self, band: Band) -> Vec<(Terminal, Terminal)> {
        use Port::*;
        let n = self.network.size();
        let mut edges = Vec::new();
        for h in self.network.hosts() {
            let cfg = box_config(self.modes[h]);
            let mut add = |flags: FilterFlags, p: Port, q: Port| {
                if flags.passes(band) && self.has_terminal(term(h, p)) && self.has_terminal(term(h, q)) {
                    edges.push((term(h, p), term(h, q)));
                }
            };
            add(cfg.a, LineLeft, Mid);
            add(cfg.a, Mid, LineRight);
            add(cfg.b, LineLeft, UnitLeft);
            add(cfg.b, LineRight, UnitRight);
            add(cfg.c, LineLeft, LineRight);
            add(cfg.d, LineLeft, Power);
            add(cfg.e, LineRight, Power);
            if h < n {
                edges.push((term(h, LineRight), term(h + 1, LineLeft)));
            }
        }
        edges
    }
}

/// Connected components of the terminals for one band.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub band: Band,
    pub components: Vec<Vec<Terminal>>,
    #[serde(skip)]
    component_of: Vec<usize>,
}

impl Partition {
    pub fn component(&self, t: Terminal) -> usize {
        self.component_of[t.index()]
    }

    pub fn connected(&self, a: Terminal, b: Terminal) -> bool {
        self.component(a) == self.component(b)
    }

    /// Components that contain at least one KLJN unit, with only their units.
    pub fn unit_groups(&self) -> Vec<Vec<Terminal>> {
        self.components
            .iter()
            .map(|c| c.iter().copied().filter(|t| t.is_unit()).collect::<Vec<_>>())
            .filter(|u| !u.is_empty())
            .collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn propagate_band(state: &FabricState, band: Band) -> Partition {
    let size = state.network.host_count() * PORTS.len();
    let mut parent: Vec<usize> = (0..size).collect();
    for (a, b) in state.edges(band) {
        let (ra, rb) = (find(&mut parent, a.index()), find(&mut parent, b.index()));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut component_of = vec![usize::MAX; size];
    let mut components: Vec<Vec<Terminal>> = Vec::new();
    let mut root_slot = vec![usize::MAX; size];
    for t in state.terminals() {
        let root = find(&mut parent, t.index());
        if root_slot[root] == usize::MAX {
            root_slot[root] = components.len();
            components.push(Vec::new());
        }
        component_of[t.index()] = root_slot[root];
        components[root_slot[root]].push(t);
    }
    Partition {
        band,
        components,
        component_of,
    }
}

/// Endpoints of the round's loops go to State 2, everyone else to State 1.
pub fn modes_for_round(network: &Network, round: &Round) -> Result<FabricState> {
    if let Some((a, b)) = round.first_overlap() {
        return Err(Error::OverlappingRound {
            a: (a.left(), a.right()),
            b: (b.left(), b.right()),
        });
    }
    if let Some(bad) = round.loops.iter().find(|l| l.right() > network.size()) {
        return Err(Error::InvalidLoop {
            left: bad.left(),
            right: bad.right(),
            n: network.size(),
        });
    }
    let mut state = FabricState::uniform(*network, HostMode::State1);
    for h in round.endpoints() {
        state.modes[h] = HostMode::State2;
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IsolationViolation {
    /// The loop's two facing units are not joined in the KLJN band.
    LoopBroken { left: usize, right: usize },
    /// A KLJN component joins units that are not the two ends of one loop.
    StrayCoupling { units: Vec<Terminal> },
    /// A host outside the round's endpoints has a unit on the KLJN line.
    InactiveUnitExposed { host: usize },
    /// A host power port carries the KLJN band.
    PowerPortInKljn { host: usize },
    /// A host power port is cut off from the power line.
    PowerLost { host: usize },
}

/// Checks loop pairing, non-interference and power delivery for one round.
pub fn verify_round_isolation(state: &FabricState, round: &Round) -> Vec<IsolationViolation> {
    let mut out = Vec::new();
    let kljn = propagate_band(state, Band::Kljn);
    let n = state.network.size();

    let expected: BTreeSet<(Terminal, Terminal)> = round
        .loops
        .iter()
        .filter(|l| l.right() <= n)
        .map(|l| (term(l.left(), Port::UnitRight), term(l.right(), Port::UnitLeft)))
        .collect();

    for &(a, b) in &expected {
        if !kljn.connected(a, b) {
            out.push(IsolationViolation::LoopBroken {
                left: a.host,
                right: b.host,
            });
        }
    }
    for group in kljn.unit_groups() {
        let ok = match group.as_slice() {
            [_] => true,
            [a, b] => expected.contains(&(*a, *b)) || expected.contains(&(*b, *a)),
            _ => false,
        };
        if !ok {
            out.push(IsolationViolation::StrayCoupling { units: group });
        }
    }

    let endpoints = round.endpoints();
    let line_component = |t: Terminal| kljn.components[kljn.component(t)].iter().any(|x| x.is_line());
    for h in state.network.hosts() {
        if endpoints.contains(&h) {
            continue;
        }
        let exposed = [Port::UnitLeft, Port::UnitRight]
            .into_iter()
            .map(|p| term(h, p))
            .filter(|t| state.has_terminal(*t))
            .any(line_component);
        if exposed {
            out.push(IsolationViolation::InactiveUnitExposed { host: h });
        }
    }

    for h in state.network.hosts() {
        let comp = &kljn.components[kljn.component(term(h, Port::Power))];
        if comp.len() > 1 {
            out.push(IsolationViolation::PowerPortInKljn { host: h });
        }
    }

    let power = propagate_band(state, Band::Power);
    let feed = term(0, Port::LineLeft);
    for h in state.network.hosts() {
        if !power.connected(term(h, Port::Power), feed) {
            out.push(IsolationViolation::PowerLost { host: h });
        }
    }
    out
}

/// Per-host row of a fabric dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostDump {
    pub host: usize,
    pub mode: HostMode,
    pub filters: FilterBoxConfig,
}

pub fn dump(state: &FabricState) -> Vec<HostDump> {
    state
        .network
        .hosts()
        .map(|h| HostDump {
            host: h,
            mode: state.modes[h],
            filters: box_config(state.modes[h]),
        })
        .collect()
}

/// The other unit in `unit`'s KLJN component, if the component holds
/// exactly two units.
pub fn partner_unit(partition: &Partition, unit: Terminal) -> Option<Terminal> {
    let comp = &partition.components[partition.component(unit)];
    let units: Vec<_> = comp.iter().copied().filter(|t| t.is_unit()).collect();
    match units.as_slice() {
        [a, b] if *a == unit => Some(*b),
        [a, b] if *b == unit => Some(*a),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Loop;
    use crate::schedule::{full_schedule, rounds_for_distance};

    fn net(n: usize) -> Network {
        Network::new(n).unwrap()
    }

    fn round(n: &Network, loops: &[(usize, usize)]) -> Round {
        Round::new(loops.iter().map(|&(l, r)| Loop::new(n, l, r).unwrap()).collect())
    }

    #[test]
    fn truth_tables() {
        let s1 = box_config(HostMode::State1);
        assert_eq!((s1.a.passes_kljn, s1.a.passes_power), (true, true));
        assert_eq!((s1.b.passes_kljn, s1.b.passes_power), (false, false));
        assert_eq!((s1.c.passes_kljn, s1.c.passes_power), (true, false));
        assert_eq!((s1.d.passes_kljn, s1.d.passes_power), (false, true));
        assert_eq!((s1.e.passes_kljn, s1.e.passes_power), (false, true));
        let s2 = box_config(HostMode::State2);
        assert_eq!((s2.a.passes_kljn, s2.a.passes_power), (false, true));
        assert_eq!((s2.b.passes_kljn, s2.b.passes_power), (true, false));
        assert_eq!((s2.c.passes_kljn, s2.c.passes_power), (false, false));
        assert_eq!((s2.d.passes_kljn, s2.d.passes_power), (false, true));
        assert_eq!((s2.e.passes_kljn, s2.e.passes_power), (false, true));
    }

    #[test]
    fn modes_follow_endpoints() {
        let n = net(7);
        let st = modes_for_round(&n, &round(&n, &[(0, 7)])).unwrap();
        assert_eq!(st.mode(0), HostMode::State2);
        assert_eq!(st.mode(7), HostMode::State2);
        assert!((1..7).all(|h| st.mode(h) == HostMode::State1));

        let nn = &rounds_for_distance(&n, 1).unwrap()[0];
        let st = modes_for_round(&n, nn).unwrap();
        assert!(st.modes().iter().all(|m| *m == HostMode::State2));

        let st = modes_for_round(&n, &Round::default()).unwrap();
        assert!(st.modes().iter().all(|m| *m == HostMode::State1));

        let overlapping = Round {
            loops: vec![Loop::new(&n, 0, 3).unwrap(), Loop::new(&n, 1, 4).unwrap()],
        };
        assert!(matches!(modes_for_round(&n, &overlapping), Err(Error::OverlappingRound { .. })));
    }

    #[test]
    fn single_box_propagation() {
        let n = net(2);
        let inactive = FabricState::uniform(n, HostMode::State1);
        let k = propagate_band(&inactive, Band::Kljn);
        assert!(k.connected(term(1, Port::LineLeft), term(1, Port::LineRight)));
        assert!(!k.connected(term(1, Port::Power), term(1, Port::LineLeft)));
        let p = propagate_band(&inactive, Band::Power);
        assert!(p.connected(term(1, Port::Power), term(1, Port::LineLeft)));

        let active = inactive.with_mode(1, HostMode::State2);
        let k = propagate_band(&active, Band::Kljn);
        assert!(!k.connected(term(1, Port::UnitLeft), term(1, Port::UnitRight)));
        assert!(k.connected(term(1, Port::UnitLeft), term(0, Port::LineRight)));
        assert!(k.connected(term(1, Port::UnitRight), term(2, Port::LineLeft)));
        let p = propagate_band(&active, Band::Power);
        assert!(p.connected(term(1, Port::LineLeft), term(1, Port::LineRight)));
    }

    #[test]
    fn two_loops_sharing_host_three() {
        let n = net(7);
        let r = round(&n, &[(0, 3), (3, 6)]);
        let st = modes_for_round(&n, &r).unwrap();
        assert!(verify_round_isolation(&st, &r).is_empty());
        let k = propagate_band(&st, Band::Kljn);
        assert_eq!(partner_unit(&k, term(3, Port::UnitLeft)), Some(term(0, Port::UnitRight)));
        assert_eq!(partner_unit(&k, term(3, Port::UnitRight)), Some(term(6, Port::UnitLeft)));
        let paired = k.unit_groups().into_iter().filter(|g| g.len() == 2).count();
        assert_eq!(paired, 2);
    }

    #[test]
    fn end_to_end_loop() {
        let n = net(7);
        let r = round(&n, &[(0, 7)]);
        let st = modes_for_round(&n, &r).unwrap();
        assert!(verify_round_isolation(&st, &r).is_empty());
        let k = propagate_band(&st, Band::Kljn);
        let groups: Vec<_> = k.unit_groups().into_iter().filter(|g| g.len() > 1).collect();
        assert_eq!(groups, vec![vec![term(0, Port::UnitRight), term(7, Port::UnitLeft)]]);
    }

    #[test]
    fn misconfigured_host_is_reported() {
        let n = net(7);
        let r = round(&n, &[(0, 3), (3, 6)]);
        let st = modes_for_round(&n, &r).unwrap().with_mode(3, HostMode::State1);
        let v = verify_round_isolation(&st, &r);
        assert!(v.contains(&IsolationViolation::LoopBroken { left: 0, right: 3 }));
        assert!(v.contains(&IsolationViolation::LoopBroken { left: 3, right: 6 }));

        let st = modes_for_round(&n, &round(&n, &[(0, 7)])).unwrap().with_mode(4, HostMode::State2);
        assert!(!verify_round_isolation(&st, &round(&n, &[(0, 7)])).is_empty());
    }

    #[test]
    fn every_round_clean_small_networks() {
        for size in 1..=12 {
            let n = net(size);
            for (_, r) in full_schedule(&n).rounds() {
                let st = modes_for_round(&n, r).unwrap();
                assert!(verify_round_isolation(&st, r).is_empty(), "n={size} round={r:?}");
            }
        }
    }

    #[test]
    fn dump_lists_every_host() {
        let n = net(3);
        let d = dump(&FabricState::uniform(n, HostMode::State2));
        assert_eq!(d.len(), 4);
        assert_eq!(d[2].filters, box_config(HostMode::State2));
    }
}
