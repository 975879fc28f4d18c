//! Simulation and analysis of Kirchhoff-law–Johnson-noise (KLJN) key
//! distribution over a one-dimensional power-line chain.
//!
//! - [`grid`]: chain network, loops, overlap predicate
//! - [`schedule`]: distance-by-distance round schedule and its checks
//! - [`fabric`]: switched filter boxes and band reachability
//! - [`exchange`]: noise-based bit exchange over one loop
//! - [`adversary`]: passive eavesdropper statistics
//! - [`timing`]: KE durations and bandwidth limits
//! - [`sim`]: full-network runs composing all of the above

pub mod adversary;
pub mod error;
pub mod exchange;
pub mod fabric;
pub mod grid;
pub mod schedule;
pub mod seed;
pub mod sim;
pub mod stats;
pub mod timing;

pub use adversary::{eve_guess_mixed_ordering, eve_observe, indistinguishability_test, EveObservation, GuessReport, IndistinguishabilityReport};
pub use error::{Error, Result};
pub use exchange::{
    classify_slot, estimate_loop_resistance, exchange_key, expected_mean_squares, simulate_slot, Bit, ChannelRecord, Classification,
    ExchangeReport, MeasureChannel, NoiseParams, SlotOutcome,
};
pub use fabric::{box_config, modes_for_round, propagate_band, verify_round_isolation, Band, FabricState, FilterBoxConfig, HostMode, IsolationViolation};
pub use grid::{loops_overlap, Loop, Network, Segment};
pub use schedule::{full_schedule, ke_count_closed_form, min_rounds_oracle, rounds_for_distance, verify_schedule, Round, Schedule, ScheduleViolation};
pub use sim::{simulate_network, NetworkSimulation, SimulationConfig};
pub use timing::{ke_duration, network_key_distribution_time, validate_bandwidth, BandwidthCheck, TimingModel};
