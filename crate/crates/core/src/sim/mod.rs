//! Simulation of the coupled network and empirical property checks.

mod ensemble;
mod integrate;
mod io;
mod network;
mod order;

pub use ensemble::{ensemble_converge, random_initial_state, EnsembleStats, PatternHistogram, TrialFailure, CENTRAL_FRACTION};
pub use integrate::{
    classify, integrate, integrate_lumped, perturbed_homogeneous, Classification, Method, Pattern, SimConfig,
    SimulationResult, Targets, TrajectorySample, PERTURBATION,
};
pub use io::{read_trajectory_csv, write_snapshot_csv, write_trajectory_csv, SnapshotMeta};
pub use network::{network_rhs, Network, PROJ_TOL};
pub use order::{
    min_signed_gap, network_signs, order_preservation_check, sample_ordered_pairs, OrderConfig, OrderReport,
    OrderWitness,
};
