//! Monte Carlo and exact tools for bond percolation on high-dimensional tori
//! and on `Z^d`.

pub mod baseline;
pub mod boundary;
pub mod cluster;
pub mod coupling;
pub mod critical;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod lattice;
pub mod parallel;
pub mod rng;
pub mod stats;
pub mod union_find;

pub use baseline::{er_sample_cmax, er_scaling_experiment, ERRecord, ERSpec};
pub use boundary::{
    four_point_experiment, long_path_experiment, third_moment_growth, BoundaryCondition,
    FourPointResult,
};
pub use cluster::{
    decompose_torus, explore_cluster, explore_cluster_with, ClusterStats, ExplorationResult,
    ExploreOptions, Graph, Schedule, Torus, TorusConfiguration,
};
pub use coupling::{
    coupled_explore, verify_coupling_invariants, Color, ColorLedger, CoupledResult, Violation,
};
pub use critical::{
    exponent_fit, gamma_fit, solve_pc_torus, subcritical_bound_check, window_experiment,
    CriticalConfig, PcSolution, PowerFit, WindowRecord,
};
pub use error::{PercError, Result};
pub use estimators::{
    cluster_moment_bulk, cmax_distribution, estimate_chi_lattice, estimate_chi_torus, estimate_tau,
    estimate_tilde_chi, estimate_xi, GraphKind,
};
pub use exact::{
    check_bk, check_fkg, check_tree_graph, enumerate_measure, lemma51_check, ExactCounts,
    ExactMeasure,
};
pub use lattice::{BondKey, Coords, Model, SpecFields, TorusSpec, VertexT, VertexZ};
pub use rng::RandomStream;
pub use stats::{Estimate, QuantileSummary};
