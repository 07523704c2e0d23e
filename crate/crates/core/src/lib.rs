//! Gradient-free multidimensional scaling.
//!
//! The main entry point is [`search::run_csmds`], a coordinate-search MDS
//! optimizer with three sampling strategies ([`Variant`]): full search over
//! every signed axis step, randomized search with a fixed evaluation
//! probability, and bootstrapped search that learns per-point step
//! probabilities. [`baselines`] provides SMACOF and classical MDS for
//! comparison, [`data`] builds target matrices (Euclidean, k-NN geodesic,
//! MNIST), and [`eval`] scores embeddings by KNN accuracy.

pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod io;
pub mod rng;
pub mod search;
pub mod stress;
pub mod types;

pub use error::{Error, Result};
pub use search::{
    config_for_variant, optimal_move, run_csmds, search_coordinates, update_probabilities,
    CandidateStep, ConfigOverrides, CoordinateSearch, CsmdsRun, MoveOutcome,
};
pub use stress::{compute_distance_matrix, move_delta_stress, raw_stress, stress1, StressValue};
pub use types::{
    validate_target, Embedding, ProbabilityMatrix, RunConfig, RunState, Sign, TargetMatrix,
    TraceRecord, Variant,
};
