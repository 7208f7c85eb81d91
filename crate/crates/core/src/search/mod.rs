//! Skyline search: reduction from the universal table, bidirectional search
//! with optional pruning, and diversified bidirectional search.

mod config;
mod div;
mod engine;
mod graph;
mod prune;

pub use config::{Algorithm, SearchConfig};
pub use div::{dis_score, div_score, diversify_level};
pub use engine::{
    back_st, run, run_apx, run_bi, run_div, PrunedState, RunStats, SearchOutcome, Termination,
};
pub use graph::RunningGraph;
pub use prune::{can_prune, param_eps_dominates, PrunedRegion, MAX_PAIRS};
