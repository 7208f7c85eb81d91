//! Dominance, the ε-grid archive and the exact Pareto filter.

mod dominance;
mod exact;
mod grid;

pub use dominance::{dominates, eps_dominates};
pub use exact::exact_pareto;
pub use grid::{GridPosition, Occupant, SkylineGrid, Submission};
