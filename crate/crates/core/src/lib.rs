//! Skyline dataset generation.
//!
//! A pool of source tables is joined into a universal table whose literals
//! span a hypercube of candidate datasets. The search algorithms walk that
//! cube with one-flip operators, valuate datasets through an estimator, and
//! keep an ε-approximate Pareto archive over several normalized measures.

pub mod bitmap;
pub mod error;
pub mod measures;
pub mod operators;
pub mod oracle;
pub mod search;
pub mod skyline;
pub mod synth;
pub mod tabular;
pub mod value;

pub use bitmap::StateBitmap;
pub use error::{Error, Result};
pub use measures::{
    Direction, Estimator, MeasureSet, MeasureSpec, PerfEntry, PerfVector, RawMeasures, TestLog,
};
pub use operators::{Materializer, OpKind, Operator, SearchDirection};
pub use search::{Algorithm, RunningGraph, SearchConfig, SearchOutcome};
pub use skyline::{GridPosition, SkylineGrid};
pub use tabular::{JoinSpec, Literal, Relation, UniversalTable};
pub use value::Value;
