use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("schema conflict: attribute `{attribute}` appears in `{first}` and `{second}` without a join key")]
    SchemaConflict {
        attribute: String,
        first: String,
        second: String,
    },

    #[error("malformed relation `{relation}`: {reason}")]
    Malformed { relation: String, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("operator not applicable: bit {bit} is already {}", if *.set { "set" } else { "clear" })]
    Inapplicable { bit: usize, set: bool },

    #[error("degenerate state {bitmap}: materialized dataset is empty")]
    Degenerate { bitmap: String },

    #[error("measure `{measure}` value {value} lies below its lower bound {lower}")]
    BoundViolation {
        measure: String,
        value: f64,
        lower: f64,
    },

    #[error("estimator failed on {bitmap}: {reason}")]
    Estimator { bitmap: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("enumeration needs {bits} bits ({states} bitmaps) but the cap is {cap} bits")]
    EnumerationCap { bits: usize, cap: usize, states: u128 },
}
