//! Error types shared across the crate.

use thiserror::Error;

use crate::schema::{AttrId, TupleId};

/// Validation and ingestion failures for schemas and datasets.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("schema has no attributes")]
    EmptySchema,
    #[error("schema has {count} attributes, more than the supported maximum of {max}")]
    TooManyAttributes { count: usize, max: usize },
    #[error("duplicate attribute name `{name}`")]
    DuplicateAttribute { name: String },
    #[error("attribute `{attribute}` has a domain of size {size}; at least 2 values are required")]
    DegenerateDomain { attribute: String, size: usize },
    #[error("attribute `{attribute}` lists value `{value}` more than once")]
    DuplicateDomainValue { attribute: String, value: String },
    #[error("row {row} has {got} values, expected {expected}")]
    RowArity { row: usize, got: usize, expected: usize },
    #[error("row {row} duplicates the value vector of row {first_row}")]
    DuplicateTuple { row: usize, first_row: usize },
    #[error("null/empty cell at row {row}, column `{column}`")]
    NullCell { row: usize, column: String },
    #[error("row {row}: value `{value}` is not in the domain of attribute `{attribute}`")]
    UnknownLabel { row: usize, attribute: String, value: String },
    #[error("cannot generate {n} distinct tuples over {m} boolean attributes (capacity {capacity})")]
    Capacity { n: usize, m: usize, capacity: u128 },
    #[error("skew p = {p} must lie strictly between 0 and 1")]
    InvalidSkew { p: f64 },
    #[error("gave up generating {n} distinct tuples after {attempts} draws; the skew is too extreme for this capacity")]
    GenerationStalled { n: usize, attempts: u64 },
    #[error("ranking column `{column}` is not a permutation of 1..={n}: {detail}")]
    BadRankColumn { column: String, n: usize, detail: String },
    #[error("ranking refers to unknown attribute `{name}`")]
    UnknownRankingAttribute { name: String },
    #[error("dataset has a `__rank__` column but a non-explicit ranking was requested")]
    AmbiguousRanking,
    #[error("explicit ranking requested but the dataset has no `__rank__` column")]
    MissingRankColumn,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Failures raised by a top-k query interface.
#[derive(Debug, Error)]
pub enum InterfaceError {
    #[error("query budget exhausted after {issued} queries")]
    BudgetExceeded { issued: u64 },
    #[error("query references unknown attribute {attr}")]
    UnknownAttribute { attr: AttrId },
    #[error("query requires value {value} outside the domain of attribute `{attribute}`")]
    UnknownValue { attribute: String, value: u16 },
    #[error("k must be greater than 1, got {k}")]
    InvalidK { k: usize },
    #[error("remote interface error: {0}")]
    Remote(String),
}

/// Inconsistencies detected while recording dominance evidence.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error(
        "recording {from} above {to} contradicts earlier evidence; \
         the interface ranking is not a static total order"
    )]
    CycleDetected { from: TupleId, to: TupleId },
    #[error(
        "tuple {tuple} matches a non-overflowing query but was absent from its result; \
         the interface ranking is not consistent"
    )]
    InconsistentResult { tuple: TupleId },
}

/// Failures from candidate testing preconditions.
#[derive(Debug, Error)]
pub enum TestingError {
    #[error("candidate testing requires h >= k (got h = {h}, k = {k})")]
    TopHSmallerThanK { h: usize, k: usize },
    #[error("candidate {candidate} is already among the verified tuples")]
    CandidateInTopH { candidate: TupleId },
}

/// Extraction engine failures.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Interface(#[from] InterfaceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Testing(#[from] TestingError),
    #[error("h must be at least 1")]
    InvalidTarget,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Ranking-metric failures.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("rankings do not cover the same element set")]
    ElementMismatch,
}

/// Remote connector failures.
#[derive(Debug, Error)]
pub enum ConnectorError {
    #[error("hourly query budget of {per_hour} exhausted")]
    RateLimited { per_hour: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed wire response: {0}")]
    Protocol(String),
}

/// Experiment-harness failures.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("experiment config invalid: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Interface(#[from] InterfaceError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
