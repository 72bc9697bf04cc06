//! deeptopk: retrieve the top-h (h > k) ranked tuples from a database that
//! is only reachable through a restrictive top-k conjunctive-query
//! interface, minimizing the number of queries issued.
//!
//! The crate splits into:
//!
//! - data model and the simulated top-k site ([`schema`], [`query`],
//!   [`rank`], [`dataset`], [`csv_io`], [`interface`]);
//! - dominance evidence ([`dominance`]): direct comparisons through most
//!   specific queries, plus a DAG for transitive inference;
//! - [`generation`]: partition-based and chain/DAG-based candidate
//!   generation for the next-ranked tuple;
//! - [`testing`]: beyond-h minimal queries derived from minimal infrequent
//!   itemsets, rank testing, query ordering, and exhaustive oracles;
//! - [`engine`]: the iterative extraction drivers and reports;
//! - [`metrics`]: Kendall tau distance and partial-order linearization;
//! - [`experiment`]: the query-cost measurement harness;
//! - [`connector`]: the wire contract for remote top-k endpoints.

pub mod connector;
pub mod csv_io;
pub mod dataset;
pub mod dominance;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod generation;
pub mod interface;
pub mod metrics;
pub mod query;
pub mod rank;
pub mod schema;
pub mod testing;

pub use dataset::{gen_boolean, Dataset};
pub use engine::{
    get_next_beyond_h, get_next_ordered, get_top_h, get_top_h_constrained,
    get_top_h_postfiltered, run_extraction, Algorithm, EngineOptions, ExtractionReport,
    GetNextState,
};
pub use error::{
    ConnectorError, DataError, EngineError, ExperimentError, GraphError, InterfaceError,
    MetricsError, TestingError,
};
pub use interface::{simulate, RankOracle, TopKInterface, TopKSource};
pub use query::{Query, QueryResult, ResultStatus};
pub use rank::{Direction, RankingFunction};
pub use schema::{AttrId, Attribute, Schema, Tuple, TupleId, Value};
