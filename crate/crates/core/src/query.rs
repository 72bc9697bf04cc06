//! Conjunctive equality queries and their results.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::DataError;
use crate::schema::{AttrId, Schema, Tuple, Value};

/// A conjunction of equality predicates over a subset of attributes.
///
/// The empty query is `SELECT *`. Each attribute appears at most once;
/// the predicate map is ordered so queries hash and render deterministically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    predicates: BTreeMap<AttrId, Value>,
}

impl Query {
    /// `SELECT *`: matches every tuple.
    pub fn select_all() -> Self {
        Query::default()
    }

    pub fn from_predicates(predicates: impl IntoIterator<Item = (AttrId, Value)>) -> Self {
        Query { predicates: predicates.into_iter().collect() }
    }

    /// Build a query from `(attribute name, value label)` pairs.
    pub fn parse(schema: &Schema, pairs: &[(&str, &str)]) -> Result<Self, DataError> {
        let mut predicates = BTreeMap::new();
        for (name, label) in pairs {
            let attr = schema
                .attr_id(name)
                .ok_or_else(|| DataError::UnknownRankingAttribute { name: name.to_string() })?;
            let value = schema.value_of(attr, label).ok_or_else(|| DataError::UnknownLabel {
                row: 0,
                attribute: name.to_string(),
                value: label.to_string(),
            })?;
            predicates.insert(attr, value);
        }
        Ok(Query { predicates })
    }

    pub fn set(&mut self, attr: AttrId, value: Value) {
        self.predicates.insert(attr, value);
    }

    pub fn with(mut self, attr: AttrId, value: Value) -> Self {
        self.set(attr, value);
        self
    }

    pub fn get(&self, attr: AttrId) -> Option<Value> {
        self.predicates.get(&attr).copied()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (AttrId, Value)> + '_ {
        self.predicates.iter().map(|(a, v)| (*a, *v))
    }

    /// The query's attribute set (`S(q)`).
    pub fn attribute_set(&self) -> impl Iterator<Item = AttrId> + '_ {
        self.predicates.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn matches(&self, tuple: &Tuple) -> bool {
        self.predicates.iter().all(|(a, v)| tuple.value(*a) == *v)
    }

    /// Merge `other`'s predicates into this query. Returns `None` when the
    /// two queries require different values for the same attribute.
    pub fn merged(&self, other: &Query) -> Option<Query> {
        let mut predicates = self.predicates.clone();
        for (a, v) in other.predicates() {
            match predicates.get(&a) {
                Some(existing) if *existing != v => return None,
                _ => {
                    predicates.insert(a, v);
                }
            }
        }
        Some(Query { predicates })
    }

    /// Human-readable rendering against a schema, e.g. `A3=1 AND A5=0`.
    pub fn display<'a>(&'a self, schema: &'a Schema) -> QueryDisplay<'a> {
        QueryDisplay { query: self, schema }
    }
}

pub struct QueryDisplay<'a> {
    query: &'a Query,
    schema: &'a Schema,
}

impl fmt::Display for QueryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.query.is_empty() {
            return write!(f, "*");
        }
        let mut first = true;
        for (a, v) in self.query.predicates() {
            if !first {
                write!(f, " AND ")?;
            }
            first = false;
            write!(f, "{}={}", self.schema.attr(a).name, self.schema.label(a, v))?;
        }
        Ok(())
    }
}

/// Outcome class of a query against a top-k interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResultStatus {
    /// More than `k` tuples matched; only the top `k` were returned.
    Overflow,
    /// Between 1 and `k` tuples matched; all of them were returned.
    Valid,
    /// No tuple matched.
    Underflow,
}

/// The rank-ordered slice a top-k interface returns for one query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub returned: Vec<Tuple>,
    pub status: ResultStatus,
}

impl QueryResult {
    pub fn contains(&self, id: crate::schema::TupleId) -> bool {
        self.returned.iter().any(|t| t.id == id)
    }

    pub fn position(&self, id: crate::schema::TupleId) -> Option<usize> {
        self.returned.iter().position(|t| t.id == id)
    }
}
