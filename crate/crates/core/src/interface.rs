//! The top-k query interface.
//!
//! [`TopKSource`] is the only view the extraction algorithms get of a
//! database: submit a conjunctive query, receive at most `k` tuples in rank
//! order plus an overflow flag. [`TopKInterface`] simulates such a site over
//! an in-memory dataset; it never leaks `n`, rank values, or non-matching
//! tuples. Ground-truth ranks for tests live behind the separate
//! [`RankOracle`] handle.

use std::sync::Arc;

use thiserror::Error;

use crate::dataset::Dataset;
use crate::error::{DataError, InterfaceError};
use crate::query::{Query, QueryResult, ResultStatus};
use crate::rank::{RankedOrder, RankingFunction};
use crate::schema::{Schema, Tuple, TupleId};

/// Anything that answers conjunctive queries with a ranked top-k slice.
pub trait TopKSource {
    fn schema(&self) -> &Schema;

    /// The interface's result cap `k` (always > 1).
    fn k(&self) -> usize;

    /// Cumulative number of queries actually issued.
    fn query_count(&self) -> u64;

    fn execute(&mut self, query: &Query) -> Result<QueryResult, InterfaceError>;
}

/// Failures while standing up a simulated site.
#[derive(Debug, Error)]
pub enum SetupError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Interface(#[from] InterfaceError),
}

/// Build a simulated top-k site plus the test-only rank oracle for it.
pub fn simulate(
    dataset: Arc<Dataset>,
    ranking: &RankingFunction,
    k: usize,
    budget: Option<u64>,
) -> Result<(TopKInterface, RankOracle), SetupError> {
    let order = Arc::new(RankedOrder::build(&dataset, ranking)?);
    let iface = TopKInterface::new(Arc::clone(&dataset), Arc::clone(&order), k, budget)?;
    let oracle = RankOracle { dataset, order };
    Ok((iface, oracle))
}

/// A simulated hidden database with a top-k interface and query accounting.
pub struct TopKInterface {
    dataset: Arc<Dataset>,
    order: Arc<RankedOrder>,
    k: usize,
    budget: Option<u64>,
    count: u64,
    words: usize,
    /// One bitmask per (attribute, value), bit i set when the tuple at rank
    /// i+1 carries that value. Flattened via `offsets`.
    postings: Vec<Vec<u64>>,
    offsets: Vec<usize>,
}

impl TopKInterface {
    pub fn new(
        dataset: Arc<Dataset>,
        order: Arc<RankedOrder>,
        k: usize,
        budget: Option<u64>,
    ) -> Result<Self, InterfaceError> {
        if k <= 1 {
            return Err(InterfaceError::InvalidK { k });
        }
        let n = dataset.len();
        let words = n.div_ceil(64);
        let schema = dataset.schema();
        let mut offsets = Vec::with_capacity(schema.attr_count());
        let mut total = 0usize;
        for attr in schema.attributes() {
            offsets.push(total);
            total += attr.domain_size();
        }
        let mut postings = vec![vec![0u64; words]; total];
        for (pos, id) in order.ids_by_rank().iter().enumerate() {
            let tuple = dataset.tuple(*id);
            for (a, v) in tuple.values.iter().enumerate() {
                let mask = &mut postings[offsets[a] + v.index()];
                mask[pos / 64] |= 1u64 << (pos % 64);
            }
        }
        Ok(TopKInterface { dataset, order, k, budget, count: 0, words, postings, offsets })
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    fn validate(&self, query: &Query) -> Result<(), InterfaceError> {
        let schema = self.dataset.schema();
        for (attr, value) in query.predicates() {
            if attr.index() >= schema.attr_count() {
                return Err(InterfaceError::UnknownAttribute { attr });
            }
            if value.index() >= schema.attr(attr).domain_size() {
                return Err(InterfaceError::UnknownValue {
                    attribute: schema.attr(attr).name.clone(),
                    value: value.0,
                });
            }
        }
        Ok(())
    }

    /// Rank positions (0-based) of the first `limit` matches, plus whether
    /// any further match exists.
    fn top_positions(&self, query: &Query, limit: usize) -> (Vec<usize>, bool) {
        let n = self.dataset.len();
        let mut out = Vec::with_capacity(limit.min(n));
        if query.is_empty() {
            let take = limit.min(n);
            out.extend(0..take);
            return (out, n > limit);
        }
        let masks: Vec<&Vec<u64>> = query
            .predicates()
            .map(|(a, v)| &self.postings[self.offsets[a.index()] + v.index()])
            .collect();
        for w in 0..self.words {
            let mut word = masks.iter().fold(u64::MAX, |acc, m| acc & m[w]);
            if w == self.words - 1 && n % 64 != 0 {
                word &= (1u64 << (n % 64)) - 1;
            }
            while word != 0 {
                let bit = word.trailing_zeros() as usize;
                if out.len() == limit {
                    return (out, true);
                }
                out.push(w * 64 + bit);
                word &= word - 1;
            }
        }
        (out, false)
    }
}

impl TopKSource for TopKInterface {
    fn schema(&self) -> &Schema {
        self.dataset.schema()
    }

    fn k(&self) -> usize {
        self.k
    }

    fn query_count(&self) -> u64 {
        self.count
    }

    fn execute(&mut self, query: &Query) -> Result<QueryResult, InterfaceError> {
        if let Some(budget) = self.budget {
            if self.count >= budget {
                return Err(InterfaceError::BudgetExceeded { issued: self.count });
            }
        }
        self.validate(query)?;
        self.count += 1;
        let (positions, more) = self.top_positions(query, self.k);
        let status = if positions.is_empty() {
            ResultStatus::Underflow
        } else if more {
            ResultStatus::Overflow
        } else {
            ResultStatus::Valid
        };
        let returned = positions
            .into_iter()
            .map(|pos| self.dataset.tuple(self.order.ids_by_rank()[pos]).clone())
            .collect();
        Ok(QueryResult { returned, status })
    }
}

/// Ground-truth rank lookups; test/harness use only, never handed to the
/// extraction algorithms.
#[derive(Clone)]
pub struct RankOracle {
    dataset: Arc<Dataset>,
    order: Arc<RankedOrder>,
}

impl RankOracle {
    /// 1-based true rank of a tuple.
    pub fn rank_of(&self, tuple: &Tuple) -> Result<u32, InterfaceError> {
        if tuple.id.index() >= self.dataset.len()
            || self.dataset.tuple(tuple.id).values != tuple.values
        {
            return Err(InterfaceError::Remote(format!("tuple {} not in dataset", tuple.id)));
        }
        Ok(self.order.rank_of(tuple.id).expect("rank exists for valid id"))
    }

    pub fn rank_of_id(&self, id: TupleId) -> Option<u32> {
        if id.index() >= self.dataset.len() {
            return None;
        }
        self.order.rank_of(id)
    }

    /// All tuple ids from rank 1 to rank n.
    pub fn true_order(&self) -> &[TupleId] {
        self.order.ids_by_rank()
    }

    /// The true top-h tuples in rank order.
    pub fn true_top(&self, h: usize) -> Vec<Tuple> {
        self.order.ids_by_rank()[..h.min(self.dataset.len())]
            .iter()
            .map(|id| self.dataset.tuple(*id).clone())
            .collect()
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }
}

/// A view of a source with constraint predicates prefixed to every query.
///
/// Queries that contradict the constraint are answered with an underflow on
/// the client side, without spending a query.
pub struct ConstrainedSource<'a> {
    inner: &'a mut dyn TopKSource,
    constraint: Query,
}

impl<'a> ConstrainedSource<'a> {
    pub fn new(inner: &'a mut dyn TopKSource, constraint: Query) -> Self {
        ConstrainedSource { inner, constraint }
    }
}

impl TopKSource for ConstrainedSource<'_> {
    fn schema(&self) -> &Schema {
        self.inner.schema()
    }

    fn k(&self) -> usize {
        self.inner.k()
    }

    fn query_count(&self) -> u64 {
        self.inner.query_count()
    }

    fn execute(&mut self, query: &Query) -> Result<QueryResult, InterfaceError> {
        match self.constraint.merged(query) {
            Some(merged) => self.inner.execute(&merged),
            None => Ok(QueryResult { returned: vec![], status: ResultStatus::Underflow }),
        }
    }
}
