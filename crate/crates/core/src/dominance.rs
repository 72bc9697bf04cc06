//! Dominance evidence: direct comparability and the dominance DAG.
//!
//! A query result proves rank order among the tuples it returns (and over
//! any matching tuple it hides behind an overflow). Those facts accumulate
//! as directed edges; reachability then yields indirect domination. Two
//! tuples are directly comparable exactly when the most specific query
//! matching both returns at least one of them.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::GraphError;
use crate::query::{Query, QueryResult, ResultStatus};
use crate::schema::{AttrId, Tuple, TupleId};

/// Result of ordering two tuples through one query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparisonOutcome {
    FirstDominates,
    SecondDominates,
    /// The most specific query returned neither tuple; no single query can
    /// ever order this pair.
    Incomparable,
}

/// The conjunction of equality predicates on exactly the attributes where
/// the two tuples agree. It is the unique most selective query matching
/// both; if it cannot return one of them, no query can.
pub fn most_specific_query(t: &Tuple, u: &Tuple) -> Query {
    debug_assert_eq!(t.values.len(), u.values.len());
    Query::from_predicates(
        t.values
            .iter()
            .zip(&u.values)
            .enumerate()
            .filter(|(_, (a, b))| a == b)
            .map(|(i, (a, _))| (AttrId(i as u16), *a)),
    )
}

/// Classify a pair against a query result that was produced by a query
/// matching both tuples.
pub fn outcome_from_result(result: &QueryResult, first: TupleId, second: TupleId) -> ComparisonOutcome {
    match (result.position(first), result.position(second)) {
        (Some(a), Some(b)) if a < b => ComparisonOutcome::FirstDominates,
        (Some(_), Some(_)) => ComparisonOutcome::SecondDominates,
        (Some(_), None) => ComparisonOutcome::FirstDominates,
        (None, Some(_)) => ComparisonOutcome::SecondDominates,
        (None, None) => ComparisonOutcome::Incomparable,
    }
}

/// Identifier of a recorded chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainId(pub usize);

/// The rank-ordered tuple list one query returned.
#[derive(Clone, Debug)]
pub struct Chain {
    pub id: ChainId,
    pub query: Query,
    pub members: Vec<TupleId>,
    /// Overflowing chains may hide matching tuples below their last member;
    /// valid ones are complete enumerations of their selection.
    pub overflow: bool,
}

impl Chain {
    /// The best-ranked member not yet consumed, if any.
    pub fn head<'a>(&self, consumed: &HashSet<TupleId>) -> Option<TupleId> {
        self.members.iter().copied().find(|id| !consumed.contains(id))
    }

    pub fn remaining(&self, consumed: &HashSet<TupleId>) -> impl Iterator<Item = TupleId> + '_ {
        let consumed = consumed.clone();
        self.members.iter().copied().filter(move |id| !consumed.contains(id))
    }

    pub fn contains(&self, id: TupleId) -> bool {
        self.members.contains(&id)
    }
}

/// Directed acyclic graph of observed domination facts plus every chain
/// recorded during a session.
#[derive(Debug, Default)]
pub struct DominanceGraph {
    succ: BTreeMap<TupleId, BTreeSet<TupleId>>,
    chains: Vec<Chain>,
    edge_count: usize,
    /// Memoized reachability, invalidated wholesale on edge insertion.
    reach_memo: RefCell<HashMap<TupleId, HashSet<TupleId>>>,
}

impl DominanceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = TupleId> + '_ {
        self.succ.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (TupleId, TupleId)> + '_ {
        self.succ.iter().flat_map(|(u, vs)| vs.iter().map(move |v| (*u, *v)))
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn chain(&self, id: ChainId) -> &Chain {
        &self.chains[id.0]
    }

    fn ensure_node(&mut self, id: TupleId) {
        self.succ.entry(id).or_default();
    }

    /// Record `u` above `v`. Errors if that contradicts recorded evidence,
    /// which would mean the interface ranking is not a static total order.
    pub fn add_edge(&mut self, u: TupleId, v: TupleId) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::CycleDetected { from: u, to: v });
        }
        self.ensure_node(u);
        self.ensure_node(v);
        if self.succ[&u].contains(&v) {
            return Ok(false);
        }
        if self.reaches(v, u) {
            return Err(GraphError::CycleDetected { from: u, to: v });
        }
        self.succ.get_mut(&u).expect("node exists").insert(v);
        self.edge_count += 1;
        self.reach_memo.borrow_mut().clear();
        Ok(true)
    }

    /// Record a query result: the returned list becomes a chain and every
    /// ordered pair among the returned tuples becomes an edge.
    pub fn add_result_edges(&mut self, query: &Query, result: &QueryResult) -> Result<ChainId, GraphError> {
        let members: Vec<TupleId> = result.returned.iter().map(|t| t.id).collect();
        for (i, u) in members.iter().enumerate() {
            self.ensure_node(*u);
            for v in &members[i + 1..] {
                self.add_edge(*u, *v)?;
            }
        }
        let id = ChainId(self.chains.len());
        self.chains.push(Chain {
            id,
            query: query.clone(),
            members,
            overflow: result.status == ResultStatus::Overflow,
        });
        Ok(id)
    }

    fn reaches(&self, from: TupleId, to: TupleId) -> bool {
        if !self.succ.contains_key(&from) || !self.succ.contains_key(&to) {
            return false;
        }
        if let Some(set) = self.reach_memo.borrow().get(&from) {
            return set.contains(&to);
        }
        let mut seen = HashSet::new();
        let mut stack = vec![from];
        while let Some(node) = stack.pop() {
            if let Some(nexts) = self.succ.get(&node) {
                for n in nexts {
                    if seen.insert(*n) {
                        stack.push(*n);
                    }
                }
            }
        }
        let hit = seen.contains(&to);
        self.reach_memo.borrow_mut().insert(from, seen);
        hit
    }

    /// True iff `v` is reachable from `u`: direct or indirect domination.
    /// Issues no queries.
    pub fn dominates(&self, u: TupleId, v: TupleId) -> bool {
        u != v && self.reaches(u, v)
    }

    /// True iff the direct edge `u -> v` has been recorded.
    pub fn has_edge(&self, u: TupleId, v: TupleId) -> bool {
        self.succ.get(&u).is_some_and(|vs| vs.contains(&v))
    }

    /// All nodes reachable from `u`, sorted.
    pub fn reachable_from(&self, u: TupleId) -> Vec<TupleId> {
        let mut out: Vec<TupleId> = self
            .succ
            .keys()
            .filter(|v| self.dominates(u, **v))
            .copied()
            .collect();
        out.sort_unstable();
        out
    }

    /// DOT-format dump for debugging.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dominance {\n");
        for node in self.succ.keys() {
            let _ = writeln!(out, "  \"{node}\";");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  \"{u}\" -> \"{v}\";");
        }
        out.push_str("}\n");
        out
    }
}
