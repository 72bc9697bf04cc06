//! Candidate generation.
//!
//! Both generators rest on the same covering argument: partition the
//! verified prefix by value combinations over an attribute set chosen so
//! every group holds fewer than k prefix tuples, then issue one augmented
//! query per combination. Every tuple in the database matches exactly one
//! such query, and a query whose group holds fewer than k prefix tuples
//! must surface at least one new tuple if its cell contains any — so the
//! next-ranked tuple is always among the results.
//!
//! The DAG generator additionally keeps each result as a chain and works
//! only with chain heads: a non-head member is dominated by its own head,
//! so it can never be the next tuple. Heads that the evidence graph proves
//! dominated are filtered out; when a single head survives it *is* the next
//! tuple and is resolved without any candidate testing, possibly several
//! times in a row from one set of chains.

use std::collections::{BTreeSet, HashMap};

use crate::dominance::ChainId;
use crate::engine::{GetNextState, Phase};
use crate::error::EngineError;
use crate::interface::TopKSource;
use crate::query::Query;
use crate::schema::{AttrId, Schema, Tuple, Value};

/// Output of one candidate-generation round.
///
/// Either `resolved` carries tuples proven to occupy the next consecutive
/// ranks (no testing needed), or `candidates` carries the set that must go
/// to candidate testing — never both.
#[derive(Clone, Debug, Default)]
pub struct CandidateBatch {
    pub resolved: Vec<Tuple>,
    pub candidates: Vec<Tuple>,
    /// Chain the current t_h was consumed from, when identifiable.
    pub source_chain: Option<ChainId>,
}

impl CandidateBatch {
    pub fn is_exhausted(&self) -> bool {
        self.resolved.is_empty() && self.candidates.is_empty()
    }
}

/// Pick an attribute set whose value combinations split `top_h` into groups
/// of fewer than `k` tuples.
///
/// Greedy: repeatedly add the attribute that minimizes the largest group,
/// breaking ties by smaller domain and then attribute order. Distinct tuples
/// guarantee termination (singleton groups in the worst case).
pub fn find_partition_attributes(schema: &Schema, top_h: &[Tuple], k: usize) -> BTreeSet<AttrId> {
    let mut chosen: BTreeSet<AttrId> = BTreeSet::new();
    let group_max = |attrs: &BTreeSet<AttrId>| -> usize {
        let mut counts: HashMap<Vec<Value>, usize> = HashMap::new();
        for t in top_h {
            let key: Vec<Value> = attrs.iter().map(|a| t.value(*a)).collect();
            *counts.entry(key).or_default() += 1;
        }
        counts.values().max().copied().unwrap_or(0)
    };
    while group_max(&chosen) >= k && chosen.len() < schema.attr_count() {
        let mut best: Option<(usize, usize, AttrId)> = None;
        for a in schema.attr_ids() {
            if chosen.contains(&a) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.insert(a);
            let key = (group_max(&trial), schema.attr(a).domain_size(), a);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        match best {
            Some((_, _, attr)) => chosen.insert(attr),
            None => break,
        };
    }
    chosen
}

/// All augmented queries for an attribute set: one per value combination,
/// in domain order.
pub fn value_combinations(schema: &Schema, attrs: &BTreeSet<AttrId>) -> Vec<Query> {
    let mut queries = vec![Query::select_all()];
    for a in attrs {
        let mut next = Vec::with_capacity(queries.len() * schema.attr(*a).domain_size());
        for q in &queries {
            for v in 0..schema.attr(*a).domain_size() {
                next.push(q.clone().with(*a, Value(v as u16)));
            }
        }
        queries = next;
    }
    queries
}

/// Partition-based candidate generation: issue every augmented query and
/// return all returned non-prefix tuples. Complete but ignores the order
/// information in the results.
pub fn generate_candidates_baseline(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
) -> Result<CandidateBatch, EngineError> {
    let top_h = state.top_h_tuples();
    let attrs = find_partition_attributes(iface.schema(), &top_h, state.k());
    let schema = iface.schema().clone();
    let mut candidates: Vec<Tuple> = Vec::new();
    for q in value_combinations(&schema, &attrs) {
        let result = state.run_query(iface, &q, Phase::Generation)?;
        for t in result.returned {
            if !state.is_emitted(t.id) && !candidates.iter().any(|c| c.id == t.id) {
                candidates.push(t);
            }
        }
    }
    candidates.sort_by_key(|t| t.id);
    Ok(CandidateBatch { resolved: vec![], candidates, source_chain: None })
}

/// True when the current covering no longer guarantees completeness: an
/// overflowing chain with no unconsumed member may hide tuples that no
/// remaining chain covers.
fn needs_refresh(state: &GetNextState) -> bool {
    if state.covering().is_empty() {
        return true;
    }
    state.covering().iter().any(|cid| {
        let chain = state.graph().chain(*cid);
        chain.overflow && chain.head(state.emitted_ids()).is_none()
    })
}

/// Re-derive the covering from the current prefix: fresh partition, fresh
/// augmented queries (cache hits cost nothing), covering chains replaced.
fn refresh_covering(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
) -> Result<(), EngineError> {
    let top_h = state.top_h_tuples();
    let schema = iface.schema().clone();
    let attrs = find_partition_attributes(&schema, &top_h, state.k());
    let mut chains = Vec::new();
    for q in value_combinations(&schema, &attrs) {
        state.run_query(iface, &q, Phase::Generation)?;
        // The chain for this result is the latest one recorded for q.
        if let Some(chain) = state
            .graph()
            .chains()
            .iter()
            .rev()
            .find(|c| c.query == q)
        {
            if !chain.members.is_empty() {
                chains.push(chain.id);
            }
        }
    }
    state.set_covering(chains);
    Ok(())
}

/// DAG-based candidate generation.
///
/// Resolves as many consecutive next-ranked tuples as the evidence allows
/// (queueing them on the state and reporting them in `resolved`); otherwise
/// returns the filtered head set as `candidates` for testing. An empty batch
/// signals an exhausted database.
pub fn generate_candidates_dag(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
) -> Result<CandidateBatch, EngineError> {
    let mut resolved: Vec<Tuple> = Vec::new();
    let mut source_of_last: Option<ChainId> = None;
    loop {
        if needs_refresh(state) {
            refresh_covering(state, iface)?;
        }
        // Heads of the covering chains, in chain-creation order.
        let heads: Vec<(ChainId, Tuple)> = state
            .covering()
            .to_vec()
            .into_iter()
            .filter_map(|cid| {
                state.graph().chain(cid).head(state.emitted_ids()).map(|id| {
                    let t = state.seen_tuple(id).expect("chain members were observed").clone();
                    (cid, t)
                })
            })
            .collect();
        if heads.is_empty() {
            state.set_exhausted();
            return Ok(CandidateBatch { resolved, candidates: vec![], source_chain: source_of_last });
        }
        let t_h = state
            .t_h()
            .ok_or_else(|| EngineError::Internal("generation before bootstrap".into()))?;
        let source = heads
            .iter()
            .map(|(cid, _)| *cid)
            .chain(state.covering().iter().copied())
            .find(|cid| state.graph().chain(*cid).contains(t_h.id));

        // Compare t_h with the head of every other chain; consecutive ranks
        // are usually directly comparable, and each comparison is one
        // memoized query at most.
        for (cid, head) in &heads {
            if Some(*cid) != source {
                state.compare_direct(iface, &t_h, head, Phase::Generation)?;
            }
        }

        let survivors = |state: &GetNextState, set: &[(ChainId, Tuple)]| -> Vec<(ChainId, Tuple)> {
            set.iter()
                .filter(|(_, t)| !state.dominated_by_non_emitted(t.id))
                .cloned()
                .collect()
        };

        let mut candidates = survivors(state, &heads);

        // Pairwise comparisons among the remaining candidates.
        if candidates.len() > 1 {
            for i in 0..candidates.len() {
                for j in (i + 1)..candidates.len() {
                    let (a, b) = (candidates[i].1.clone(), candidates[j].1.clone());
                    state.compare_direct(iface, &a, &b, Phase::Generation)?;
                }
            }
            candidates = survivors(state, &candidates);
        }

        // Still tied: hunt for bridges. Anything a candidate already
        // dominates can, with one more comparison, prove indirect
        // domination over another candidate. Sweep, prune, repeat while it
        // makes progress; comparisons are memoized so repeat sweeps are
        // query-free.
        while candidates.len() > 1 {
            let snapshot = candidates.clone();
            for (ai, (_, a)) in snapshot.iter().enumerate() {
                for (bi, (_, b)) in snapshot.iter().enumerate() {
                    if ai == bi || state.graph().dominates(a.id, b.id) {
                        continue;
                    }
                    for y in state.graph().reachable_from(a.id) {
                        if state.is_emitted(y) || y == b.id {
                            continue;
                        }
                        let bridge = match state.seen_tuple(y) {
                            Some(t) => t.clone(),
                            None => continue,
                        };
                        state.compare_direct(iface, &bridge, b, Phase::Generation)?;
                        if state.graph().dominates(a.id, b.id) {
                            break;
                        }
                    }
                }
            }
            let pruned = survivors(state, &candidates);
            if pruned.len() == candidates.len() {
                break;
            }
            candidates = pruned;
        }

        match candidates.len() {
            0 => {
                return Err(EngineError::Internal(
                    "all chain heads are dominated; covering invariant broken".into(),
                ))
            }
            1 => {
                let (cid, tuple) = candidates.into_iter().next().expect("len checked");
                state.queue_resolved(tuple.clone(), true);
                resolved.push(tuple);
                source_of_last = Some(cid);
                // Keep resolving: multiple consecutive ranks often fall out
                // of one set of chains.
                continue;
            }
            _ => {
                if !resolved.is_empty() {
                    // Exclusive contract: report the resolved run now; the
                    // open candidate set will be recomputed (from cache,
                    // query-free) on the next call.
                    return Ok(CandidateBatch {
                        resolved,
                        candidates: vec![],
                        source_chain: source_of_last,
                    });
                }
                let mut out: Vec<Tuple> = candidates.into_iter().map(|(_, t)| t).collect();
                out.sort_by_key(|t| t.id);
                return Ok(CandidateBatch { resolved, candidates: out, source_chain: source });
            }
        }
    }
}
