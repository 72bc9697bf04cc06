//! Candidate testing.
//!
//! To confirm that a candidate occupies the next rank we must rule out any
//! unknown tuple above it. Only queries matching the candidate can reveal
//! such a tuple, and among those only the *minimal* ones that return
//! anything beyond the verified prefix need to run. Those minimal queries
//! are in one-one correspondence with the minimal infrequent itemsets of a
//! small transactional encoding of the prefix, mined levelwise here.

use std::collections::BTreeSet;

use crate::dominance::DominanceGraph;
use crate::engine::{GetNextState, Phase};
use crate::error::{EngineError, InterfaceError, TestingError};
use crate::interface::TopKSource;
use crate::query::{Query, QueryResult, ResultStatus};
use crate::schema::{AttrId, Schema, Tuple, TupleId, Value};

/// One prefix tuple, encoded as the set of attributes on which it agrees
/// with the candidate under test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub items: BTreeSet<AttrId>,
    /// Index of the originating tuple within the prefix.
    pub source: usize,
}

/// Map the verified prefix to transactions relative to `candidate`.
pub fn build_transactions(top_h: &[Tuple], candidate: &Tuple) -> Vec<Transaction> {
    top_h
        .iter()
        .enumerate()
        .map(|(i, t)| Transaction {
            items: t
                .values
                .iter()
                .zip(&candidate.values)
                .enumerate()
                .filter(|(_, (a, b))| a == b)
                .map(|(j, _)| AttrId(j as u16))
                .collect(),
            source: i,
        })
        .collect()
}

fn item_mask(items: &BTreeSet<AttrId>) -> u128 {
    items.iter().fold(0u128, |acc, a| acc | (1u128 << a.index()))
}

fn mask_items(mask: u128) -> BTreeSet<AttrId> {
    (0..128).filter(|i| mask & (1u128 << i) != 0).map(|i| AttrId(i as u16)).collect()
}

/// All itemsets over the m-attribute universe whose support among the
/// transactions is below `k` while every proper subset's support is at
/// least `k`.
///
/// Levelwise enumeration with apriori candidate generation; supersets of an
/// infrequent set are never generated, and no minimal infrequent itemset can
/// hold more than `h - k + 1` items, so the lattice walk stops there.
pub fn minimal_infrequent_itemsets(
    transactions: &[Transaction],
    m: usize,
    k: usize,
) -> Result<Vec<BTreeSet<AttrId>>, TestingError> {
    let h = transactions.len();
    if h < k {
        return Err(TestingError::TopHSmallerThanK { h, k });
    }
    let masks: Vec<u128> = transactions.iter().map(|t| item_mask(&t.items)).collect();
    let support = |set: u128| masks.iter().filter(|t| *t & set == set).count();

    let mut minimal: Vec<u128> = Vec::new();
    let mut frequent_prev: Vec<u128> = vec![0]; // the empty itemset, support h >= k
    let max_level = (h - k + 1).min(m);
    for _level in 1..=max_level {
        let frequent_set: std::collections::HashSet<u128> =
            frequent_prev.iter().copied().collect();
        let mut frequent_next: Vec<u128> = Vec::new();
        for base in &frequent_prev {
            let start = 128 - base.leading_zeros() as usize; // extend past the highest item
            for j in start..m {
                let cand = base | (1u128 << j);
                // Minimality needs every (level-1)-subset frequent.
                let mut all_frequent = true;
                let mut rest = cand;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    if !frequent_set.contains(&(cand ^ bit)) {
                        all_frequent = false;
                        break;
                    }
                    rest ^= bit;
                }
                if !all_frequent {
                    continue;
                }
                if support(cand) < k {
                    minimal.push(cand);
                } else {
                    frequent_next.push(cand);
                }
            }
        }
        if frequent_next.is_empty() {
            break;
        }
        frequent_prev = frequent_next;
    }
    minimal.sort_by_key(|s| (s.count_ones(), *s));
    Ok(minimal.into_iter().map(mask_items).collect())
}

/// One minimal query that can reveal a tuple beyond the verified prefix.
#[derive(Clone, Debug)]
pub struct BeyondHQuery {
    pub query: Query,
    pub attribute_set: BTreeSet<AttrId>,
    /// Candidates (of the pooled set) this query matches.
    pub matched: Vec<TupleId>,
    /// Ordering weight; filled by [`order_queries`].
    pub score: f64,
}

/// The beyond-h minimal queries for one candidate: one query per minimal
/// infrequent itemset, predicates fixed to the candidate's values.
pub fn beyond_h_queries(
    top_h: &[Tuple],
    candidate: &Tuple,
    k: usize,
) -> Result<Vec<BeyondHQuery>, TestingError> {
    if top_h.iter().any(|t| t.id == candidate.id) {
        return Err(TestingError::CandidateInTopH { candidate: candidate.id });
    }
    let m = candidate.values.len();
    let transactions = build_transactions(top_h, candidate);
    let itemsets = minimal_infrequent_itemsets(&transactions, m, k)?;
    Ok(itemsets
        .into_iter()
        .map(|attribute_set| BeyondHQuery {
            query: Query::from_predicates(
                attribute_set.iter().map(|a| (*a, candidate.value(*a))),
            ),
            attribute_set,
            matched: vec![candidate.id],
            score: 0.0,
        })
        .collect())
}

/// The merged beyond-h queries of a whole candidate set, with per-query
/// candidate coverage. Also returns each candidate's own query count (for
/// bound accounting).
pub fn pooled_beyond_h_queries(
    top_h: &[Tuple],
    candidates: &[Tuple],
    k: usize,
) -> Result<(Vec<BeyondHQuery>, Vec<usize>), TestingError> {
    let mut pool: Vec<BeyondHQuery> = Vec::new();
    let mut counts = Vec::with_capacity(candidates.len());
    for c in candidates {
        let queries = beyond_h_queries(top_h, c, k)?;
        counts.push(queries.len());
        for bq in queries {
            if !pool.iter().any(|p| p.query == bq.query) {
                pool.push(bq);
            }
        }
    }
    for bq in &mut pool {
        bq.matched = candidates.iter().filter(|c| bq.query.matches(c)).map(|c| c.id).collect();
    }
    Ok((pool, counts))
}

/// Order pooled queries by their chance of rejecting candidates early:
/// a weighted sum of candidate coverage and the expected fraction of the
/// database matched (under uniformly distributed attribute values), both
/// normalized to [0, 1]. Ties prefer shorter queries, then attribute order.
pub fn order_queries(
    mut pool: Vec<BeyondHQuery>,
    weights: (f64, f64),
    schema: &Schema,
    candidate_count: usize,
) -> Vec<BeyondHQuery> {
    let (w1, w2) = weights;
    for bq in &mut pool {
        let coverage = if candidate_count == 0 {
            0.0
        } else {
            bq.matched.len() as f64 / candidate_count as f64
        };
        let fraction: f64 = bq
            .query
            .attribute_set()
            .map(|a| 1.0 / schema.attr(a).domain_size() as f64)
            .product();
        bq.score = w1 * coverage + w2 * fraction;
    }
    pool.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.query.len().cmp(&b.query.len()))
            .then_with(|| {
                a.query
                    .predicates()
                    .collect::<Vec<_>>()
                    .cmp(&b.query.predicates().collect::<Vec<_>>())
            })
    });
    pool
}

/// Evaluate one query result for a candidate's rank test.
///
/// `Some(false)`: some other non-prefix tuple outranks the candidate.
/// `Some(true)`: the candidate is the best non-prefix tuple here.
/// `None`: only prefix tuples came back (hidden behind an overflow of
/// prefix tuples) — no information against the candidate.
fn verdict_on(result: &QueryResult, candidate: TupleId, in_prefix: &dyn Fn(TupleId) -> bool) -> Option<bool> {
    match result.returned.iter().find(|t| !in_prefix(t.id)) {
        Some(t) if t.id == candidate => Some(true),
        Some(_) => Some(false),
        None => None,
    }
}

/// Decide whether `candidate` is the next-ranked tuple by running its
/// beyond-h queries (already-answered ones are free), exiting early on the
/// first disqualifying result. Domination knowledge short-circuits to
/// `false` without any queries.
pub fn test_candidate(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
    candidate: &Tuple,
) -> Result<bool, EngineError> {
    if state.dominated_by_non_emitted(candidate.id) {
        return Ok(false);
    }
    let top_h = state.top_h_tuples();
    let queries = beyond_h_queries(&top_h, candidate, state.k())?;
    state.note_beyond_h_count(queries.len());
    for bq in &queries {
        let result = state.run_query(iface, &bq.query, Phase::Testing)?;
        let emitted = |id: TupleId| state.is_emitted(id);
        if let Some(ok) = verdict_on(&result, candidate.id, &emitted) {
            if !ok {
                return Ok(false);
            }
        }
        if state.dominated_by_non_emitted(candidate.id) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ============================================================================
// Oracles: exhaustive testing and full crawls
// ============================================================================

/// Baseline rank test issuing *every* query matching the candidate (up to
/// 2^m of them, in increasing predicate count). Small schemas only; used to
/// cross-check [`test_candidate`].
pub fn exhaustive_test(
    iface: &mut dyn TopKSource,
    top_h: &[Tuple],
    candidate: &Tuple,
) -> Result<bool, InterfaceError> {
    let prefix: std::collections::HashSet<TupleId> = top_h.iter().map(|t| t.id).collect();
    let m = candidate.values.len();
    let mut subsets: Vec<u64> = (0..(1u64 << m)).collect();
    subsets.sort_by_key(|s| (s.count_ones(), *s));
    for subset in subsets {
        let query = Query::from_predicates(
            (0..m)
                .filter(|i| subset & (1 << i) != 0)
                .map(|i| (AttrId(i as u16), candidate.value(AttrId(i as u16)))),
        );
        let result = iface.execute(&query)?;
        let in_prefix = |id: TupleId| prefix.contains(&id);
        if let Some(false) = verdict_on(&result, candidate.id, &in_prefix) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Crawl the entire database by recursive partitioning: split every
/// overflowing query on the next unused attribute until all cells are
/// valid or underflow.
///
/// Returns every tuple, ordered by a deterministic linear extension of the
/// dominance evidence the crawl itself produced.
pub fn crawl_all(iface: &mut dyn TopKSource) -> Result<Vec<Tuple>, InterfaceError> {
    let schema = iface.schema().clone();
    let m = schema.attr_count();
    let mut graph = DominanceGraph::new();
    let mut seen: std::collections::BTreeMap<TupleId, Tuple> = std::collections::BTreeMap::new();
    let mut queue: std::collections::VecDeque<(Query, usize)> = std::collections::VecDeque::new();
    queue.push_back((Query::select_all(), 0));
    while let Some((query, depth)) = queue.pop_front() {
        let result = iface.execute(&query)?;
        for t in &result.returned {
            seen.entry(t.id).or_insert_with(|| t.clone());
        }
        graph
            .add_result_edges(&query, &result)
            .map_err(|e| InterfaceError::Remote(e.to_string()))?;
        if result.status == ResultStatus::Overflow && depth < m {
            let attr = AttrId(depth as u16);
            for v in 0..schema.attr(attr).domain_size() {
                queue.push_back((query.clone().with(attr, Value(v as u16)), depth + 1));
            }
        }
    }
    // Kahn's algorithm with min-id tie-breaking: a deterministic linear
    // extension of everything the crawl proved.
    let mut indegree: std::collections::BTreeMap<TupleId, usize> =
        seen.keys().map(|id| (*id, 0)).collect();
    for (_, v) in graph.edges() {
        *indegree.get_mut(&v).expect("edge endpoints were seen") += 1;
    }
    let mut ready: BTreeSet<TupleId> =
        indegree.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
    let mut out = Vec::with_capacity(seen.len());
    while let Some(id) = ready.iter().next().copied() {
        ready.remove(&id);
        out.push(seen[&id].clone());
        for (u, v) in graph.edges() {
            if u == id {
                let d = indegree.get_mut(&v).expect("endpoint");
                *d -= 1;
                if *d == 0 {
                    ready.insert(v);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{EngineOptions, GetNextState};
    use crate::fixtures::tiny7;
    use crate::interface::simulate;
    use crate::schema::Value;
    use std::sync::Arc;

    fn site(k: usize) -> (crate::interface::TopKInterface, crate::interface::RankOracle) {
        let ds = Arc::new(tiny7());
        let ranking = ds.default_ranking().unwrap().clone();
        simulate(ds, &ranking, k, None).unwrap()
    }

    fn t(oracle: &crate::interface::RankOracle, rank: usize) -> Tuple {
        oracle.true_top(rank).pop().unwrap()
    }

    fn attr_names(sets: &[BTreeSet<AttrId>]) -> Vec<Vec<u16>> {
        sets.iter().map(|s| s.iter().map(|a| a.0 + 1).collect()).collect()
    }

    /// Enumerate all 2^m itemsets and keep the minimal infrequent ones.
    fn brute_force_minimal(transactions: &[Transaction], m: usize, k: usize) -> Vec<Vec<u16>> {
        let masks: Vec<u128> = transactions.iter().map(|t| item_mask(&t.items)).collect();
        let support = |set: u128| masks.iter().filter(|t| *t & set == set).count();
        let mut out: Vec<u128> = Vec::new();
        for set in 1u128..(1 << m) {
            if support(set) >= k {
                continue;
            }
            let mut minimal = true;
            let mut rest = set;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if support(set ^ bit) < k {
                    minimal = false;
                    break;
                }
                rest ^= bit;
            }
            if minimal {
                out.push(set);
            }
        }
        out.sort_by_key(|s| (s.count_ones(), *s));
        out.iter().map(|s| mask_items(*s).iter().map(|a| a.0 + 1).collect()).collect()
    }

    #[test]
    fn transactions_record_agreement_attributes() {
        let (_, oracle) = site(3);
        let top3 = oracle.true_top(3);
        // Candidate t4: agreements are {A1,A5}, {A1,A4,A5}, {A1,A3,A5}.
        let t4 = t(&oracle, 4);
        let txns = build_transactions(&top3, &t4);
        let got: Vec<Vec<u16>> =
            txns.iter().map(|r| r.items.iter().map(|a| a.0 + 1).collect()).collect();
        assert_eq!(got, vec![vec![1, 5], vec![1, 4, 5], vec![1, 3, 5]]);
        assert_eq!(txns[2].source, 2);

        // Candidate t7 shares no A5 value with anyone in the prefix.
        let t7 = t(&oracle, 7);
        let txns = build_transactions(&top3, &t7);
        let got: Vec<Vec<u16>> =
            txns.iter().map(|r| r.items.iter().map(|a| a.0 + 1).collect()).collect();
        assert_eq!(got, vec![vec![1, 2, 3, 4], vec![1, 2, 3], vec![1, 2, 4]]);
    }

    #[test]
    fn transactions_empty_when_no_agreement() {
        let a = Tuple::new(TupleId(0), vec![Value(0), Value(0)]);
        let b = Tuple::new(TupleId(1), vec![Value(1), Value(1)]);
        let txns = build_transactions(std::slice::from_ref(&a), &b);
        assert!(txns[0].items.is_empty());
    }

    #[test]
    fn miner_matches_brute_force_on_walkthrough_candidates() {
        let (_, oracle) = site(3);
        let top3 = oracle.true_top(3);
        // Candidate t4. The miner works over the full m-attribute universe,
        // so the zero-support singleton {A2} is minimal infrequent alongside
        // {A3} and {A4}.
        let txns = build_transactions(&top3, &t(&oracle, 4));
        let mined = minimal_infrequent_itemsets(&txns, 5, 3).unwrap();
        assert_eq!(attr_names(&mined), vec![vec![2], vec![3], vec![4]]);
        assert_eq!(attr_names(&mined), brute_force_minimal(&txns, 5, 3));

        // Candidate t7: supports are A1:3 A2:3 A3:2 A4:2 A5:0.
        let txns = build_transactions(&top3, &t(&oracle, 7));
        let mined = minimal_infrequent_itemsets(&txns, 5, 3).unwrap();
        assert_eq!(attr_names(&mined), vec![vec![3], vec![4], vec![5]]);
        assert_eq!(attr_names(&mined), brute_force_minimal(&txns, 5, 3));
    }

    #[test]
    fn miner_on_empty_transactions_returns_all_singletons() {
        let txns: Vec<Transaction> = (0..4)
            .map(|i| Transaction { items: BTreeSet::new(), source: i })
            .collect();
        let mined = minimal_infrequent_itemsets(&txns, 6, 3).unwrap();
        assert_eq!(mined.len(), 6);
        assert!(mined.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn miner_rejects_h_below_k() {
        let txns: Vec<Transaction> =
            (0..2).map(|i| Transaction { items: BTreeSet::new(), source: i }).collect();
        assert!(matches!(
            minimal_infrequent_itemsets(&txns, 5, 3),
            Err(TestingError::TopHSmallerThanK { h: 2, k: 3 })
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        /// Minimality and the antichain property, against brute force.
        #[test]
        fn miner_is_minimal_and_antichain(
            seed in 0u64..1000,
            m in 2usize..7,
            h in 3usize..9,
            k in 2usize..4,
        ) {
            proptest::prop_assume!(h >= k);
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let txns: Vec<Transaction> = (0..h)
                .map(|i| Transaction {
                    items: (0..m)
                        .filter(|_| rng.gen_bool(0.5))
                        .map(|j| AttrId(j as u16))
                        .collect(),
                    source: i,
                })
                .collect();
            let mined = minimal_infrequent_itemsets(&txns, m, k).unwrap();
            let masks: Vec<u128> = txns.iter().map(|t| item_mask(&t.items)).collect();
            let support = |set: &BTreeSet<AttrId>| {
                let sm = item_mask(set);
                masks.iter().filter(|t| *t & sm == sm).count()
            };
            for s in &mined {
                proptest::prop_assert!(support(s) < k);
                for drop in s.iter() {
                    let mut sub = s.clone();
                    sub.remove(drop);
                    proptest::prop_assert!(support(&sub) >= k, "subset infrequent: not minimal");
                }
                proptest::prop_assert!(s.len() <= h - k + 1, "predicate-count bound violated");
            }
            for a in &mined {
                for b in &mined {
                    if a != b {
                        proptest::prop_assert!(!a.is_subset(b), "not an antichain");
                    }
                }
            }
            let brute = brute_force_minimal(&txns, m, k);
            proptest::prop_assert_eq!(attr_names(&mined), brute);
        }
    }

    #[test]
    fn beyond_h_queries_fix_candidate_values() {
        let (_, oracle) = site(3);
        let top3 = oracle.true_top(3);
        let schema = oracle.dataset().schema().clone();
        // t4 carries value 1 on A2, A3 and A4.
        let queries = beyond_h_queries(&top3, &t(&oracle, 4), 3).unwrap();
        let rendered: Vec<String> =
            queries.iter().map(|q| q.query.display(&schema).to_string()).collect();
        assert_eq!(rendered, vec!["A2=1", "A3=1", "A4=1"]);
        // t7 is all zeroes.
        let queries = beyond_h_queries(&top3, &t(&oracle, 7), 3).unwrap();
        let rendered: Vec<String> =
            queries.iter().map(|q| q.query.display(&schema).to_string()).collect();
        assert_eq!(rendered, vec!["A3=0", "A4=0", "A5=0"]);
    }

    #[test]
    fn beyond_h_rejects_prefix_members_and_small_h() {
        let (_, oracle) = site(3);
        let top3 = oracle.true_top(3);
        let t2 = top3[1].clone();
        assert!(matches!(
            beyond_h_queries(&top3, &t2, 3),
            Err(TestingError::CandidateInTopH { .. })
        ));
        let top2 = oracle.true_top(2);
        assert!(matches!(
            beyond_h_queries(&top2, &t(&oracle, 4), 3),
            Err(TestingError::TopHSmallerThanK { h: 2, k: 3 })
        ));
    }

    #[test]
    fn query_ordering_prefers_shared_then_short_queries() {
        let (_, oracle) = site(2);
        let schema = oracle.dataset().schema().clone();
        let top2 = oracle.true_top(2);
        let (t3, t4) = (t(&oracle, 3), t(&oracle, 4));
        let candidates = vec![t3, t4];
        let (pool, _) = pooled_beyond_h_queries(&top2, &candidates, 2).unwrap();
        let ordered = order_queries(pool, (1.0, 1.0), &schema, candidates.len());
        // A3=1 matches both candidates, so it outranks every single-match query.
        assert_eq!(ordered[0].query.display(&schema).to_string(), "A3=1");
        assert_eq!(ordered[0].matched.len(), 2);
        // Expected match fraction multiplies per-attribute densities.
        let two_pred = BeyondHQuery {
            query: Query::from_predicates([
                (AttrId(0), Value(0)),
                (AttrId(1), Value(0)),
            ]),
            attribute_set: [AttrId(0), AttrId(1)].into_iter().collect(),
            matched: vec![],
            score: 0.0,
        };
        let scored = order_queries(vec![two_pred], (0.0, 1.0), &schema, 1);
        assert!((scored[0].score - 0.25).abs() < 1e-12);
        // Equal scores: fewer predicates first.
        let short = BeyondHQuery {
            query: Query::from_predicates([(AttrId(2), Value(1))]),
            attribute_set: [AttrId(2)].into_iter().collect(),
            matched: vec![],
            score: 0.0,
        };
        let long = BeyondHQuery {
            query: Query::from_predicates([(AttrId(3), Value(1)), (AttrId(4), Value(1))]),
            attribute_set: [AttrId(3), AttrId(4)].into_iter().collect(),
            matched: vec![],
            score: 0.0,
        };
        let tied = order_queries(vec![long, short], (0.0, 0.0), &schema, 1);
        assert_eq!(tied[0].query.len(), 1);
    }

    #[test]
    fn test_candidate_accepts_the_true_next_tuple() {
        let (mut iface, oracle) = site(3);
        let mut state = GetNextState::bootstrap(&mut iface, 0, EngineOptions::default()).unwrap();
        let t4 = t(&oracle, 4);
        assert!(test_candidate(&mut state, &mut iface, &t4).unwrap());
    }

    #[test]
    fn test_candidate_rejects_outranked_candidates_early() {
        let (mut iface, oracle) = site(3);
        let mut state = GetNextState::bootstrap(&mut iface, 0, EngineOptions::default()).unwrap();
        let t7 = t(&oracle, 7);
        // A3=0 passes (t7 is the best non-prefix match), then A4=0 reveals
        // t5 above it; A5=0 is never issued.
        assert!(!test_candidate(&mut state, &mut iface, &t7).unwrap());
        assert_eq!(state.cost_testing(), 2);
    }

    #[test]
    fn test_candidate_uses_cached_domination_without_queries() {
        let (mut iface, oracle) = site(3);
        let mut state = GetNextState::bootstrap(&mut iface, 0, EngineOptions::default()).unwrap();
        let (t5, t7) = (t(&oracle, 5), t(&oracle, 7));
        // Learn t5 > t7 through a generation comparison first.
        state
            .compare_direct(&mut iface, &t5, &t7, crate::engine::Phase::Generation)
            .unwrap();
        let testing_before = state.cost_testing();
        assert!(!test_candidate(&mut state, &mut iface, &t7).unwrap());
        assert_eq!(state.cost_testing(), testing_before);
    }

    #[test]
    fn exhaustive_test_agrees_on_walkthrough_candidates() {
        let (mut iface, oracle) = site(3);
        let top3 = oracle.true_top(3);
        assert!(exhaustive_test(&mut iface, &top3, &t(&oracle, 4)).unwrap());
        assert!(!exhaustive_test(&mut iface, &top3, &t(&oracle, 7)).unwrap());
        // Cost is bounded by 2^m.
        assert!(iface.query_count() <= 2 * (1 << 5));
    }

    #[test]
    fn crawl_recovers_every_tuple() {
        let (mut iface, oracle) = site(3);
        let crawled = crawl_all(&mut iface).unwrap();
        assert_eq!(crawled.len(), 7);
        let mut ids: Vec<u32> = crawled.iter().map(|t| t.id.0).collect();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 1, 2, 3, 4, 5, 6]);
        // The crawl's evidence fully orders this database.
        let got: Vec<u32> = crawled.iter().map(|t| t.id.0).collect();
        let want: Vec<u32> = oracle.true_order().iter().map(|t| t.0).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn crawl_of_small_database_is_one_query() {
        let ds = Arc::new(crate::dataset::gen_boolean(3, 3, 0.5, 5).unwrap());
        let ranking = ds.default_ranking().unwrap().clone();
        let (mut iface, _) = simulate(ds, &ranking, 4, None).unwrap();
        let crawled = crawl_all(&mut iface).unwrap();
        assert_eq!(crawled.len(), 3);
        assert_eq!(iface.query_count(), 1);
    }
}
