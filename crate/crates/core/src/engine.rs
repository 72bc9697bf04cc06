//! The extraction engine.
//!
//! An extraction session owns everything learned from a site so far: the
//! verified rank prefix, the dominance graph, every cached query result and
//! the chains of the current covering partition. `get_next_*` extend the
//! prefix one tuple at a time by composing candidate generation with
//! candidate testing; `get_top_h` iterates them to a target length.
//!
//! Certainty discipline: a position is flagged certain only when the emitted
//! tuple was provably the best non-emitted tuple *and* every earlier position
//! was certain. Ties between tuples the interface cannot order are broken
//! uniformly at random from the session seed and flagged uncertain, as is
//! everything after them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::dominance::{
    most_specific_query, outcome_from_result, ChainId, ComparisonOutcome, DominanceGraph,
};
use crate::error::{EngineError, GraphError};
use crate::generation::generate_candidates_dag;
use crate::interface::{ConstrainedSource, TopKSource};
use crate::query::{Query, QueryResult, ResultStatus};
use crate::schema::{Tuple, TupleId};
use crate::testing::{order_queries, pooled_beyond_h_queries, test_candidate};

/// Which GetNext flavor drives candidate testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Test every candidate with its own beyond-h queries.
    BeyondH,
    /// Pool and reorder all candidates' beyond-h queries, eliminating
    /// candidates until one survives.
    Ordered,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::BeyondH => write!(f, "beyond_h"),
            Algorithm::Ordered => write!(f, "ordered"),
        }
    }
}

/// Tunables that rarely change.
#[derive(Clone, Copy, Debug)]
pub struct EngineOptions {
    /// Weights for the query-ordering heuristic: candidate coverage and
    /// expected database match fraction, both normalized to [0, 1].
    pub weights: (f64, f64),
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { weights: (1.0, 1.0) }
    }
}

/// Which cost bucket a query is charged to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Generation,
    Testing,
}

/// The extraction cursor: verified prefix, evidence, caches and accounting.
pub struct GetNextState {
    k: usize,
    verified: Vec<Tuple>,
    flags: Vec<bool>,
    pending: VecDeque<(Tuple, bool)>,
    emitted: HashSet<TupleId>,
    seen: BTreeMap<TupleId, Tuple>,
    graph: DominanceGraph,
    covering: Vec<ChainId>,
    cache: HashMap<Query, QueryResult>,
    cost_generation: u64,
    cost_testing: u64,
    rng: ChaCha8Rng,
    seed: u64,
    all_certain: bool,
    exhausted: bool,
    max_beyond_h: u64,
    options: EngineOptions,
}

impl GetNextState {
    /// Issue the initial `SELECT *` and seed the verified prefix with the
    /// global top-k (or the whole database when it fits under k).
    pub fn bootstrap(
        iface: &mut dyn TopKSource,
        seed: u64,
        options: EngineOptions,
    ) -> Result<Self, EngineError> {
        let mut state = GetNextState {
            k: iface.k(),
            verified: Vec::new(),
            flags: Vec::new(),
            pending: VecDeque::new(),
            emitted: HashSet::new(),
            seen: BTreeMap::new(),
            graph: DominanceGraph::new(),
            covering: Vec::new(),
            cache: HashMap::new(),
            cost_generation: 0,
            cost_testing: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            all_certain: true,
            exhausted: false,
            max_beyond_h: 0,
            options,
        };
        let result = state.run_query(iface, &Query::select_all(), Phase::Generation)?;
        for t in &result.returned {
            state.emitted.insert(t.id);
            state.verified.push(t.clone());
            state.flags.push(true);
        }
        if result.status != ResultStatus::Overflow {
            // The whole database fit in one answer.
            state.exhausted = true;
        }
        Ok(state)
    }

    /// Build a session whose verified prefix is a caller-supplied top-h
    /// list (for example a ground-truth prefix in tests). The list must
    /// begin with the interface's own top-k answer.
    pub fn with_prefix(
        iface: &mut dyn TopKSource,
        prefix: &[Tuple],
        seed: u64,
        options: EngineOptions,
    ) -> Result<Self, EngineError> {
        let mut state = Self::bootstrap(iface, seed, options)?;
        if prefix.len() < state.verified.len() {
            return Err(EngineError::Internal(format!(
                "prefix of {} tuples is shorter than the interface's top-k of {}",
                prefix.len(),
                state.verified.len()
            )));
        }
        for (have, want) in state.verified.iter().zip(prefix) {
            if have.id != want.id {
                return Err(EngineError::Internal(
                    "prefix disagrees with the interface's own top-k answer".into(),
                ));
            }
        }
        for t in &prefix[state.verified.len()..] {
            state.queue_resolved(t.clone(), true);
            state.pop_pending();
        }
        Ok(state)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    pub fn verified(&self) -> &[Tuple] {
        &self.verified
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn graph(&self) -> &DominanceGraph {
        &self.graph
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn cost_generation(&self) -> u64 {
        self.cost_generation
    }

    pub fn cost_testing(&self) -> u64 {
        self.cost_testing
    }

    pub fn cost_total(&self) -> u64 {
        self.cost_generation + self.cost_testing
    }

    pub fn max_beyond_h(&self) -> u64 {
        self.max_beyond_h
    }

    pub(crate) fn set_exhausted(&mut self) {
        self.exhausted = true;
    }

    pub(crate) fn note_beyond_h_count(&mut self, count: usize) {
        self.max_beyond_h = self.max_beyond_h.max(count as u64);
    }

    /// Every tuple currently treated as part of the top-h prefix, in rank
    /// order (verified plus queued-but-unreturned resolutions).
    pub fn top_h_tuples(&self) -> Vec<Tuple> {
        self.verified
            .iter()
            .cloned()
            .chain(self.pending.iter().map(|(t, _)| t.clone()))
            .collect()
    }

    pub fn current_h(&self) -> usize {
        self.verified.len() + self.pending.len()
    }

    /// The current t_h: the last tuple of the prefix.
    pub fn t_h(&self) -> Option<Tuple> {
        self.pending.back().map(|(t, _)| t.clone()).or_else(|| self.verified.last().cloned())
    }

    pub fn is_emitted(&self, id: TupleId) -> bool {
        self.emitted.contains(&id)
    }

    pub fn emitted_ids(&self) -> &HashSet<TupleId> {
        &self.emitted
    }

    pub fn seen_tuple(&self, id: TupleId) -> Option<&Tuple> {
        self.seen.get(&id)
    }

    pub(crate) fn covering(&self) -> &[ChainId] {
        &self.covering
    }

    pub(crate) fn set_covering(&mut self, chains: Vec<ChainId>) {
        self.covering = chains;
    }

    /// Append a proven next tuple to the emission queue. `rule_certain`
    /// records whether the proof pinned the exact rank; the stored flag also
    /// requires every earlier position to be certain.
    pub(crate) fn queue_resolved(&mut self, tuple: Tuple, rule_certain: bool) {
        let flag = rule_certain && self.all_certain;
        self.all_certain = flag;
        self.emitted.insert(tuple.id);
        self.pending.push_back((tuple, flag));
    }

    fn pop_pending(&mut self) -> Option<Tuple> {
        let (tuple, flag) = self.pending.pop_front()?;
        self.verified.push(tuple.clone());
        self.flags.push(flag);
        Some(tuple)
    }

    /// Run a query through the session cache. Fresh executions are charged to
    /// `phase` and their evidence folded into the graph.
    pub(crate) fn run_query(
        &mut self,
        iface: &mut dyn TopKSource,
        query: &Query,
        phase: Phase,
    ) -> Result<QueryResult, EngineError> {
        if let Some(hit) = self.cache.get(query) {
            return Ok(hit.clone());
        }
        let before = iface.query_count();
        let result = iface.execute(query)?;
        let delta = iface.query_count() - before;
        match phase {
            Phase::Generation => self.cost_generation += delta,
            Phase::Testing => self.cost_testing += delta,
        }
        self.observe(query, &result)?;
        self.cache.insert(query.clone(), result.clone());
        Ok(result)
    }

    /// Fold one fresh query result into the evidence base: chain + pairwise
    /// edges, plus hidden-below-overflow inference for tuples we already
    /// know about.
    fn observe(&mut self, query: &Query, result: &QueryResult) -> Result<(), GraphError> {
        self.graph.add_result_edges(query, result)?;
        for t in &result.returned {
            self.seen.entry(t.id).or_insert_with(|| t.clone());
        }
        let returned_ids: HashSet<TupleId> = result.returned.iter().map(|t| t.id).collect();
        let hidden: Vec<TupleId> = self
            .seen
            .values()
            .filter(|x| {
                !self.emitted.contains(&x.id)
                    && !returned_ids.contains(&x.id)
                    && query.matches(x)
            })
            .map(|x| x.id)
            .collect();
        for x in hidden {
            if result.status == ResultStatus::Overflow {
                // x matched but was outranked by everything returned.
                for r in &result.returned {
                    self.graph.add_edge(r.id, x)?;
                }
            } else {
                // A non-overflowing answer enumerated its whole selection;
                // a known matching tuple cannot be missing from it.
                return Err(GraphError::InconsistentResult { tuple: x });
            }
        }
        Ok(())
    }

    /// Order two tuples with at most one query: reuse a recorded direct
    /// edge when present, otherwise issue their most specific query
    /// (memoized, so repeat comparisons are query-free).
    pub fn compare_direct(
        &mut self,
        iface: &mut dyn TopKSource,
        first: &Tuple,
        second: &Tuple,
        phase: Phase,
    ) -> Result<ComparisonOutcome, EngineError> {
        if self.graph.has_edge(first.id, second.id) {
            return Ok(ComparisonOutcome::FirstDominates);
        }
        if self.graph.has_edge(second.id, first.id) {
            return Ok(ComparisonOutcome::SecondDominates);
        }
        let query = most_specific_query(first, second);
        let result = self.run_query(iface, &query, phase)?;
        let outcome = outcome_from_result(&result, first.id, second.id);
        match outcome {
            ComparisonOutcome::FirstDominates => {
                self.graph.add_edge(first.id, second.id)?;
            }
            ComparisonOutcome::SecondDominates => {
                self.graph.add_edge(second.id, first.id)?;
            }
            ComparisonOutcome::Incomparable => {}
        }
        Ok(outcome)
    }

    /// True when some tuple outside the emitted prefix is known to outrank
    /// `id` — which disqualifies `id` from being the next tuple.
    pub(crate) fn dominated_by_non_emitted(&self, id: TupleId) -> bool {
        self.seen
            .keys()
            .any(|y| *y != id && !self.emitted.contains(y) && self.graph.dominates(*y, id))
    }

    /// Uniform choice among mutually unorderable survivors. The chosen
    /// position (and everything after it) is flagged uncertain.
    pub fn resolve_tie(&mut self, survivors: &[Tuple]) -> Result<Tuple, EngineError> {
        if survivors.is_empty() {
            return Err(EngineError::Internal("resolve_tie over an empty set".into()));
        }
        if survivors.len() == 1 {
            return Ok(survivors[0].clone());
        }
        let mut ordered: Vec<&Tuple> = survivors.iter().collect();
        ordered.sort_by_key(|t| t.id);
        let pick = self.rng.gen_range(0..ordered.len());
        Ok(ordered[pick].clone())
    }
}

// ============================================================================
// GetNext drivers
// ============================================================================

fn next_with(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
    algorithm: Algorithm,
) -> Result<Option<Tuple>, EngineError> {
    loop {
        if let Some(t) = state.pop_pending() {
            return Ok(Some(t));
        }
        if state.exhausted {
            return Ok(None);
        }
        let batch = generate_candidates_dag(state, iface)?;
        if !batch.resolved.is_empty() {
            continue; // queued by generation
        }
        if batch.candidates.is_empty() {
            state.set_exhausted();
            return Ok(None);
        }
        let survivors = match algorithm {
            Algorithm::BeyondH => beyond_h_testing(state, iface, &batch.candidates)?,
            Algorithm::Ordered => ordered_testing(state, iface, &batch.candidates)?,
        };
        match survivors.len() {
            0 => {
                return Err(EngineError::Internal(
                    "candidate testing rejected every candidate".into(),
                ))
            }
            1 => state.queue_resolved(survivors[0].clone(), true),
            _ => {
                let pick = state.resolve_tie(&survivors)?;
                state.queue_resolved(pick, false);
            }
        }
    }
}

/// Retrieve the next-ranked tuple, testing each candidate against its own
/// beyond-h queries. Returns `None` once the database is exhausted.
pub fn get_next_beyond_h(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
) -> Result<Option<Tuple>, EngineError> {
    next_with(state, iface, Algorithm::BeyondH)
}

/// Retrieve the next-ranked tuple using the pooled, reordered beyond-h
/// queries of all candidates, stopping as soon as one candidate remains.
pub fn get_next_ordered(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
) -> Result<Option<Tuple>, EngineError> {
    next_with(state, iface, Algorithm::Ordered)
}

fn beyond_h_testing(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
    candidates: &[Tuple],
) -> Result<Vec<Tuple>, EngineError> {
    let mut kept: Vec<Tuple> = Vec::new();
    for c in candidates {
        if state.dominated_by_non_emitted(c.id) {
            continue;
        }
        if test_candidate(state, iface, c)? {
            kept.push(c.clone());
        }
    }
    // Evidence gathered while testing later candidates can disqualify
    // earlier survivors.
    kept.retain(|c| !state.dominated_by_non_emitted(c.id));
    Ok(kept)
}

fn ordered_testing(
    state: &mut GetNextState,
    iface: &mut dyn TopKSource,
    candidates: &[Tuple],
) -> Result<Vec<Tuple>, EngineError> {
    let top_h = state.top_h_tuples();
    let schema = iface.schema().clone();
    let (pool, per_candidate) = pooled_beyond_h_queries(&top_h, candidates, state.k())?;
    for count in per_candidate {
        state.note_beyond_h_count(count);
    }
    let pool = order_queries(pool, state.options.weights, &schema, candidates.len());
    let mut alive: Vec<Tuple> = candidates.to_vec();
    alive.retain(|c| !state.dominated_by_non_emitted(c.id));
    for bq in &pool {
        if alive.len() <= 1 {
            break;
        }
        if !alive.iter().any(|c| bq.query.matches(c)) {
            continue;
        }
        state.run_query(iface, &bq.query, Phase::Testing)?;
        alive.retain(|c| !state.dominated_by_non_emitted(c.id));
    }
    if alive.len() > 1 {
        // Pool exhausted with several alive: fall through to per-candidate
        // verdicts (mostly cache hits at this point).
        let mut kept = Vec::new();
        for c in &alive {
            if test_candidate(state, iface, c)? {
                kept.push(c.clone());
            }
        }
        kept.retain(|c| !state.dominated_by_non_emitted(c.id));
        return Ok(kept);
    }
    Ok(alive)
}

// ============================================================================
// Top-h extraction
// ============================================================================

/// One extracted tuple as serialized in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportTuple {
    pub id: u32,
    pub values: Vec<String>,
}

/// The outcome of a top-h extraction run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub tuples: Vec<ReportTuple>,
    pub certainty: Vec<bool>,
    pub cost_total: u64,
    pub cost_generation: u64,
    pub cost_testing: u64,
    pub seed: u64,
    pub exhausted: bool,
    /// Largest beyond-h query set mined for any single candidate.
    pub max_beyond_h_queries: u64,
    /// Expected discordant-pair distance to the true order; filled by
    /// harnesses that hold a rank oracle, absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kendall_tau_expected: Option<f64>,
}

/// Extract the top-h tuples and keep the session for inspection.
pub fn run_extraction(
    iface: &mut dyn TopKSource,
    h: usize,
    algorithm: Algorithm,
    seed: u64,
    options: EngineOptions,
) -> Result<(ExtractionReport, GetNextState), EngineError> {
    if h < 1 {
        return Err(EngineError::InvalidTarget);
    }
    let start = iface.query_count();
    let mut state = GetNextState::bootstrap(iface, seed, options)?;
    while state.verified.len() < h {
        if next_with(&mut state, iface, algorithm)?.is_none() {
            break;
        }
    }
    let report = build_report(&state, iface, start, h)?;
    Ok((report, state))
}

/// Extract the top-h tuples from a source.
pub fn get_top_h(
    iface: &mut dyn TopKSource,
    h: usize,
    algorithm: Algorithm,
    seed: u64,
    options: EngineOptions,
) -> Result<ExtractionReport, EngineError> {
    run_extraction(iface, h, algorithm, seed, options).map(|(report, _)| report)
}

/// Extract the top-h tuples among those matching `constraint`, by prefixing
/// the constraint onto every query the engine issues. Output ranks are
/// relative to the constrained subset.
pub fn get_top_h_constrained(
    iface: &mut dyn TopKSource,
    constraint: &Query,
    h: usize,
    algorithm: Algorithm,
    seed: u64,
    options: EngineOptions,
) -> Result<(ExtractionReport, GetNextState), EngineError> {
    let mut view = ConstrainedSource::new(iface, constraint.clone());
    run_extraction(&mut view, h, algorithm, seed, options)
}

/// Fallback for constraints the interface cannot filter on: extract from the
/// whole database and keep only matching tuples until `h` accumulate.
pub fn get_top_h_postfiltered(
    iface: &mut dyn TopKSource,
    filter: &Query,
    h: usize,
    algorithm: Algorithm,
    seed: u64,
    options: EngineOptions,
) -> Result<ExtractionReport, EngineError> {
    if h < 1 {
        return Err(EngineError::InvalidTarget);
    }
    let schema = iface.schema().clone();
    let start = iface.query_count();
    let mut state = GetNextState::bootstrap(iface, seed, options)?;
    loop {
        let matching = state.verified.iter().filter(|t| filter.matches(t)).count();
        if matching >= h {
            break;
        }
        if next_with(&mut state, iface, algorithm)?.is_none() {
            break;
        }
    }
    let mut tuples = Vec::new();
    let mut certainty = Vec::new();
    for (t, flag) in state.verified.iter().zip(&state.flags) {
        if filter.matches(t) && tuples.len() < h {
            tuples.push(ReportTuple { id: t.id.0, values: t.labels(&schema) });
            certainty.push(*flag);
        }
    }
    let delta = iface.query_count() - start;
    check_accounting(&state, delta)?;
    Ok(ExtractionReport {
        tuples,
        certainty,
        cost_total: delta,
        cost_generation: state.cost_generation,
        cost_testing: state.cost_testing,
        seed,
        exhausted: state.exhausted,
        max_beyond_h_queries: state.max_beyond_h,
        kendall_tau_expected: None,
    })
}

fn check_accounting(state: &GetNextState, delta: u64) -> Result<(), EngineError> {
    if state.cost_generation + state.cost_testing != delta {
        return Err(EngineError::Internal(format!(
            "phase costs {} + {} do not sum to the interface delta {}",
            state.cost_generation, state.cost_testing, delta
        )));
    }
    Ok(())
}

fn build_report(
    state: &GetNextState,
    iface: &dyn TopKSource,
    start_count: u64,
    h: usize,
) -> Result<ExtractionReport, EngineError> {
    let schema = iface.schema();
    let take = h.min(state.verified.len());
    let delta = iface.query_count() - start_count;
    check_accounting(state, delta)?;
    Ok(ExtractionReport {
        tuples: state.verified[..take]
            .iter()
            .map(|t| ReportTuple { id: t.id.0, values: t.labels(schema) })
            .collect(),
        certainty: state.flags[..take].to_vec(),
        cost_total: delta,
        cost_generation: state.cost_generation,
        cost_testing: state.cost_testing,
        seed: state.seed,
        exhausted: take < h,
        max_beyond_h_queries: state.max_beyond_h,
        kendall_tau_expected: None,
    })
}
