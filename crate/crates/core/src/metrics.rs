//! Rank-distance metrics and partial-order linearization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};

use crate::dominance::DominanceGraph;
use crate::error::MetricsError;
use crate::schema::TupleId;

/// Kendall tau distance: the number of discordant pairs between two
/// rankings of the same element set. Counted via merge-sort inversions.
pub fn kendall_tau(a: &[TupleId], b: &[TupleId]) -> Result<u64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::ElementMismatch);
    }
    let pos_in_b: HashMap<TupleId, usize> = b.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    if pos_in_b.len() != b.len() {
        return Err(MetricsError::ElementMismatch);
    }
    let mut seq = Vec::with_capacity(a.len());
    for t in a {
        match pos_in_b.get(t) {
            Some(p) => seq.push(*p),
            None => return Err(MetricsError::ElementMismatch),
        }
    }
    let mut scratch = vec![0usize; seq.len()];
    Ok(count_inversions(&mut seq, &mut scratch))
}

fn count_inversions(seq: &mut [usize], scratch: &mut [usize]) -> u64 {
    let n = seq.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = seq.split_at_mut(mid);
    let mut inversions = count_inversions(left, scratch) + count_inversions(right, scratch);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            scratch[k] = left[i];
            i += 1;
        } else {
            scratch[k] = right[j];
            inversions += (left.len() - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < left.len() {
        scratch[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        scratch[k] = right[j];
        j += 1;
        k += 1;
    }
    seq.copy_from_slice(&scratch[..n]);
    0 + inversions
}

/// A uniform-ish random linear extension of the dominance partial order
/// restricted to `elements`: Kahn's algorithm with random choice among the
/// currently unconstrained elements.
pub fn random_linear_extension(
    graph: &DominanceGraph,
    elements: &[TupleId],
    rng: &mut ChaCha8Rng,
) -> Vec<TupleId> {
    let set: BTreeSet<TupleId> = elements.iter().copied().collect();
    // Induced relation via reachability, so bridges through tuples outside
    // `elements` still constrain the order.
    let mut indegree: HashMap<TupleId, usize> = set.iter().map(|id| (*id, 0)).collect();
    let mut succ: HashMap<TupleId, Vec<TupleId>> = HashMap::new();
    for u in &set {
        for v in &set {
            if u != v && graph.dominates(*u, *v) {
                succ.entry(*u).or_default().push(*v);
                *indegree.get_mut(v).expect("element") += 1;
            }
        }
    }
    let mut ready: Vec<TupleId> =
        set.iter().filter(|id| indegree[id] == 0).copied().collect();
    ready.sort_unstable();
    let mut out = Vec::with_capacity(set.len());
    while !ready.is_empty() {
        let pick = rng.gen_range(0..ready.len());
        let id = ready.swap_remove(pick);
        out.push(id);
        if let Some(nexts) = succ.get(&id) {
            for v in nexts {
                let d = indegree.get_mut(v).expect("element");
                *d -= 1;
                if *d == 0 {
                    ready.push(*v);
                }
            }
        }
        ready.sort_unstable();
    }
    out
}

/// Expected Kendall tau distance between random linearizations of the
/// partial order over `emitted` and the true order `reference`, averaged
/// over `samples` seeded draws.
pub fn expected_kendall_tau(
    graph: &DominanceGraph,
    emitted: &[TupleId],
    reference: &[TupleId],
    samples: usize,
    seed: u64,
) -> Result<f64, MetricsError> {
    if samples == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0u64;
    for _ in 0..samples {
        let linearization = random_linear_extension(graph, emitted, &mut rng);
        total += kendall_tau(&linearization, reference)?;
    }
    Ok(total as f64 / samples as f64)
}
