//! Immutable datasets and the synthetic boolean generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

use crate::error::DataError;
use crate::rank::RankingFunction;
use crate::schema::{Attribute, Schema, Tuple, TupleId, Value};

/// An immutable table of distinct tuples over a categorical schema.
///
/// A dataset may carry a default ranking (attached by the generator, or by
/// the CSV loader when a `__rank__` column is present).
#[derive(Clone, Debug)]
pub struct Dataset {
    schema: Schema,
    tuples: Vec<Tuple>,
    default_ranking: Option<RankingFunction>,
}

impl Dataset {
    /// Build a dataset from value rows, enforcing pairwise-distinct tuples.
    pub fn new(schema: Schema, rows: Vec<Vec<Value>>) -> Result<Self, DataError> {
        let m = schema.attr_count();
        let mut seen: HashMap<Vec<Value>, usize> = HashMap::new();
        let mut tuples = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(DataError::RowArity { row: i + 1, got: row.len(), expected: m });
            }
            if let Some(first) = seen.get(&row) {
                return Err(DataError::DuplicateTuple { row: i + 1, first_row: *first });
            }
            seen.insert(row.clone(), i + 1);
            tuples.push(Tuple::new(TupleId(i as u32), row));
        }
        Ok(Dataset { schema, tuples, default_ranking: None })
    }

    pub fn with_default_ranking(mut self, ranking: RankingFunction) -> Self {
        self.default_ranking = Some(ranking);
        self
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn tuple(&self, id: TupleId) -> &Tuple {
        &self.tuples[id.index()]
    }

    /// `n`, the number of tuples.
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn default_ranking(&self) -> Option<&RankingFunction> {
        self.default_ranking.as_ref()
    }
}

/// Generate `n` distinct i.i.d. boolean tuples over `m` attributes, each
/// attribute being 1 with probability `p`. Duplicates are resampled.
///
/// The returned dataset carries a `SeededRandomOrder` default ranking
/// derived from the same seed.
pub fn gen_boolean(n: usize, m: usize, p: f64, seed: u64) -> Result<Dataset, DataError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DataError::InvalidSkew { p });
    }
    let capacity = if m >= 128 { u128::MAX } else { 1u128 << m };
    if (n as u128) > capacity {
        return Err(DataError::Capacity { n, m, capacity });
    }
    let schema = Schema::new((1..=m).map(|i| Attribute::boolean(format!("A{i}"))).collect())?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::with_capacity(n);
    let mut rows: Vec<Vec<Value>> = Vec::with_capacity(n);
    let mut attempts: u64 = 0;
    // Generous cap: extreme skews make distinct sampling grind to a halt
    // long before this, and we would rather fail loudly than spin.
    let max_attempts = 2_000 * n as u64 + 10_000;
    while rows.len() < n {
        attempts += 1;
        if attempts > max_attempts {
            return Err(DataError::GenerationStalled { n, attempts });
        }
        let row: Vec<Value> =
            (0..m).map(|_| Value(u16::from(rng.gen_bool(p)))).collect();
        if seen.insert(row.clone()) {
            rows.push(row);
        }
    }
    Ok(Dataset::new(schema, rows)?
        .with_default_ranking(RankingFunction::SeededRandomOrder { seed }))
}
