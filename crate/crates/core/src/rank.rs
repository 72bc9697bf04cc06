//! Static ranking functions.
//!
//! A ranking function induces a strict total order over a dataset: every
//! tuple gets a unique rank in `1..=n`, with rank 1 being the best. The
//! order is independent of the query being asked.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::dataset::Dataset;
use crate::error::DataError;
use crate::schema::TupleId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Asc,
    Desc,
}

/// How a dataset's hidden total order is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingFunction {
    /// Rank per tuple id, 1-based; entry `i` is the rank of tuple id `i`.
    ExplicitPermutation(Vec<u32>),
    /// Order by one attribute's value (numeric-aware label comparison),
    /// breaking ties by tuple id ascending.
    SortByAttribute { attribute: String, direction: Direction },
    /// A reproducible uniformly random permutation.
    SeededRandomOrder { seed: u64 },
}

/// A materialized total order: rank lookup in both directions.
#[derive(Clone, Debug)]
pub struct RankedOrder {
    ids_by_rank: Vec<TupleId>,
    rank_by_id: Vec<u32>,
}

/// Compare two value labels numerically when both parse as numbers,
/// lexicographically otherwise.
fn label_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        _ => a.cmp(b),
    }
}

impl RankedOrder {
    pub fn build(dataset: &Dataset, ranking: &RankingFunction) -> Result<Self, DataError> {
        let n = dataset.len();
        let mut ids: Vec<TupleId> = dataset.tuples().iter().map(|t| t.id).collect();
        match ranking {
            RankingFunction::ExplicitPermutation(ranks) => {
                if ranks.len() != n {
                    return Err(DataError::BadRankColumn {
                        column: "__rank__".into(),
                        n,
                        detail: format!("{} ranks for {} tuples", ranks.len(), n),
                    });
                }
                let mut seen = vec![false; n];
                for (id, &r) in ranks.iter().enumerate() {
                    if r < 1 || r as usize > n || seen[r as usize - 1] {
                        return Err(DataError::BadRankColumn {
                            column: "__rank__".into(),
                            n,
                            detail: format!("rank {r} of tuple {id} is out of range or repeated"),
                        });
                    }
                    seen[r as usize - 1] = true;
                }
                ids.sort_by_key(|id| ranks[id.index()]);
            }
            RankingFunction::SortByAttribute { attribute, direction } => {
                let attr = dataset
                    .schema()
                    .attr_id(attribute)
                    .ok_or_else(|| DataError::UnknownRankingAttribute { name: attribute.clone() })?;
                let schema = dataset.schema();
                ids.sort_by(|a, b| {
                    let la = schema.label(attr, dataset.tuple(*a).value(attr));
                    let lb = schema.label(attr, dataset.tuple(*b).value(attr));
                    let ord = match direction {
                        Direction::Asc => label_cmp(la, lb),
                        Direction::Desc => label_cmp(lb, la),
                    };
                    ord.then(a.cmp(b))
                });
            }
            RankingFunction::SeededRandomOrder { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                ids.shuffle(&mut rng);
            }
        }
        let mut rank_by_id = vec![0u32; n];
        for (pos, id) in ids.iter().enumerate() {
            rank_by_id[id.index()] = pos as u32 + 1;
        }
        Ok(RankedOrder { ids_by_rank: ids, rank_by_id })
    }

    /// Tuple ids from best (rank 1) to worst (rank n).
    pub fn ids_by_rank(&self) -> &[TupleId] {
        &self.ids_by_rank
    }

    /// 1-based rank of a tuple id.
    pub fn rank_of(&self, id: TupleId) -> Option<u32> {
        self.rank_by_id.get(id.index()).copied()
    }

    pub fn len(&self) -> usize {
        self.ids_by_rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids_by_rank.is_empty()
    }
}
