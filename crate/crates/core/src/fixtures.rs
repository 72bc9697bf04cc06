//! Small fixed datasets used in tests, docs and the CLI walkthrough.

use crate::csv_io::{load_csv, CsvOptions};
use crate::dataset::Dataset;

/// The 7-tuple, 5-boolean-attribute walkthrough database.
///
/// Tuple ids 0..=6 correspond to ranks 1..=7 under the attached explicit
/// ranking, i.e. id 0 is the highest-ranked tuple.
pub const TINY7_CSV: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/tiny7.csv"));

pub fn tiny7() -> Dataset {
    load_csv(TINY7_CSV.as_bytes(), CsvOptions::default()).expect("fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny7_shape() {
        let ds = tiny7();
        assert_eq!(ds.len(), 7);
        assert_eq!(ds.schema().attr_count(), 5);
    }
}
