//! CSV ingestion.
//!
//! Format: a header row of attribute names, string values, UTF-8. A reserved
//! `__rank__` column, when present, supplies an explicit 1..=n ranking and is
//! attached to the dataset as its default ranking.
//!
//! Columns whose values all parse as numbers and take more distinct values
//! than the configured bin count are discretized into equi-width bins;
//! numeric columns with few distinct values (e.g. 0/1 flags) are kept as
//! plain categories.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::DataError;
use crate::rank::RankingFunction;
use crate::schema::{Attribute, Schema, Value};

pub const RANK_COLUMN: &str = "__rank__";
pub const DEFAULT_BINS: usize = 8;

#[derive(Clone, Copy, Debug)]
pub struct CsvOptions {
    /// Number of equi-width bins for numeric columns.
    pub bins: usize,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { bins: DEFAULT_BINS }
    }
}

pub fn load_csv_path(path: &Path, options: CsvOptions) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path)?;
    load_csv(file, options)
}

pub fn load_csv<R: Read>(reader: R, options: CsvOptions) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let rank_col = headers.iter().position(|h| h == RANK_COLUMN);
    let attr_names: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != rank_col)
        .map(|(i, h)| (i, h.clone()))
        .collect();

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    let mut ranks: Vec<u32> = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = row_idx + 1;
        if record.len() != headers.len() {
            return Err(DataError::RowArity {
                row: row_no,
                got: record.len(),
                expected: headers.len(),
            });
        }
        let mut row = Vec::with_capacity(attr_names.len());
        for (col, name) in &attr_names {
            let cell = record.get(*col).unwrap_or("").trim();
            if cell.is_empty() {
                return Err(DataError::NullCell { row: row_no, column: name.clone() });
            }
            row.push(cell.to_string());
        }
        if let Some(rc) = rank_col {
            let cell = record.get(rc).unwrap_or("").trim();
            let rank: u32 = cell.parse().map_err(|_| DataError::BadRankColumn {
                column: RANK_COLUMN.into(),
                n: 0,
                detail: format!("row {row_no}: `{cell}` is not an integer"),
            })?;
            ranks.push(rank);
        }
        raw_rows.push(row);
    }
    if raw_rows.is_empty() {
        return Err(DataError::EmptyDataset);
    }

    let n = raw_rows.len();
    let mut attributes = Vec::with_capacity(attr_names.len());
    let mut encoded: Vec<Vec<Value>> = vec![Vec::with_capacity(attr_names.len()); n];
    for (a, (_, name)) in attr_names.iter().enumerate() {
        let column: Vec<&str> = raw_rows.iter().map(|r| r[a].as_str()).collect();
        let (attribute, values) = encode_column(name, &column, options.bins)?;
        attributes.push(attribute);
        for (r, v) in values.into_iter().enumerate() {
            encoded[r].push(v);
        }
    }

    let schema = Schema::new(attributes)?;
    let dataset = Dataset::new(schema, encoded)?;
    match rank_col {
        Some(_) => {
            // Validated by RankedOrder::build later, but fail fast here.
            let mut seen = vec![false; n];
            for (i, &r) in ranks.iter().enumerate() {
                if r < 1 || r as usize > n || seen[r as usize - 1] {
                    return Err(DataError::BadRankColumn {
                        column: RANK_COLUMN.into(),
                        n,
                        detail: format!("rank {r} at row {} out of range or repeated", i + 1),
                    });
                }
                seen[r as usize - 1] = true;
            }
            Ok(dataset.with_default_ranking(RankingFunction::ExplicitPermutation(ranks)))
        }
        None => Ok(dataset),
    }
}

/// Encode one column: categorical pass-through or equi-width binning.
fn encode_column(
    name: &str,
    column: &[&str],
    bins: usize,
) -> Result<(Attribute, Vec<Value>), DataError> {
    let distinct: BTreeSet<&str> = column.iter().copied().collect();
    let numeric: Option<Vec<f64>> =
        column.iter().map(|c| c.parse::<f64>().ok().filter(|x| x.is_finite())).collect();

    if let Some(nums) = numeric {
        if distinct.len() > bins && bins >= 2 {
            return Ok(bin_numeric(name, &nums, bins));
        }
    }

    let domain: Vec<String> = distinct.iter().map(|s| s.to_string()).collect();
    let attribute = Attribute::new(name, domain.clone());
    let values = column
        .iter()
        .map(|c| Value(domain.iter().position(|d| d == c).unwrap() as u16))
        .collect();
    Ok((attribute, values))
}

fn bin_numeric(name: &str, nums: &[f64], bins: usize) -> (Attribute, Vec<Value>) {
    let lo = nums.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let bin_of = |x: f64| -> usize {
        if width == 0.0 {
            return 0;
        }
        (((x - lo) / width) as usize).min(bins - 1)
    };
    let domain: Vec<String> = (0..bins)
        .map(|i| {
            let a = lo + i as f64 * width;
            let b = if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width };
            format!("b{i}:[{a:.4},{b:.4}]")
        })
        .collect();
    let values = nums.iter().map(|&x| Value(bin_of(x) as u16)).collect();
    (Attribute::new(name, domain), values)
}

/// Write a dataset back out as CSV, optionally materializing a ranking as a
/// leading `__rank__` column so the file reloads with the same order.
pub fn write_csv<W: std::io::Write>(
    dataset: &Dataset,
    order: Option<&crate::rank::RankedOrder>,
    writer: W,
) -> Result<(), DataError> {
    let schema = dataset.schema();
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = Vec::new();
    if order.is_some() {
        header.push(RANK_COLUMN.to_string());
    }
    header.extend(schema.attributes().iter().map(|a| a.name.clone()));
    w.write_record(&header)?;
    for tuple in dataset.tuples() {
        let mut record: Vec<String> = Vec::new();
        if let Some(order) = order {
            record.push(order.rank_of(tuple.id).expect("ranked dataset tuple").to_string());
        }
        record.extend(tuple.labels(schema));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
