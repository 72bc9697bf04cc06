//! Experiment harness: measure query cost across sweeps of k, h, dataset
//! size and skew, with per-phase accounting and reproducible output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use crate::dataset::{gen_boolean, Dataset};
use crate::engine::{run_extraction, Algorithm, EngineOptions};
use crate::error::ExperimentError;
use crate::interface::simulate;
use crate::metrics::{expected_kendall_tau, kendall_tau};
use crate::rank::{Direction, RankingFunction};
use crate::schema::TupleId;

pub const CSV_HEADER: &str =
    "dataset,seed,n,m,p,k,h,algorithm,rep,cost_total,cost_gen,cost_test,kendall_tau,wall_ms";

/// Number of seeded linearizations behind each expected-tau estimate.
pub const LINEARIZATION_SAMPLES: usize = 100;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSpec {
    Synthetic { n: usize, m: usize, p: f64, seed: u64 },
    Csv { path: PathBuf, bins: Option<usize> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingSpec {
    /// Use the dataset's `__rank__` column.
    Explicit,
    Sort { attribute: String, direction: Direction },
    Random { seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub ranking: Option<RankingSpec>,
    pub k: Vec<usize>,
    pub h: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_weights")]
    pub weights: (f64, f64),
    /// Write elapsed milliseconds per cell. Disable for byte-identical
    /// rerun comparisons.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
}

fn default_repetitions() -> usize {
    1
}
fn default_weights() -> (f64, f64) {
    (1.0, 1.0)
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.k.is_empty() || self.h.is_empty() || self.algorithms.is_empty() {
            return Err(ExperimentError::Config("k, h and algorithms sweeps must be non-empty".into()));
        }
        if self.repetitions < 1 {
            return Err(ExperimentError::Config("repetitions must be >= 1".into()));
        }
        if self.k.iter().any(|k| *k <= 1) {
            return Err(ExperimentError::Config("every k must be > 1".into()));
        }
        if let DatasetSpec::Synthetic { p, .. } = self.dataset {
            if !(p > 0.0 && p < 1.0) {
                return Err(ExperimentError::Config(format!("p = {p} must be in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// One measured cell: config echo plus costs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub dataset: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub p: Option<f64>,
    pub k: usize,
    pub h: usize,
    pub algorithm: Algorithm,
    pub rep: usize,
    pub cost_total: u64,
    pub cost_gen: u64,
    pub cost_test: u64,
    pub kendall_tau: Option<f64>,
    pub wall_ms: u64,
    /// Cell failures are recorded here; the run continues.
    pub error: Option<String>,
}

impl ExperimentRow {
    /// Render the row exactly as it appears in the output CSV.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.dataset,
            self.seed,
            self.n,
            self.m,
            self.p.map(|p| p.to_string()).unwrap_or_default(),
            self.k,
            self.h,
            self.algorithm,
            self.rep,
            self.cost_total,
            self.cost_gen,
            self.cost_test,
            self.kendall_tau.map(|t| t.to_string()).unwrap_or_default(),
            self.wall_ms
        )
    }
}

struct Cell {
    rep: usize,
    k: usize,
    h: usize,
    algorithm: Algorithm,
}

/// Run every configured (dataset, k, h, algorithm, repetition) cell on a
/// worker pool, each with a fresh interface instance, and write the rows as
/// one CSV. Row order is deterministic regardless of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>, ExperimentError> {
    config.validate()?;

    // CSV datasets are shared across cells; synthetic ones are regenerated
    // per repetition so seeds vary the data.
    let base_csv: Option<Arc<Dataset>> = match &config.dataset {
        DatasetSpec::Csv { path, bins } => {
            let options = crate::csv_io::CsvOptions {
                bins: bins.unwrap_or(crate::csv_io::DEFAULT_BINS),
            };
            Some(Arc::new(crate::csv_io::load_csv_path(path, options)?))
        }
        DatasetSpec::Synthetic { .. } => None,
    };

    let mut cells = Vec::new();
    for rep in 0..config.repetitions {
        for &k in &config.k {
            for &h in &config.h {
                for &algorithm in &config.algorithms {
                    cells.push(Cell { rep, k, h, algorithm });
                }
            }
        }
    }

    let rows: Vec<ExperimentRow> = cells
        .par_iter()
        .map(|cell| run_cell(config, base_csv.clone(), cell))
        .collect();

    if let Some(path) = &config.output {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "{CSV_HEADER}")?;
        for row in &rows {
            writeln!(file, "{}", row.csv_line())?;
        }
        file.flush()?;
    }
    for row in &rows {
        if let Some(err) = &row.error {
            eprintln!(
                "cell failed (k={}, h={}, {}, rep {}): {err}",
                row.k, row.h, row.algorithm, row.rep
            );
        }
    }
    Ok(rows)
}

fn run_cell(
    config: &ExperimentConfig,
    base_csv: Option<Arc<Dataset>>,
    cell: &Cell,
) -> ExperimentRow {
    let (dataset_name, cell_seed, p) = match &config.dataset {
        DatasetSpec::Synthetic { seed, p, .. } => {
            ("synthetic".to_string(), seed.wrapping_add(cell.rep as u64), Some(*p))
        }
        DatasetSpec::Csv { path, .. } => (
            path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            cell.rep as u64,
            None,
        ),
    };

    let mut row = ExperimentRow {
        dataset: dataset_name,
        seed: cell_seed,
        n: 0,
        m: 0,
        p,
        k: cell.k,
        h: cell.h,
        algorithm: cell.algorithm,
        rep: cell.rep,
        cost_total: 0,
        cost_gen: 0,
        cost_test: 0,
        kendall_tau: None,
        wall_ms: 0,
        error: None,
    };

    match measure_cell(config, base_csv, cell, cell_seed) {
        Ok(measured) => {
            row.n = measured.n;
            row.m = measured.m;
            row.cost_total = measured.cost_total;
            row.cost_gen = measured.cost_gen;
            row.cost_test = measured.cost_test;
            row.kendall_tau = measured.kendall_tau;
            row.wall_ms = if config.record_wall_time { measured.wall_ms } else { 0 };
        }
        Err(err) => row.error = Some(err.to_string()),
    }
    row
}

struct Measured {
    n: usize,
    m: usize,
    cost_total: u64,
    cost_gen: u64,
    cost_test: u64,
    kendall_tau: Option<f64>,
    wall_ms: u64,
}

fn resolve_ranking(
    dataset: &Dataset,
    spec: &Option<RankingSpec>,
) -> Result<RankingFunction, ExperimentError> {
    match spec {
        None => dataset.default_ranking().cloned().ok_or_else(|| {
            ExperimentError::Config(
                "dataset carries no default ranking; specify one in the config".into(),
            )
        }),
        Some(RankingSpec::Explicit) => match dataset.default_ranking() {
            Some(r @ RankingFunction::ExplicitPermutation(_)) => Ok(r.clone()),
            _ => Err(ExperimentError::Config(
                "explicit ranking requested but the dataset has no __rank__ column".into(),
            )),
        },
        Some(RankingSpec::Sort { attribute, direction }) => {
            Ok(RankingFunction::SortByAttribute {
                attribute: attribute.clone(),
                direction: *direction,
            })
        }
        Some(RankingSpec::Random { seed }) => Ok(RankingFunction::SeededRandomOrder { seed: *seed }),
    }
}

fn measure_cell(
    config: &ExperimentConfig,
    base_csv: Option<Arc<Dataset>>,
    cell: &Cell,
    cell_seed: u64,
) -> Result<Measured, ExperimentError> {
    let dataset: Arc<Dataset> = match (&config.dataset, base_csv) {
        (DatasetSpec::Synthetic { n, m, p, .. }, _) => {
            Arc::new(gen_boolean(*n, *m, *p, cell_seed)?)
        }
        (DatasetSpec::Csv { .. }, Some(ds)) => ds,
        (DatasetSpec::Csv { .. }, None) => unreachable!("csv dataset preloaded"),
    };
    let ranking = resolve_ranking(&dataset, &config.ranking)?;
    let (mut iface, oracle) = simulate(Arc::clone(&dataset), &ranking, cell.k, None)
        .map_err(|e| ExperimentError::Config(e.to_string()))?;

    let options = EngineOptions { weights: config.weights };
    let start = Instant::now();
    let (report, state) = run_extraction(&mut iface, cell.h, cell.algorithm, cell_seed, options)?;
    let wall_ms = start.elapsed().as_millis() as u64;

    let emitted: Vec<TupleId> = report.tuples.iter().map(|t| TupleId(t.id)).collect();
    let mut reference = emitted.clone();
    reference.sort_by_key(|id| oracle.rank_of_id(*id).unwrap_or(u32::MAX));
    let tau = if report.certainty.iter().all(|c| *c) {
        kendall_tau(&emitted, &reference).map(|t| t as f64).ok()
    } else {
        expected_kendall_tau(
            state.graph(),
            &emitted,
            &reference,
            LINEARIZATION_SAMPLES,
            cell_seed ^ 0x5eed,
        )
        .ok()
    };

    Ok(Measured {
        n: dataset.len(),
        m: dataset.schema().attr_count(),
        cost_total: report.cost_total,
        cost_gen: report.cost_generation,
        cost_test: report.cost_testing,
        kendall_tau: tau,
        wall_ms,
    })
}
