//! deeptopk command line: generate synthetic datasets, extract top-h tuples
//! through a simulated top-k interface, run query-cost experiments, and
//! crawl small databases for ground truth.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use deeptopk::csv_io::{load_csv_path, write_csv, CsvOptions, DEFAULT_BINS};
use deeptopk::experiment::{run_experiment, ExperimentConfig, CSV_HEADER};
use deeptopk::rank::RankedOrder;
use deeptopk::testing::crawl_all;
use deeptopk::{
    gen_boolean, get_top_h, get_top_h_constrained, get_top_h_postfiltered, simulate, Algorithm,
    Dataset, Direction, EngineOptions, Query, RankingFunction, TopKSource,
};

#[derive(Parser)]
#[command(name = "deeptopk", version, about = "Dig past a top-k interface: extract top-h ranked tuples with few queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic boolean dataset as CSV.
    Generate(GenerateArgs),
    /// Extract the top-h tuples from a CSV-backed simulated site; prints a
    /// JSON report.
    Topk(TopkArgs),
    /// Run a query-cost experiment from a JSON config.
    Run(RunArgs),
    /// Crawl an entire (small) database through its top-k interface.
    CrawlOracle(CrawlArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of tuples.
    #[arg(long)]
    n: usize,
    /// Number of boolean attributes.
    #[arg(long)]
    m: usize,
    /// Probability of a 1 in each attribute.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Skip the __rank__ column (the seeded order is then not materialized).
    #[arg(long)]
    no_rank_column: bool,
}

#[derive(Args)]
struct TopkArgs {
    /// Dataset CSV path.
    #[arg(long)]
    data: PathBuf,
    /// Ranking: `explicit`, `random:SEED`, or `sort:ATTR:asc|desc`.
    /// Defaults to the dataset's own (e.g. its __rank__ column).
    #[arg(long)]
    ranking: Option<String>,
    /// Result cap of the simulated interface.
    #[arg(long)]
    k: usize,
    /// How many top tuples to extract.
    #[arg(long)]
    h: usize,
    #[arg(long, default_value = "ordered")]
    algorithm: String,
    /// Session seed (drives tie resolution only).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional query budget; exceeding it aborts the run.
    #[arg(long)]
    budget: Option<u64>,
    /// Selectivity constraint like `A4=1,Color=red`, prefixed to every query.
    #[arg(long)]
    constraint: Option<String>,
    /// Treat the constraint as unfilterable: extract globally and post-filter.
    #[arg(long)]
    post_filter: bool,
    /// Equi-width bins for numeric CSV columns.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the k sweep, comma-separated.
    #[arg(long)]
    k: Option<String>,
    /// Override the h sweep, comma-separated.
    #[arg(long)]
    h: Option<String>,
    /// Override the repetition count.
    #[arg(long)]
    repetitions: Option<usize>,
}

#[derive(Args)]
struct CrawlArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    ranking: Option<String>,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
}

fn parse_ranking(spec: &str) -> Result<RankingFunction> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["random", seed] => Ok(RankingFunction::SeededRandomOrder {
            seed: seed.parse().context("random ranking seed")?,
        }),
        ["sort", attr, dir] => Ok(RankingFunction::SortByAttribute {
            attribute: attr.to_string(),
            direction: match *dir {
                "asc" => Direction::Asc,
                "desc" => Direction::Desc,
                other => bail!("direction must be asc or desc, got `{other}`"),
            },
        }),
        _ => bail!("ranking must be `explicit`, `random:SEED` or `sort:ATTR:asc|desc`"),
    }
}

fn resolve_ranking(dataset: &Dataset, spec: &Option<String>) -> Result<RankingFunction> {
    match spec.as_deref() {
        None => dataset
            .default_ranking()
            .cloned()
            .ok_or_else(|| anyhow!("dataset has no __rank__ column; pass --ranking")),
        Some("explicit") => match dataset.default_ranking() {
            Some(r @ RankingFunction::ExplicitPermutation(_)) => Ok(r.clone()),
            _ => bail!("explicit ranking requires a __rank__ column"),
        },
        Some(other) => parse_ranking(other),
    }
}

fn parse_algorithm(name: &str) -> Result<Algorithm> {
    match name {
        "beyond_h" => Ok(Algorithm::BeyondH),
        "ordered" => Ok(Algorithm::Ordered),
        other => bail!("algorithm must be beyond_h or ordered, got `{other}`"),
    }
}

fn parse_constraint(dataset: &Dataset, spec: &str) -> Result<Query> {
    let mut pairs = Vec::new();
    for clause in spec.split(',') {
        let (attr, value) = clause
            .split_once('=')
            .ok_or_else(|| anyhow!("constraint clause `{clause}` is not ATTR=VALUE"))?;
        pairs.push((attr.trim(), value.trim()));
    }
    Query::parse(dataset.schema(), &pairs).map_err(|e| anyhow!("{e}"))
}

fn parse_sweep(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|s| s.trim().parse::<usize>().context("sweep value"))
        .collect()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => generate(args),
        Command::Topk(args) => topk(args),
        Command::Run(args) => run(args),
        Command::CrawlOracle(args) => crawl(args),
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let dataset = gen_boolean(args.n, args.m, args.p, args.seed)?;
    let order = if args.no_rank_column {
        None
    } else {
        let ranking = dataset.default_ranking().expect("generator attaches a ranking").clone();
        Some(RankedOrder::build(&dataset, &ranking)?)
    };
    let file = std::fs::File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_csv(&dataset, order.as_ref(), file)?;
    eprintln!(
        "wrote {} tuples x {} attributes to {}",
        args.n,
        args.m,
        args.out.display()
    );
    Ok(())
}

fn topk(args: TopkArgs) -> Result<()> {
    let dataset = Arc::new(load_csv_path(&args.data, CsvOptions { bins: args.bins })?);
    let ranking = resolve_ranking(&dataset, &args.ranking)?;
    let algorithm = parse_algorithm(&args.algorithm)?;
    let (mut iface, _) = simulate(Arc::clone(&dataset), &ranking, args.k, args.budget)
        .map_err(|e| anyhow!("{e}"))?;
    let options = EngineOptions::default();
    let report = match &args.constraint {
        None => get_top_h(&mut iface, args.h, algorithm, args.seed, options)?,
        Some(spec) => {
            let constraint = parse_constraint(&dataset, spec)?;
            if args.post_filter {
                get_top_h_postfiltered(&mut iface, &constraint, args.h, algorithm, args.seed, options)?
            } else {
                get_top_h_constrained(&mut iface, &constraint, args.h, algorithm, args.seed, options)?
                    .0
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text).context("parsing config")?;
    if let Some(out) = args.output {
        config.output = Some(out);
    }
    if let Some(k) = args.k {
        config.k = parse_sweep(&k)?;
    }
    if let Some(h) = args.h {
        config.h = parse_sweep(&h)?;
    }
    if let Some(reps) = args.repetitions {
        config.repetitions = reps;
    }
    let rows = run_experiment(&config)?;
    match &config.output {
        Some(path) => eprintln!("wrote {} rows to {}", rows.len(), path.display()),
        None => {
            println!("{CSV_HEADER}");
            for row in &rows {
                println!("{}", row.csv_line());
            }
        }
    }
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        eprintln!("{failures} cell(s) failed; see rows above");
    }
    Ok(())
}

fn crawl(args: CrawlArgs) -> Result<()> {
    let dataset = Arc::new(load_csv_path(&args.data, CsvOptions { bins: args.bins })?);
    let ranking = resolve_ranking(&dataset, &args.ranking)?;
    let (mut iface, _) =
        simulate(Arc::clone(&dataset), &ranking, args.k, None).map_err(|e| anyhow!("{e}"))?;
    let tuples = crawl_all(&mut iface)?;
    for t in &tuples {
        println!("{}\t{}", t.id.0, t.labels(dataset.schema()).join(","));
    }
    eprintln!("crawled {} tuples with {} queries", tuples.len(), iface.query_count());
    Ok(())
}
