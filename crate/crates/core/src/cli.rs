//! Command-line front end.
//!
//! Machine-readable output goes to `--out` (or stdout); human-readable
//! summaries go to stderr. Every error maps to a stable exit code, see
//! [`Error::exit_code`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dataset::{Dataset, SensorConfiguration};
use crate::error::{Error, Result};
use crate::hybrid::{
    rank_sites, PredictorAnchors, TunedPredictor, TuningSettings, ValidationMetric,
};
use crate::layout::SensorLayout;
use crate::noise::{noise_sweep, NoiseLevel};
use crate::pipeline::{fit_hybrid, PipelineOptions, UndefinedPolicy};
use crate::report::ValidationReport;
use crate::search::{best_k_subset, exhaustive_search, pareto_frontier, SearchResult};
use crate::synthetic::{generate_dataset, HiddenModel};

#[derive(Debug, Parser)]
#[command(
    name = "tactile-placement",
    version,
    about = "Tactile sensor layout prediction and search"
)]
pub struct Cli {
    /// Layout JSON; defaults to the built-in 21-site hand.
    #[arg(long, global = true)]
    pub layout: Option<PathBuf>,

    /// Seed for every stochastic step. Required by stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads for parallel search and Monte Carlo (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Mae,
    Rmse,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a tuned predictor: correlation, OLS, initialization, fine-tuning.
    Fit(FitArgs),
    /// Predict success rates for a dataset or a single bit string.
    Predict(PredictArgs),
    /// Compare predictions with measured success rates.
    Validate(ValidateArgs),
    /// Rank sites by tuned coefficient.
    Rank(PredictorArg),
    /// Best configuration within a budget (or of exactly k sites).
    Search(SearchArgs),
    /// Cost / predicted-success Pareto frontier.
    Pareto(PredictorArg),
    /// Predicted success under per-sensor bit-flip noise.
    NoiseSweep(NoiseArgs),
    /// Sample a dataset from a hidden ground-truth model.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct PredictorArg {
    #[arg(long)]
    pub predictor: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Success rate with no sensors.
    #[arg(long)]
    pub p0: f64,
    /// Success rate with the full original sensor set.
    #[arg(long)]
    pub p92: f64,
    /// Explicit validation dataset; otherwise a seeded split of --dataset.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub validation_fraction: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step_delta: f64,
    #[arg(long, default_value_t = 50)]
    pub max_passes: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Mae)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    /// Fail instead of zero-initializing sites that never vary.
    #[arg(long)]
    pub strict_undefined: bool,
    /// Where to write the tuning log CSV.
    #[arg(long)]
    pub tuning_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub predictor: PathBuf,
    #[arg(long, conflicts_with = "bits", required_unless_present = "bits")]
    pub dataset: Option<PathBuf>,
    /// Configuration as a 0/1 string in site order.
    #[arg(long)]
    pub bits: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub predictor: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub predictor: PathBuf,
    /// Cost budget for exhaustive search.
    #[arg(long, conflicts_with = "k", required_unless_present = "k")]
    pub budget: Option<f64>,
    /// Exact number of sites (closed-form top-k).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long)]
    pub predictor: PathBuf,
    /// Configuration under test; all sites present when omitted.
    #[arg(long)]
    pub bits: Option<String>,
    /// Comma-separated flip probabilities.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Hidden model JSON.
    #[arg(long)]
    pub hidden: PathBuf,
    #[arg(long)]
    pub records: usize,
}

/// Parses `args`, runs the command, reports errors on stderr and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if cli.workers > 0 {
        builder = builder.num_threads(cli.workers);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidSetting(format!("worker pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<()> {
    let layout = match &cli.layout {
        Some(path) => SensorLayout::load(path)?,
        None => SensorLayout::builtin_shadow21(),
    };
    match &cli.command {
        Command::Fit(args) => cmd_fit(cli, &layout, args),
        Command::Predict(args) => cmd_predict(cli, &layout, args),
        Command::Validate(args) => cmd_validate(cli, &layout, args),
        Command::Rank(args) => cmd_rank(cli, &layout, args),
        Command::Search(args) => cmd_search(cli, &layout, args),
        Command::Pareto(args) => cmd_pareto(cli, &layout, args),
        Command::NoiseSweep(args) => cmd_noise_sweep(cli, &layout, args),
        Command::Generate(args) => cmd_generate(cli, &layout, args),
    }
}

fn require_seed(cli: &Cli, what: &str) -> Result<u64> {
    cli.seed
        .ok_or_else(|| Error::InvalidSetting(format!("--seed is required for {what}")))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn emit(cli: &Cli, content: &str) -> Result<()> {
    match &cli.out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_predictor(path: &Path, layout: &SensorLayout) -> Result<TunedPredictor> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let predictor = TunedPredictor::from_json(&text)?;
    Error::check_dim(layout.len(), predictor.len())?;
    Ok(predictor)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output") + "\n"
}

#[derive(Serialize)]
struct ResultRow {
    cost: f64,
    predicted: f64,
    bits: String,
}

impl From<&SearchResult> for ResultRow {
    fn from(r: &SearchResult) -> Self {
        ResultRow {
            cost: r.cost,
            predicted: r.predicted,
            bits: r.config.to_string(),
        }
    }
}

fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("cost,predicted,bits\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.cost, r.predicted, r.bits));
    }
    out
}

fn cmd_fit(cli: &Cli, layout: &SensorLayout, args: &FitArgs) -> Result<()> {
    let anchors = PredictorAnchors::new(args.p0, args.p92)?;
    let data = Dataset::load(&args.dataset, layout)?;
    let (train, validation) = match &args.validation {
        Some(path) => (data, Dataset::load(path, layout)?),
        None => data.split(
            args.validation_fraction,
            require_seed(cli, "a validation split")?,
        )?,
    };
    let options = PipelineOptions {
        tuning: TuningSettings {
            step_delta: args.step_delta,
            max_passes: args.max_passes,
            validation_metric: match args.metric {
                MetricArg::Mae => ValidationMetric::Mae,
                MetricArg::Rmse => ValidationMetric::Rmse,
            },
        },
        ridge: args.ridge,
        undefined: if args.strict_undefined {
            UndefinedPolicy::Error
        } else {
            UndefinedPolicy::Zero
        },
    };
    let outcome = fit_hybrid(&train, &validation, anchors, &options)?;

    emit(cli, &(outcome.tuned.to_json() + "\n"))?;
    if let Some(path) = &args.tuning_log {
        write_file(path, &outcome.tuned.tuning_log_csv())?;
    }
    let metric = options.tuning.validation_metric;
    eprintln!(
        "train {} / validation {} records; undefined sites {:?}; OLS rmse {:.6}{}",
        train.len(),
        validation.len(),
        outcome.correlations.undefined_sites,
        outcome.regression.training_rmse,
        if outcome.regression.rank_deficient {
            " (rank deficient)"
        } else {
            ""
        },
    );
    eprintln!(
        "validation {metric}: initial {:.6} -> tuned {:.6} ({} accepted steps)",
        outcome.initial_validation_error,
        outcome.tuned_validation_error,
        outcome.tuned.tuning_log.len()
    );
    Ok(())
}

fn cmd_predict(cli: &Cli, layout: &SensorLayout, args: &PredictArgs) -> Result<()> {
    let predictor = load_predictor(&args.predictor, layout)?;
    let rows: Vec<(String, f64)> = match (&args.dataset, &args.bits) {
        (Some(path), _) => {
            let data = Dataset::load(path, layout)?;
            data.records()
                .iter()
                .map(|r| Ok((r.config_id.clone(), predictor.predict(&r.config)?)))
                .collect::<Result<_>>()?
        }
        (None, Some(bits)) => {
            let config: SensorConfiguration = bits.parse()?;
            vec![(bits.clone(), predictor.predict(&config)?)]
        }
        (None, None) => unreachable!("clap requires --dataset or --bits"),
    };
    let content = match cli.format {
        Format::Csv => {
            let mut out = String::from("config_id,predicted\n");
            for (id, p) in &rows {
                out.push_str(&format!("{id},{p}\n"));
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                config_id: &'a str,
                predicted: f64,
            }
            json(
                &rows
                    .iter()
                    .map(|(id, p)| Row {
                        config_id: id,
                        predicted: *p,
                    })
                    .collect::<Vec<_>>(),
            )
        }
    };
    emit(cli, &content)
}

fn cmd_validate(cli: &Cli, layout: &SensorLayout, args: &ValidateArgs) -> Result<()> {
    let predictor = load_predictor(&args.predictor, layout)?;
    let data = Dataset::load(&args.dataset, layout)?;
    let report = ValidationReport::evaluate(&predictor, &data)?;
    eprint!("{}", report.to_table());
    emit(
        cli,
        &match cli.format {
            Format::Csv => report.to_csv(),
            Format::Json => report.to_json() + "\n",
        },
    )
}

fn cmd_rank(cli: &Cli, layout: &SensorLayout, args: &PredictorArg) -> Result<()> {
    let predictor = load_predictor(&args.predictor, layout)?;
    let ranked = rank_sites(&predictor, layout)?;
    eprintln!(
        "{:>4}  {:<16} {:<7} {:<9} {:>10}",
        "rank", "site", "finger", "region", "T"
    );
    for (i, r) in ranked.iter().enumerate() {
        eprintln!(
            "{:>4}  {:<16} {:<7} {:<9} {:>10.5}",
            i + 1,
            r.site.name,
            r.site.finger,
            r.site.region,
            r.weight
        );
    }
    let content = match cli.format {
        Format::Csv => {
            let mut out = String::from("rank,site_id,name,finger,region,weight\n");
            for (i, r) in ranked.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    i + 1,
                    r.site.id,
                    r.site.name,
                    r.site.finger,
                    r.site.region,
                    r.weight
                ));
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                rank: usize,
                site_id: usize,
                name: &'a str,
                finger: &'a str,
                region: &'a str,
                weight: f64,
            }
            json(
                &ranked
                    .iter()
                    .enumerate()
                    .map(|(i, r)| Row {
                        rank: i + 1,
                        site_id: r.site.id,
                        name: &r.site.name,
                        finger: r.site.finger.as_str(),
                        region: r.site.region.as_str(),
                        weight: r.weight,
                    })
                    .collect::<Vec<_>>(),
            )
        }
    };
    emit(cli, &content)
}

fn cmd_search(cli: &Cli, layout: &SensorLayout, args: &SearchArgs) -> Result<()> {
    let predictor = load_predictor(&args.predictor, layout)?;
    let result = match (args.budget, args.k) {
        (Some(budget), _) => exhaustive_search(&predictor, layout, budget)?,
        (None, Some(k)) => best_k_subset(&predictor, layout, k)?,
        (None, None) => unreachable!("clap requires --budget or --k"),
    };
    eprintln!(
        "best: {} sites, cost {}, predicted {:.4}",
        result.config.count_ones(),
        result.cost,
        result.predicted
    );
    let row = ResultRow::from(&result);
    emit(
        cli,
        &match cli.format {
            Format::Csv => results_csv(&[row]),
            Format::Json => json(&row),
        },
    )
}

fn cmd_pareto(cli: &Cli, layout: &SensorLayout, args: &PredictorArg) -> Result<()> {
    let predictor = load_predictor(&args.predictor, layout)?;
    let frontier = pareto_frontier(&predictor, layout)?;
    eprintln!(
        "{} frontier points (model-predicted)",
        frontier.points.len()
    );
    let content = match cli.format {
        Format::Csv => frontier.to_csv(),
        Format::Json => json(
            &frontier
                .points
                .iter()
                .map(ResultRow::from)
                .collect::<Vec<_>>(),
        ),
    };
    emit(cli, &content)
}

fn cmd_noise_sweep(cli: &Cli, layout: &SensorLayout, args: &NoiseArgs) -> Result<()> {
    let seed = require_seed(cli, "noise-sweep")?;
    let predictor = load_predictor(&args.predictor, layout)?;
    let config = match &args.bits {
        Some(bits) => bits.parse()?,
        None => SensorConfiguration::ones(layout.len()),
    };
    let levels = match &args.levels {
        Some(ps) => ps
            .iter()
            .map(|&p| NoiseLevel::new(p))
            .collect::<Result<Vec<_>>>()?,
        None => NoiseLevel::defaults(),
    };
    let sweep = noise_sweep(&predictor, &config, &levels, args.trials, seed)?;
    let content = match cli.format {
        Format::Csv => sweep.to_csv(),
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                flip_probability: f64,
                analytic: f64,
                mc_mean: f64,
                mc_ci: f64,
            }
            json(
                &sweep
                    .levels
                    .iter()
                    .zip(&sweep.analytic)
                    .zip(&sweep.monte_carlo)
                    .map(|((l, &a), mc)| Row {
                        flip_probability: l.flip_probability(),
                        analytic: a,
                        mc_mean: mc.mean,
                        mc_ci: mc.ci_half_width,
                    })
                    .collect::<Vec<_>>(),
            )
        }
    };
    emit(cli, &content)
}

fn cmd_generate(cli: &Cli, layout: &SensorLayout, args: &GenerateArgs) -> Result<()> {
    let seed = require_seed(cli, "generate")?;
    if cli.format == Format::Json {
        return Err(Error::InvalidSetting(
            "generated datasets are CSV only".into(),
        ));
    }
    let hidden = HiddenModel::load(&args.hidden)?;
    let data = generate_dataset(&hidden, layout, args.records, seed)?;
    emit(cli, &data.to_csv())
}
