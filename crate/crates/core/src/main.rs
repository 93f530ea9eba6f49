use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sustain_eval::evaluate::{coverage_table, evaluate, parse_metric_list, EvalOptions};
use sustain_eval::ingest::{load_catalog, load_dataset, write_dataset, IngestError};
use sustain_eval::rerank::{rerank_dataset, weight_grid, RerankMode, RerankOptions, SustainObjective, DEFAULT_GRID_SIZE};
use sustain_eval::synth::{generate_tables, SynthConfig};

const THREADS_ENV: &str = "SUSTAIN_EVAL_THREADS";

#[derive(Parser)]
#[command(name = "sustain-eval", version, about = "Sustainability metrics and re-ranking for recommender logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Compute metrics and write one report.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated metric names; all metrics when omitted.
        #[arg(short = 'm', long)]
        metrics: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        decay: Option<f64>,
        /// Restrict producer exposure fairness to one item category.
        #[arg(long)]
        category: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-field label coverage of the catalog.
    Coverage {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy/sustainability frontier for every judged user.
    Rerank {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// green_rate, carbon or lci.
        #[arg(long, default_value = "green_rate")]
        objective: String,
        /// Number of evenly spaced weights in [0, 1].
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid: usize,
        /// Build green-only lists instead of a frontier.
        #[arg(long)]
        green_filter: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic dataset directory with its manifest.
    Synth {
        /// JSON synth configuration; defaults apply to omitted fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Data(e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(format!("stdout: {e}"))),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Evaluate {
            manifest,
            metrics,
            format,
            epsilon,
            decay,
            category,
            out,
        } => {
            let metrics = match metrics {
                Some(list) => parse_metric_list(&list).map_err(Failure::Usage)?,
                None => Vec::new(),
            };
            if epsilon.is_some_and(|e| !(e > 0.0)) {
                return Err(Failure::Usage("--epsilon must be positive".into()));
            }
            if decay.is_some_and(|d| !(d > 0.0 && d <= 1.0)) {
                return Err(Failure::Usage("--decay must lie in (0, 1]".into()));
            }
            let ds = load_dataset(&manifest)?;
            let report = evaluate(
                &ds,
                &EvalOptions {
                    metrics,
                    epsilon,
                    decay,
                    category,
                },
            );
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &text)
        }
        Command::Coverage { manifest, format, out } => {
            let catalog = load_catalog(&manifest)?;
            let table = coverage_table(&catalog).map_err(|e| Failure::Data(format!("{}: {e}", manifest.display())))?;
            let text = match format {
                Format::Json => table.to_json(),
                Format::Csv => table.to_csv(),
            };
            emit(out.as_deref(), &text)
        }
        Command::Rerank {
            manifest,
            k,
            objective,
            grid,
            green_filter,
            format,
            out,
        } => {
            let objective: SustainObjective = objective.parse().map_err(Failure::Usage)?;
            if k == 0 {
                return Err(Failure::Usage("--k must be at least 1".into()));
            }
            if grid == 0 {
                return Err(Failure::Usage("--grid must be at least 1".into()));
            }
            let ds = load_dataset(&manifest)?;
            let report = rerank_dataset(
                &ds,
                &RerankOptions {
                    k,
                    objective,
                    grid: weight_grid(grid),
                    mode: if green_filter {
                        RerankMode::GreenFilter
                    } else {
                        RerankMode::Frontier
                    },
                },
            );
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &text)
        }
        Command::Synth { config, seed, out } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                    serde_json::from_str::<SynthConfig>(&text)
                        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?
                }
                None => SynthConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let tables = generate_tables(&cfg).map_err(|e| Failure::Data(e.to_string()))?;
            let manifest = write_dataset(&tables, &out)?;
            eprintln!("wrote {}", manifest.display());
            Ok(())
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Failure::Internal(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| run(cli.command)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sustain-eval: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
