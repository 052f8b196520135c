//! `satphase`: generate random 3-SAT datasets, profile the phase transition,
//! render prompts, run model evaluations and aggregate their results.
//!
//! Every subcommand reads its settings from the matching table of an optional
//! TOML file given with `--config` (or from a previous run's manifest), then
//! applies command-line flags on top. Exit codes: 0 success, 1 other failure,
//! 2 configuration error, 3 I/O error, 4 transport failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use satphase::metrics::Secondary;
use satphase::{Format, HardBand, Variant};

use config::{
    adapter_from_flags, load, CountSettings, EncodeSettings, EvaluateSettings, GenerateSettings,
    GridSelection, PhaseSettings, ReportSettings, SolveSettings,
};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "satphase", version, about = "Random 3-SAT phase-transition lab")]
struct Cli {
    /// TOML run config, or a manifest.json from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labelled, counted, region-tagged dataset.
    Generate(GenerateArgs),
    /// Profile P(SAT) and solver effort against α and chart them.
    Phase(PhaseArgs),
    /// Render dataset instances as prompts.
    Encode(EncodeArgs),
    /// Decide a DIMACS formula.
    Solve(SolveArgs),
    /// Count the models of a DIMACS formula or of every dataset instance.
    Count(CountArgs),
    /// Run a model adapter over a dataset and score its answers.
    Evaluate(EvaluateArgs),
    /// Aggregate evaluation records into series, charts and confusion tables.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// The 200-cell dataset grid.
    #[arg(long, conflicts_with_all = ["grid", "alphas"])]
    paper_grid: bool,
    /// `paper` or `n=K` (one row of the reference grid).
    #[arg(long, conflicts_with = "alphas")]
    grid: Option<String>,
    /// Variable count of a custom grid (with --alphas).
    #[arg(long)]
    n: Option<u32>,
    /// Comma-separated α values of a custom grid.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    per_alpha: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Skip model counting.
    #[arg(long)]
    no_count: bool,
    /// Hard band as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    hard_band: Option<Vec<f64>>,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    per_alpha: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Right-axis measure: `decisions` or `wall-time`.
    #[arg(long, value_parser = parse_secondary)]
    secondary: Option<Secondary>,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    vocab_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    dimacs: Option<PathBuf>,
    /// Give up after this many decisions.
    #[arg(long)]
    budget: Option<u64>,
    /// Also write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long, conflicts_with = "dataset")]
    dimacs: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// http_chat, scripted_oracle, scripted_constant or scripted_noisy.
    #[arg(long)]
    adapter: Option<String>,
    /// Reply of scripted_constant.
    #[arg(long)]
    answer: Option<String>,
    /// Probability that scripted_noisy answers correctly.
    #[arg(long)]
    p: Option<f64>,
    /// Seed of scripted_noisy.
    #[arg(long)]
    adapter_seed: Option<u64>,
    /// Chat-completions URL of http_chat.
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent by http_chat.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    vocab_seed: Option<u64>,
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Record files; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    records: Option<Vec<PathBuf>>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
}

fn parse_secondary(text: &str) -> Result<Secondary, String> {
    match text {
        "decisions" => Ok(Secondary::Decisions),
        "wall-time" | "wall_time" => Ok(Secondary::WallTime),
        _ => Err(format!("unknown measure {text:?} (expected decisions or wall-time)")),
    }
}

macro_rules! overlay {
    ($settings:ident, $args:ident; $($field:ident),* $(,)?) => {
        $(if let Some(v) = $args.$field { $settings.$field = v; })*
    };
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Generate(a) => {
            let mut s: GenerateSettings = load(cfg, "generate")?;
            overlay!(s, a; out, per_alpha, seed);
            if a.paper_grid {
                s.grid = GridSelection::Paper;
            }
            if let Some(g) = &a.grid {
                s.grid = GridSelection::parse(g)?;
            }
            match (a.n, a.alphas) {
                (n, Some(alphas)) => {
                    let n = n
                        .or(match &s.grid {
                            GridSelection::Custom { n, .. } => Some(*n),
                            _ => None,
                        })
                        .ok_or_else(|| CliError::Config("--alphas needs --n".into()))?;
                    s.grid = GridSelection::Custom { n, alphas };
                }
                (Some(n), None) => match &mut s.grid {
                    GridSelection::Custom { n: current, .. } => *current = n,
                    _ => return Err(CliError::Config("--n needs --alphas".into())),
                },
                (None, None) => {}
            }
            if a.no_count {
                s.count_models = false;
            }
            if let Some(b) = a.hard_band {
                s.hard_band = HardBand { lo: b[0], hi: b[1] };
            }
            if a.parallelism.is_some() {
                s.parallelism = a.parallelism;
            }
            commands::generate(&s)
        }
        Command::Phase(a) => {
            let mut s: PhaseSettings = load(cfg, "phase")?;
            overlay!(s, a; out_dir, n, alphas, per_alpha, seed, secondary);
            if a.parallelism.is_some() {
                s.parallelism = a.parallelism;
            }
            commands::phase(&s)
        }
        Command::Encode(a) => {
            let mut s: EncodeSettings = load(cfg, "encode")?;
            overlay!(s, a; dataset, out, format, variant, shots, vocab_seed);
            commands::encode(&s)
        }
        Command::Solve(a) => {
            let mut s: SolveSettings = load(cfg, "solve")?;
            overlay!(s, a; dimacs);
            if a.budget.is_some() {
                s.budget = a.budget;
            }
            if a.out.is_some() {
                s.out = a.out;
            }
            if s.dimacs.as_os_str().is_empty() {
                return Err(CliError::Config("solve needs --dimacs".into()));
            }
            commands::solve(&s)
        }
        Command::Count(a) => {
            let mut s: CountSettings = load(cfg, "count")?;
            if a.dimacs.is_some() {
                s.dimacs = a.dimacs;
                s.dataset = None;
            }
            if a.dataset.is_some() {
                s.dataset = a.dataset;
                s.dimacs = None;
            }
            if a.out.is_some() {
                s.out = a.out;
            }
            if a.parallelism.is_some() {
                s.parallelism = a.parallelism;
            }
            commands::count(&s)
        }
        Command::Evaluate(a) => {
            let mut s: EvaluateSettings = load(cfg, "evaluate")?;
            overlay!(s, a; dataset, out, format, variant, shots, parallelism, vocab_seed);
            if a.limit.is_some() {
                s.limit = a.limit;
            }
            let kind = a.adapter.or_else(|| {
                let any_param = a.answer.is_some()
                    || a.p.is_some()
                    || a.adapter_seed.is_some()
                    || a.endpoint.is_some()
                    || a.model.is_some();
                any_param.then(|| adapter_kind(&s.adapter).to_string())
            });
            if let Some(kind) = kind {
                s.adapter = adapter_from_flags(&kind, &s.adapter, a.answer, a.p, a.adapter_seed, a.endpoint, a.model)?;
            }
            commands::evaluate(&s)
        }
        Command::Report(a) => {
            let mut s: ReportSettings = load(cfg, "report")?;
            overlay!(s, a; dataset, records, out_dir, window);
            commands::report(&s)
        }
    }
}

fn adapter_kind(spec: &satphase::AdapterSpec) -> &'static str {
    use satphase::AdapterSpec::*;
    match spec {
        HttpChat(_) => "http_chat",
        ScriptedOracle => "scripted_oracle",
        ScriptedConstant { .. } => "scripted_constant",
        ScriptedNoisy { .. } => "scripted_noisy",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("satphase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
