//! One function per subcommand. Each takes fully resolved settings, writes its
//! outputs plus a manifest, and prints a short summary on stdout.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use satphase::cnf::parse_dimacs;
use satphase::count::{count_instances, CountError, DEFAULT_VARIABLE_CEILING};
use satphase::encoding::render;
use satphase::eval::{read_records, run_eval, EvalError, EvalOptions, TransportError};
use satphase::generate::{
    generate_grid, paper_dataset_grid, paper_grid_row, read_dataset, write_dataset, DatasetError,
    DatasetStats,
};
use satphase::metrics::{
    accuracy_vs_alpha, accuracy_vs_ratio, confusion, line_chart, phase_chart, series_file_name,
    tokens_vs_alpha, MetricsError, RegionFilter,
};
use satphase::solver::{solve_with_budget, SolveError};
use satphase::{count_models, hardness_profile, GridCell, HardBand, Instance, MetricSeries, Outcome};
use serde::Serialize;

use crate::config::{
    CountSettings, EncodeSettings, EvaluateSettings, GenerateSettings, GridSelection, Manifest,
    PhaseSettings, ReportSettings, SolveSettings,
};
use crate::error::CliError;

/// `dataset.jsonl` → `dataset.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if threads == Some(0) {
        return Err(CliError::Config("parallelism must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn dataset_error(path: &Path, err: DatasetError) -> CliError {
    CliError::io(path, err)
}

fn load_dataset(path: &Path) -> Result<Vec<Instance>, CliError> {
    read_dataset(path).map_err(|e| dataset_error(path, e))
}

fn count_error(err: CountError) -> CliError {
    match err {
        CountError::TooManyVariables { .. } => CliError::Config(err.to_string()),
        other => CliError::Failed(other.to_string()),
    }
}

fn metrics_error(err: MetricsError) -> CliError {
    match err {
        MetricsError::Io { .. } => CliError::Io(err.to_string()),
        other => CliError::Failed(other.to_string()),
    }
}

fn eval_error(err: EvalError) -> CliError {
    match err {
        EvalError::Encoding(e) => CliError::Config(e.to_string()),
        EvalError::DuplicateInstance(_) => CliError::Failed(err.to_string()),
        other => CliError::Io(other.to_string()),
    }
}

fn grid_cells(grid: &GridSelection) -> Result<Vec<GridCell>, CliError> {
    match grid {
        GridSelection::Paper => Ok(paper_dataset_grid()),
        GridSelection::PaperRow { n } => {
            paper_grid_row(*n).ok_or_else(|| CliError::Config(format!("the reference grid has no row n={n}")))
        }
        GridSelection::Custom { n, alphas } => {
            if alphas.is_empty() {
                return Err(CliError::Config("custom grid has no α values".into()));
            }
            Ok(alphas.iter().map(|&alpha| GridCell { n: *n, alpha }).collect())
        }
    }
}

pub fn generate(s: &GenerateSettings) -> Result<(), CliError> {
    let cells = grid_cells(&s.grid)?;
    if s.per_alpha == 0 {
        return Err(CliError::Config("per_alpha must be at least 1".into()));
    }
    let band = HardBand::new(s.hard_band.lo, s.hard_band.hi).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(cell) = cells.iter().find(|c| s.count_models && c.n > DEFAULT_VARIABLE_CEILING) {
        return Err(CliError::Config(format!(
            "n = {} exceeds the model-counting ceiling of {DEFAULT_VARIABLE_CEILING}; disable count_models",
            cell.n
        )));
    }
    let instances = with_pool(s.parallelism, || -> Result<Vec<Instance>, CliError> {
        let mut instances =
            generate_grid(&cells, s.per_alpha, s.seed, band).map_err(|e| CliError::Config(e.to_string()))?;
        if s.count_models {
            count_instances(&mut instances).map_err(count_error)?;
        }
        Ok(instances)
    })??;
    write_dataset(&instances, &s.out).map_err(|e| dataset_error(&s.out, e))?;

    let stats = DatasetStats::compute(&instances);
    let stats_path = sibling(&s.out, "stats.json");
    let mut stats_text = serde_json::to_string_pretty(&stats).expect("stats serialize");
    stats_text.push('\n');
    write_file(&stats_path, &stats_text)?;
    Manifest::new("generate", s, vec![file_name(&s.out), file_name(&stats_path)])
        .write(&sibling(&s.out, "manifest.json"))?;

    println!(
        "{} instances over {} cells, {} SAT ({:.2}%) -> {}",
        stats.total,
        cells.len(),
        stats.sat.count,
        100.0 * stats.sat_fraction,
        s.out.display()
    );
    Ok(())
}

pub fn phase(s: &PhaseSettings) -> Result<(), CliError> {
    let cells: Vec<GridCell> = s.alphas.iter().map(|&alpha| GridCell { n: s.n, alpha }).collect();
    if cells.is_empty() {
        return Err(CliError::Config("phase needs at least one α".into()));
    }
    let profile = with_pool(s.parallelism, || hardness_profile(&cells, s.per_alpha, s.seed))?
        .map_err(|e| CliError::Config(e.to_string()))?;
    let chart = phase_chart(&profile, s.secondary).map_err(metrics_error)?;
    create_dir(&s.out_dir)?;
    chart.write(&s.out_dir).map_err(metrics_error)?;
    let profile_path = s.out_dir.join("profile.json");
    let mut text = serde_json::to_string_pretty(&profile).expect("profile serialize");
    text.push('\n');
    write_file(&profile_path, &text)?;
    let outputs = ["phase.svg", "phase_psat.csv", "phase_decisions.csv", "phase_wall_time.csv", "profile.json"];
    Manifest::new("phase", s, outputs.map(String::from).to_vec()).write(&s.out_dir.join("manifest.json"))?;

    let peak = profile
        .iter()
        .max_by(|a, b| a.mean_decisions.total_cmp(&b.mean_decisions))
        .expect("non-empty profile");
    match chart.crossing {
        Some(c) => println!("n={}: P(SAT) crosses 0.5 at α = {c:.3}", s.n),
        None => println!("n={}: P(SAT) does not cross 0.5 on this grid", s.n),
    }
    println!(
        "mean decisions peak at α = {} ({:.1}); chart in {}",
        peak.alpha,
        peak.mean_decisions,
        s.out_dir.display()
    );
    Ok(())
}

pub fn encode(s: &EncodeSettings) -> Result<(), CliError> {
    let dataset = load_dataset(&s.dataset)?;
    let renderings = dataset
        .par_iter()
        .map(|inst| render(inst, s.format, s.variant, s.shots, s.vocab_seed))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = String::new();
    for r in &renderings {
        out.push_str(&serde_json::to_string(r).expect("rendering serializes"));
        out.push('\n');
    }
    write_file(&s.out, &out)?;
    Manifest::new("encode", s, vec![file_name(&s.out)]).write(&sibling(&s.out, "manifest.json"))?;
    println!("{} {} {} prompts -> {}", renderings.len(), s.format, s.variant, s.out.display());
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput {
    verdict: String,
    witness: Option<Vec<i32>>,
    decisions: u64,
    unit_propagations: u64,
    pure_eliminations: u64,
    backtracks: u64,
}

pub fn solve(s: &SolveSettings) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&s.dimacs).map_err(|e| CliError::io(&s.dimacs, e))?;
    let formula = parse_dimacs(&text).map_err(|e| CliError::io(&s.dimacs, e))?;
    let result = match solve_with_budget(&formula, s.budget) {
        Ok(r) => r,
        Err(SolveError::BudgetExhausted(stats)) => {
            println!("UNKNOWN");
            return Err(CliError::Failed(format!(
                "decision budget exhausted after {} decisions",
                stats.decisions
            )));
        }
    };
    let witness: Option<Vec<i32>> = result.witness.clone().map(Vec::from);
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", result.verdict);
    if let Some(w) = &witness {
        let lits: Vec<String> = w.iter().map(i32::to_string).collect();
        let _ = writeln!(stdout, "v {} 0", lits.join(" "));
    }
    let st = result.stats;
    let _ = writeln!(
        stdout,
        "c decisions {} propagations {} pure {} backtracks {}",
        st.decisions, st.unit_propagations, st.pure_eliminations, st.backtracks
    );
    if let Some(out) = &s.out {
        let report = SolveOutput {
            verdict: result.verdict.to_string(),
            witness,
            decisions: st.decisions,
            unit_propagations: st.unit_propagations,
            pure_eliminations: st.pure_eliminations,
            backtracks: st.backtracks,
        };
        write_file(out, &(serde_json::to_string_pretty(&report).expect("serializes") + "\n"))?;
        Manifest::new("solve", s, vec![file_name(out)]).write(&sibling(out, "manifest.json"))?;
    }
    Ok(())
}

pub fn count(s: &CountSettings) -> Result<(), CliError> {
    match (&s.dimacs, &s.dataset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let formula = parse_dimacs(&text).map_err(|e| CliError::io(path, e))?;
            let result = count_models(&formula).map_err(count_error)?;
            println!("models {}", result.model_count);
            println!("sat_ratio {}", result.sat_ratio);
            if let Some(out) = &s.out {
                write_file(out, &(serde_json::to_string_pretty(&result).expect("serializes") + "\n"))?;
                Manifest::new("count", s, vec![file_name(out)]).write(&sibling(out, "manifest.json"))?;
            }
            Ok(())
        }
        (None, Some(path)) => {
            let out = s
                .out
                .as_ref()
                .ok_or_else(|| CliError::Config("counting a dataset needs an output path".into()))?;
            let mut dataset = load_dataset(path)?;
            with_pool(s.parallelism, || count_instances(&mut dataset))?.map_err(count_error)?;
            write_dataset(&dataset, out).map_err(|e| dataset_error(out, e))?;
            Manifest::new("count", s, vec![file_name(out)]).write(&sibling(out, "manifest.json"))?;
            println!("counted {} instances -> {}", dataset.len(), out.display());
            Ok(())
        }
        _ => Err(CliError::Config("give exactly one of a DIMACS file or a dataset".into())),
    }
}

pub fn evaluate(s: &EvaluateSettings) -> Result<(), CliError> {
    if s.parallelism == 0 {
        return Err(CliError::Config("parallelism must be at least 1".into()));
    }
    let mut dataset = load_dataset(&s.dataset)?;
    if let Some(limit) = s.limit {
        dataset.truncate(limit);
    }
    let adapter = s.adapter.build().map_err(|e| match e {
        TransportError::MissingCredential(_) | TransportError::InvalidConfig(_) => CliError::Config(e.to_string()),
        other => CliError::Transport(other.to_string()),
    })?;
    let opts = EvalOptions {
        format: s.format,
        variant: s.variant,
        shots: s.shots,
        parallelism: s.parallelism,
        vocab_seed: s.vocab_seed,
    };
    let records = run_eval(&dataset, adapter.as_ref(), &opts, &s.out).map_err(eval_error)?;
    Manifest::new("evaluate", s, vec![file_name(&s.out)]).write(&sibling(&s.out, "manifest.json"))?;

    let correct = records.iter().filter(|r| r.verdict.is_correct()).count();
    let failed = records.iter().filter(|r| r.verdict == Outcome::TransportError).count();
    let total = records.len();
    println!(
        "{} {} {}: accuracy {correct}/{total} = {:.4} -> {}",
        adapter.name(),
        s.format,
        s.variant,
        if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        s.out.display()
    );
    if failed > 0 {
        return Err(CliError::Transport(format!(
            "{failed} of {total} requests failed; rerun the same command to retry them"
        )));
    }
    Ok(())
}

fn write_series(dir: &Path, name: &str, series: &MetricSeries, outputs: &mut Vec<String>) -> Result<(), CliError> {
    series.write_csv(&dir.join(name)).map_err(metrics_error)?;
    outputs.push(name.to_string());
    Ok(())
}

pub fn report(s: &ReportSettings) -> Result<(), CliError> {
    if s.records.is_empty() {
        return Err(CliError::Config("report needs at least one record file".into()));
    }
    if s.window == 0 {
        return Err(CliError::Config("window must be at least 1".into()));
    }
    let dataset = load_dataset(&s.dataset)?;
    create_dir(&s.out_dir)?;
    let mut outputs = Vec::new();
    let mut all_accuracy = Vec::new();
    for path in &s.records {
        let records = read_records(path).map_err(eval_error)?;
        let Some(first) = records.first() else {
            return Err(CliError::Failed(format!("{}: no records", path.display())));
        };
        let (adapter, format, variant) = (first.adapter.clone(), first.format.name(), first.variant.name());
        let name = |metric: &str, ext: &str| series_file_name(&adapter, format, variant, metric, ext);

        let accuracy = accuracy_vs_alpha(&records, &dataset, s.window).map_err(metrics_error)?;
        write_series(&s.out_dir, &name("accuracy_alpha", "csv"), &accuracy, &mut outputs)?;
        let svg = line_chart(
            std::slice::from_ref(&accuracy),
            &accuracy.label,
            "α = m / n",
            "accuracy",
            false,
        );
        write_file(&s.out_dir.join(name("accuracy_alpha", "svg")), &svg)?;
        outputs.push(name("accuracy_alpha", "svg"));

        let tokens = tokens_vs_alpha(&records, &dataset, s.window).map_err(metrics_error)?;
        write_series(&s.out_dir, &name("tokens_alpha", "csv"), &tokens, &mut outputs)?;
        let svg = line_chart(std::slice::from_ref(&tokens), &tokens.label, "α = m / n", "completion tokens", false);
        write_file(&s.out_dir.join(name("tokens_alpha", "svg")), &svg)?;
        outputs.push(name("tokens_alpha", "svg"));

        match accuracy_vs_ratio(&records, &dataset, RegionFilter::Split) {
            Ok(split) => {
                let all = accuracy_vs_ratio(&records, &dataset, RegionFilter::All).map_err(metrics_error)?;
                write_series(&s.out_dir, &name("accuracy_ratio", "csv"), &all[0], &mut outputs)?;
                for series in &split {
                    let region = series.label.rsplit('/').next().unwrap_or("region");
                    let metric = format!("accuracy_ratio_{region}");
                    write_series(&s.out_dir, &name(&metric, "csv"), series, &mut outputs)?;
                }
                let mut chart_series = all;
                chart_series.extend(split);
                let svg = line_chart(&chart_series, "accuracy on SAT instances", "satisfiability ratio", "accuracy", true);
                write_file(&s.out_dir.join(name("accuracy_ratio", "svg")), &svg)?;
                outputs.push(name("accuracy_ratio", "svg"));
            }
            Err(e @ (MetricsError::MissingCounts(_) | MetricsError::EmptyJoin)) => {
                eprintln!("{}: skipping satisfiability-ratio series: {e}", path.display());
            }
            Err(e) => return Err(metrics_error(e)),
        }

        let matrix = confusion(&records, &dataset).map_err(metrics_error)?;
        write_file(&s.out_dir.join(name("confusion", "csv")), &matrix.to_csv())?;
        outputs.push(name("confusion", "csv"));

        let overall = records.iter().filter(|r| r.verdict.is_correct()).count() as f64 / records.len() as f64;
        println!("{adapter}/{format}/{variant}: accuracy {overall:.4} over {} records", records.len());
        all_accuracy.push(accuracy);
    }
    if all_accuracy.len() > 1 {
        let svg = line_chart(&all_accuracy, "accuracy against clause density", "α = m / n", "accuracy", false);
        write_file(&s.out_dir.join("accuracy_alpha.svg"), &svg)?;
        outputs.push("accuracy_alpha.svg".into());
    }
    Manifest::new("report", s, outputs).write(&s.out_dir.join("manifest.json"))?;
    println!("report -> {}", s.out_dir.display());
    Ok(())
}
