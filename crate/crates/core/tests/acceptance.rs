//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Criterion 10 re-runs criteria 1 to 9 from scratch with the same seeds and
//! compares every deterministic artifact they produced byte for byte.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use satphase::cnf::Status;
use satphase::count::count_instances;
use satphase::encoding::{latex_translation, parse_latex_cnf, parse_preferences, render_menu, INPUT_MARKER};
use satphase::eval::{run_eval, EvalOptions, ModelAdapter, ScriptedAdapter};
use satphase::generate::{
    cell_seed, generate, generate_grid, paper_dataset_grid, paper_grid_row, sample_formulas, write_dataset,
};
use satphase::metrics::{accuracy_vs_alpha, confusion, tokens_vs_alpha, ConfusionMatrix};
use satphase::{
    count_models, hardness_profile, solve, CnfFormula, EvalRecord, Format, GenSpec, GridCell, HardBand, Instance,
    MetricSeries, Outcome, ParsedAnswer, Point, Variant,
};
use sha2::{Digest, Sha256};

const SEED: u64 = 7;
/// Two-sided 99% normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

type CriterionResult = Result<String, String>;

struct Ctx {
    dataset: Option<Vec<Instance>>,
    /// Deterministic artifacts by name, as SHA-256 digests.
    artifacts: BTreeMap<String, String>,
    tmp: tempfile::TempDir,
}

impl Ctx {
    fn new() -> Self {
        Ctx {
            dataset: None,
            artifacts: BTreeMap::new(),
            tmp: tempfile::tempdir().expect("temp dir"),
        }
    }

    fn keep(&mut self, name: &str, bytes: &[u8]) {
        self.artifacts.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
    }

    fn keep_file(&mut self, name: &str, path: &Path) {
        let bytes = std::fs::read(path).expect("artifact readable");
        self.keep(name, &bytes);
    }

    /// The full 200-cell dataset at 300 formulas per α, labelled and counted.
    fn dataset(&mut self) -> &[Instance] {
        if self.dataset.is_none() {
            let mut ds = generate_grid(&paper_dataset_grid(), 300, SEED, HardBand::default()).expect("valid grid");
            count_instances(&mut ds).expect("n within counting ceiling");
            let path = self.tmp.path().join("dataset.jsonl");
            write_dataset(&ds, &path).expect("dataset written");
            self.keep_file("dataset.jsonl", &path);
            self.dataset = Some(ds);
        }
        self.dataset.as_deref().expect("just built")
    }

    fn run(&mut self, name: &str, data: &[Instance], adapter: &dyn ModelAdapter, format: Format, variant: Variant) -> Vec<EvalRecord> {
        let opts = EvalOptions {
            format,
            variant,
            shots: 0,
            parallelism: 8,
            vocab_seed: SEED,
        };
        let path = self.tmp.path().join(format!("{name}.jsonl"));
        let _ = std::fs::remove_file(&path);
        let records = run_eval(data, adapter, &opts, &path).expect("evaluation runs");
        self.keep_file(&format!("{name}.jsonl"), &path);
        records
    }
}

fn check(ok: bool, detail: String) -> CriterionResult {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn crossover(ctx: &mut Ctx) -> CriterionResult {
    let cells = paper_grid_row(10).expect("n=10 row");
    let start = Instant::now();
    let points: Vec<Point> = cells
        .iter()
        .map(|cell| {
            let inst = generate(&GenSpec::new(10, cell.alpha, 300, cell_seed(SEED, cell))).expect("valid spec");
            let sat = inst.iter().filter(|i| i.label.is_sat()).count();
            Point {
                x: cell.alpha,
                y: sat as f64 / inst.len() as f64,
                support: inst.len(),
            }
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let series = MetricSeries {
        label: "n=10 p_sat".into(),
        window: 1,
        points,
    };
    ctx.keep("c1_psat.csv", series.to_csv().as_bytes());
    let low = series.points.iter().filter(|p| p.x <= 2.5).map(|p| p.y).fold(1.0, f64::min);
    let high = series.points.iter().filter(|p| p.x >= 7.0).map(|p| p.y).fold(0.0, f64::max);
    let crossing = series.crossing(0.5);
    let in_band = crossing.is_some_and(|c| (3.8..=4.8).contains(&c));
    check(
        low >= 0.95 && high <= 0.05 && in_band && elapsed <= 300.0,
        format!(
            "min P(SAT) at α≤2.5 = {low:.3} (≥0.95), max P(SAT) at α≥7 = {high:.3} (≤0.05), \
             0.5 crossing at α = {} (in [3.8, 4.8]), {elapsed:.1}s single-threaded (≤300s)",
            crossing.map_or("none".into(), |c| format!("{c:.3}"))
        ),
    )
}

fn hardness_peak(ctx: &mut Ctx) -> CriterionResult {
    let alphas = [2.0, 3.0, 4.0, 4.3, 4.6, 5.0, 6.0, 8.0];
    let grid: Vec<GridCell> = alphas.iter().map(|&alpha| GridCell { n: 20, alpha }).collect();
    let start = Instant::now();
    let rows = hardness_profile(&grid, 100, SEED).expect("profile runs");
    let elapsed = start.elapsed().as_secs_f64();
    let series = MetricSeries {
        label: "n=20 mean_decisions".into(),
        window: 1,
        points: rows
            .iter()
            .map(|r| Point {
                x: r.alpha,
                y: r.mean_decisions,
                support: r.samples,
            })
            .collect(),
    };
    ctx.keep("c2_decisions.csv", series.to_csv().as_bytes());
    let peak = rows.iter().max_by(|a, b| a.mean_decisions.total_cmp(&b.mean_decisions)).expect("rows");
    let at = |a: f64| rows.iter().find(|r| r.alpha == a).expect("grid α").mean_decisions;
    let (lo, hi) = (at(2.0), at(8.0));
    check(
        (4.0..=5.0).contains(&peak.alpha) && peak.mean_decisions >= 1.5 * lo && peak.mean_decisions >= 1.5 * hi && elapsed <= 600.0,
        format!(
            "peak {:.2} decisions at α = {} (in [4.0, 5.0]); α=2: {lo:.2}, α=8: {hi:.2} (peak ≥1.5× both); {elapsed:.1}s (≤600s)",
            peak.mean_decisions, peak.alpha
        ),
    )
}

fn brute_force_count(f: &CnfFormula) -> u64 {
    (0..1u64 << f.num_vars()).filter(|&mask| f.eval_mask(mask)).count() as u64
}

fn soundness(ctx: &mut Ctx) -> CriterionResult {
    let alphas = [1.0, 2.0, 3.0, 3.5, 4.0, 4.3, 5.0, 6.0, 8.0, 10.0];
    let mut total = 0;
    let mut failures = Vec::new();
    let mut digest = String::new();
    for n in 3..=12u32 {
        for &alpha in &alphas {
            let cell = GridCell { n, alpha };
            let spec = GenSpec::new(n, alpha, 20, cell_seed(SEED ^ 0x50_d4, &cell));
            for f in sample_formulas(&spec).expect("valid spec") {
                total += 1;
                let truth = brute_force_count(&f);
                let solved = solve(&f);
                let counted = count_models(&f).expect("n ≤ 12").model_count;
                let witness_ok = solved
                    .witness
                    .as_ref()
                    .is_none_or(|w| f.evaluate(w) == Status::Satisfied);
                if solved.verdict.is_sat() != (truth > 0) || counted != truth || !witness_ok {
                    failures.push(format!("n={n} α={alpha}: truth {truth}, counted {counted}, {:?}", solved.verdict));
                }
                digest.push_str(&format!("{} {counted} {:?}\n", solved.verdict, solved.stats.counters()));
            }
        }
    }
    ctx.keep("c3_results.txt", digest.as_bytes());
    check(
        total == 2000 && failures.is_empty(),
        format!(
            "{total} instances, {} disagreements with 2^n enumeration{}",
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(" (first: {f})"))
        ),
    )
}

fn dataset_stats(ctx: &mut Ctx) -> CriterionResult {
    let start = Instant::now();
    let ds = ctx.dataset();
    let elapsed = start.elapsed().as_secs_f64();
    let sat = ds.iter().filter(|i| i.label.is_sat()).count();
    let frac = sat as f64 / ds.len() as f64;
    let max_m = ds.iter().map(|i| i.m).max().unwrap_or(0);
    let argmax_ok = ds.iter().filter(|i| i.m == max_m).all(|i| i.n == 10 && i.alpha == 11.0);
    check(
        ds.len() == 60_000 && (frac - 0.665).abs() <= 0.02 && max_m == 110 && argmax_ok && elapsed <= 1800.0,
        format!(
            "{} instances (=60000), SAT fraction {:.4} ({sat} SAT; 0.665 ± 0.02), max m = {max_m} at n=10 α=11: {argmax_ok} (=110), {elapsed:.1}s (≤1800s)",
            ds.len(),
            frac
        ),
    )
}

fn ratio_caps(ctx: &mut Ctx) -> CriterionResult {
    let ds = ctx.dataset();
    let max_ratio = |hard: bool| {
        ds.iter()
            .filter(|i| i.label.is_sat() && i.region.is_hard() == hard)
            .filter_map(Instance::sat_ratio)
            .fold(0.0, f64::max)
    };
    let (hard, easy) = (max_ratio(true), max_ratio(false));
    let detail = format!("max SAT ratio Hard = {hard:.4} (0.4 ± 0.1), Easy = {easy:.4} (0.62 ± 0.1)");
    ctx.keep("c5_caps.txt", detail.as_bytes());
    check((hard - 0.4).abs() <= 0.1 && (easy - 0.62).abs() <= 0.1, detail)
}

fn sorted_clauses(f: &CnfFormula) -> Vec<Vec<i32>> {
    f.to_ints()
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect()
}

fn sample(ds: &[Instance], k: usize) -> Vec<Instance> {
    let stride = ds.len() / k;
    ds.iter().step_by(stride).take(k).cloned().collect()
}

fn round_trips(ctx: &mut Ctx) -> CriterionResult {
    let insts = sample(ctx.dataset(), 1000);
    let (mut menu_fail, mut latex_fail) = (0, 0);
    let mut digest = String::new();
    for inst in &insts {
        let r = render_menu(inst, Variant::Search, 0, SEED).expect("renders");
        let mapping = r.mapping.as_ref().expect("menu mapping");
        let tail = r.user_message.rsplit(INPUT_MARKER).next().expect("input section");
        match parse_preferences(tail, mapping) {
            Ok(f) if sorted_clauses(&f) == sorted_clauses(&inst.formula) => {}
            _ => menu_fail += 1,
        }
        let latex = latex_translation(&inst.formula, mapping);
        match parse_latex_cnf(&latex, mapping) {
            Ok(f) if f.clause_set() == inst.formula.clause_set() => {}
            _ => latex_fail += 1,
        }
        digest.push_str(&r.prompt_text);
        digest.push_str(&latex);
    }
    ctx.keep("c6_renderings.txt", digest.as_bytes());
    check(
        insts.len() == 1000 && menu_fail == 0 && latex_fail == 0,
        format!("{} instances: {menu_fail} menu re-parse failures, {latex_fail} LaTeX re-parse failures", insts.len()),
    )
}

fn accuracy(records: &[EvalRecord]) -> f64 {
    records.iter().filter(|r| r.verdict.is_correct()).count() as f64 / records.len() as f64
}

fn oracle_ceiling(ctx: &mut Ctx) -> CriterionResult {
    let insts = sample(ctx.dataset(), 500);
    let oracle = ScriptedAdapter::oracle();
    let mut parts = Vec::new();
    let mut all = true;
    for format in Format::ALL {
        for variant in Variant::ALL {
            let records = ctx.run(&format!("c7_{format}_{variant}"), &insts, &oracle, format, variant);
            let acc = accuracy(&records);
            all &= records.len() == 500 && acc == 1.0;
            parts.push(format!("{format}/{variant} {acc:.4}"));
        }
    }
    check(all, format!("500 instances: {}", parts.join(", ")))
}

fn within_ci(p_hat: f64, p: f64, n: u64) -> bool {
    (p_hat - p).abs() <= Z99 * (p * (1.0 - p) / n as f64).sqrt()
}

fn scoring(ctx: &mut Ctx) -> CriterionResult {
    let ds = ctx.dataset().to_vec();
    let sat_fraction = ds.iter().filter(|i| i.label.is_sat()).count() as f64 / ds.len() as f64;
    let yes = ctx.run("c8_constant_yes", &ds, &ScriptedAdapter::constant("yes"), Format::SatCnf, Variant::Decision);
    let yes_acc = accuracy(&yes);

    let noisy = ScriptedAdapter::noisy(0.8, SEED).expect("valid p");
    let records = ctx.run("c8_noisy", &ds, &noisy, Format::SatCnf, Variant::Decision);
    let m = confusion(&records, &ds).map_err(|e| e.to_string())?;
    ctx.keep("c8_confusion.csv", m.to_csv().as_bytes());
    let n = m.normalized();
    let support = |t: usize| m.counts[t].iter().sum::<u64>();
    let (sat_ok, unsat_ok) = (within_ci(n[0][0], 0.8, support(0)), within_ci(n[1][1], 0.8, support(1)));
    check(
        yes_acc == sat_fraction && sat_ok && unsat_ok,
        format!(
            "constant yes accuracy {yes_acc:.6} vs SAT fraction {sat_fraction:.6} (exact); noisy p=0.8 diagonal \
             SAT {:.4} (n={}), UNSAT {:.4} (n={}), 99% CI half-widths {:.4}/{:.4}",
            n[0][0],
            support(0),
            n[1][1],
            support(1),
            Z99 * (0.16 / support(0) as f64).sqrt(),
            Z99 * (0.16 / support(1) as f64).sqrt()
        ),
    )
}

fn fixture_record(inst: &Instance, correct: bool, tokens: u64) -> EvalRecord {
    EvalRecord {
        schema_version: satphase::eval::EVAL_SCHEMA_VERSION,
        instance_id: inst.id.clone(),
        adapter: "fixture".into(),
        format: Format::SatCnf,
        variant: Variant::Decision,
        shots: 0,
        prompt_text: String::new(),
        raw_response: String::new(),
        parsed: ParsedAnswer::Unparseable("fixture".into()),
        verdict: if correct { Outcome::Correct } else { Outcome::Incorrect },
        prompt_tokens: 0,
        completion_tokens: tokens,
        tokens_approximate: false,
        latency: 0.0,
        error: None,
    }
}

fn metrics_fixtures(ctx: &mut Ctx) -> CriterionResult {
    let mut insts = Vec::new();
    for (k, alpha) in [1.0, 2.0, 3.0, 4.0].into_iter().enumerate() {
        insts.extend(generate(&GenSpec::new(5, alpha, 5, k as u64)).expect("valid spec"));
    }
    let correct = [true, true, false, false];
    let tokens = [10, 20, 30, 40];
    let records: Vec<EvalRecord> = insts
        .iter()
        .enumerate()
        .map(|(i, inst)| fixture_record(inst, correct[i / 5], tokens[i / 5]))
        .collect();
    let acc = accuracy_vs_alpha(&records, &insts, 4).map_err(|e| e.to_string())?;
    let tok = tokens_vs_alpha(&records, &insts, 4).map_err(|e| e.to_string())?;
    let acc_ok = acc.points == vec![Point { x: 2.5, y: 0.5, support: 20 }];
    let tok_ok = tok.points == vec![Point { x: 2.5, y: 25.0, support: 20 }];
    let raw = accuracy_vs_alpha(&records, &insts, 1).map_err(|e| e.to_string())?;
    let raw_ok = raw.points.iter().map(|p| p.y).collect::<Vec<_>>() == vec![1.0, 1.0, 0.0, 0.0];

    let stable = [&acc, &tok, &raw].iter().all(|s| {
        let text = s.to_csv();
        MetricSeries::from_csv(&text).is_ok_and(|back| back == **s && back.to_csv() == text)
    });
    ctx.keep("c9_accuracy.csv", acc.to_csv().as_bytes());
    ctx.keep("c9_tokens.csv", tok.to_csv().as_bytes());

    let m = ConfusionMatrix {
        counts: [[37, 11, 5], [13, 29, 3]],
    };
    let sums_ok = m.normalized().iter().all(|row| (row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    check(
        acc_ok && tok_ok && raw_ok && stable && sums_ok,
        format!(
            "window-4 accuracy {:?} (=2.5, 0.5, 20): {acc_ok}; tokens {:?} (=25): {tok_ok}; window-1 identity: {raw_ok}; \
             CSV byte-stable: {stable}; normalized rows sum to 1 ± 1e-12: {sums_ok}",
            acc.points.first().map(|p| (p.x, p.y, p.support)),
            tok.points.first().map(|p| p.y)
        ),
    )
}

type Criterion = (u8, &'static str, fn(&mut Ctx) -> CriterionResult);

const CRITERIA: [Criterion; 9] = [
    (1, "phase-transition crossover", crossover),
    (2, "hardness peak", hardness_peak),
    (3, "solver and counter soundness", soundness),
    (4, "dataset statistics", dataset_stats),
    (5, "satisfiability-ratio caps", ratio_caps),
    (6, "encoding round-trips", round_trips),
    (7, "oracle ceiling", oracle_ceiling),
    (8, "scoring arithmetic", scoring),
    (9, "metrics fixtures", metrics_fixtures),
];

fn run_one(ctx: &mut Ctx, f: fn(&mut Ctx) -> CriterionResult) -> CriterionResult {
    catch_unwind(AssertUnwindSafe(|| f(ctx))).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn report(id: u8, name: &str, outcome: &CriterionResult) -> bool {
    let (tag, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("acceptance {id:>2} {name}: {tag} | {detail}");
    outcome.is_ok()
}

fn main() {
    // `cargo test` forwards its own flags; only `--list` needs an answer.
    if std::env::args().any(|a| a == "--list") {
        for (id, name, _) in CRITERIA {
            println!("criterion {id} {name}: test");
        }
        println!("criterion 10 reproducibility: test");
        return;
    }
    let mut first = Ctx::new();
    let mut all_ok = true;
    for (id, name, f) in CRITERIA {
        let outcome = run_one(&mut first, f);
        all_ok &= report(id, name, &outcome);
    }

    let mut second = Ctx::new();
    for (_, _, f) in CRITERIA {
        let _ = run_one(&mut second, f);
    }
    let differing: Vec<&String> = first
        .artifacts
        .iter()
        .filter(|(k, v)| second.artifacts.get(*k) != Some(v))
        .map(|(k, _)| k)
        .collect();
    let same_keys = first.artifacts.len() == second.artifacts.len();
    let outcome = check(
        differing.is_empty() && same_keys,
        format!(
            "{} artifacts compared across two runs, {} differ{}",
            first.artifacts.len(),
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(": {differing:?}") }
        ),
    );
    all_ok &= report(10, "reproducibility", &outcome);
    if !all_ok {
        std::process::exit(1);
    }
}
