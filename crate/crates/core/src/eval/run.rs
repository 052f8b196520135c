//! The evaluation loop and record persistence.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::adapter::ModelAdapter;
use super::{score, EvalRecord, Outcome, EVAL_SCHEMA_VERSION};
use crate::encoding::{
    parse_cnf_answer, parse_decision_answer, parse_latex_cnf, parse_menu_answer, render,
    EncodingError, Format, ParsedAnswer, Rendering, Variant,
};
use crate::generate::Instance;
use crate::solver::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub format: Format,
    pub variant: Variant,
    pub shots: usize,
    /// Maximum number of requests in flight.
    pub parallelism: usize,
    /// Parent seed of the per-instance menu vocabularies.
    pub vocab_seed: u64,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("record file line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
    #[error("record file line {line} belongs to a different run: {reason}")]
    ForeignRecord { line: usize, reason: String },
    #[error("dataset contains instance id {0} more than once")]
    DuplicateInstance(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

/// Reads a JSON Lines record file. A final line without its newline that does
/// not parse is taken to be an interrupted write and dropped.
pub fn read_records(path: &Path) -> Result<Vec<EvalRecord>, EvalError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut records = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let last = i + 1 == lines.len();
        let parsed = serde_json::from_str::<VersionProbe>(line).and_then(|probe| {
            Ok((probe.schema_version, serde_json::from_str::<EvalRecord>(line)?))
        });
        match parsed {
            Ok((EVAL_SCHEMA_VERSION, record)) => records.push(record),
            Ok((found, _)) => {
                return Err(EvalError::CorruptRecord {
                    line: i + 1,
                    reason: format!("schema version {found}, expected {EVAL_SCHEMA_VERSION}"),
                })
            }
            Err(_) if last && !complete => break,
            Err(e) => {
                return Err(EvalError::CorruptRecord {
                    line: i + 1,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(records)
}

/// Replaces `path` with `records`, one JSON object per line.
pub fn write_records(records: &[EvalRecord], path: &Path) -> Result<(), EvalError> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let file = File::create(&tmp).map_err(io_error(&tmp))?;
        let mut w = BufWriter::new(file);
        for r in records {
            let line = serde_json::to_string(r).expect("records serialize");
            writeln!(w, "{line}").map_err(io_error(&tmp))?;
        }
        w.flush().map_err(io_error(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_error(path))
}

fn interpret(
    inst: &Instance,
    rendering: &Rendering,
    variant: Variant,
    text: &str,
) -> (ParsedAnswer, Option<String>) {
    let mapping = rendering.mapping.as_ref();
    let parsed = match (rendering.format, variant) {
        (Format::SatTranslate, _) => {
            let mapping = mapping.expect("translate renderings carry a mapping");
            let formula = match parse_latex_cnf(text, mapping) {
                Ok(f) => f,
                Err(e) => return (ParsedAnswer::Unparseable(e.to_string()), Some(e.to_string())),
            };
            let searched = match solve(&formula).witness {
                Some(w) => ParsedAnswer::Assignment(w),
                None => ParsedAnswer::Unsat,
            };
            match variant {
                Variant::Decision => searched.as_decision(),
                Variant::Search => searched,
            }
        }
        (_, Variant::Decision) => parse_decision_answer(text),
        (Format::SatCnf, Variant::Search) => parse_cnf_answer(text, inst.formula.num_vars()),
        (Format::SatMenu, Variant::Search) => {
            parse_menu_answer(text, mapping.expect("menu renderings carry a mapping"))
        }
    };
    (parsed, None)
}

fn evaluate_one(
    inst: &Instance,
    rendering: &Rendering,
    adapter: &dyn ModelAdapter,
    variant: Variant,
) -> EvalRecord {
    let base = |raw: String, parsed, verdict, tokens: (u64, u64, bool), latency, error| EvalRecord {
        schema_version: EVAL_SCHEMA_VERSION,
        instance_id: inst.id.clone(),
        adapter: adapter.name().to_string(),
        format: rendering.format,
        variant,
        shots: rendering.shots,
        prompt_text: rendering.prompt_text.clone(),
        raw_response: raw,
        parsed,
        verdict,
        prompt_tokens: tokens.0,
        completion_tokens: tokens.1,
        tokens_approximate: tokens.2,
        latency,
        error,
    };
    match adapter.complete(&rendering.prompt()) {
        Err(e) => base(
            String::new(),
            ParsedAnswer::Unparseable("no response".into()),
            Outcome::TransportError,
            (0, 0, true),
            0.0,
            Some(e.to_string()),
        ),
        Ok(c) => {
            let (parsed, error) = interpret(inst, rendering, variant, &c.text);
            let verdict = score(inst, &parsed, variant);
            base(
                c.text,
                parsed,
                verdict,
                (c.prompt_tokens, c.completion_tokens, c.tokens_approximate),
                c.latency,
                error,
            )
        }
    }
}

/// Evaluates `adapter` on every instance of `dataset` and persists the records
/// to `out_path`.
///
/// Records already present in `out_path` are kept and their instances skipped,
/// except transport failures, which are retried. Each new record is appended
/// as soon as it is scored; when the run completes the file is rewritten in
/// dataset order, so its bytes do not depend on thread scheduling. The
/// returned records are in dataset order as well.
pub fn run_eval(
    dataset: &[Instance],
    adapter: &dyn ModelAdapter,
    opts: &EvalOptions,
    out_path: &Path,
) -> Result<Vec<EvalRecord>, EvalError> {
    let mut order = HashMap::with_capacity(dataset.len());
    for (i, inst) in dataset.iter().enumerate() {
        if order.insert(inst.id.as_str(), i).is_some() {
            return Err(EvalError::DuplicateInstance(inst.id.clone()));
        }
    }
    let render_variant = match opts.format {
        Format::SatTranslate => Variant::Search,
        _ => opts.variant,
    };
    let renderings: Vec<Rendering> = dataset
        .par_iter()
        .map(|inst| render(inst, opts.format, render_variant, opts.shots, opts.vocab_seed))
        .collect::<Result<_, _>>()?;

    let mut slots: Vec<Option<EvalRecord>> = vec![None; dataset.len()];
    if out_path.exists() {
        for (line, record) in read_records(out_path)?.into_iter().enumerate() {
            let foreign = |reason: String| EvalError::ForeignRecord { line: line + 1, reason };
            let Some(&i) = order.get(record.instance_id.as_str()) else {
                return Err(foreign(format!("instance {} is not in the dataset", record.instance_id)));
            };
            if record.adapter != adapter.name()
                || record.format != opts.format
                || record.variant != opts.variant
                || record.shots != renderings[i].shots
            {
                return Err(foreign(format!(
                    "{} {} {} shots={}",
                    record.adapter, record.format, record.variant, record.shots
                )));
            }
            if record.verdict != Outcome::TransportError && slots[i].is_none() {
                slots[i] = Some(record);
            }
        }
    }
    let kept: Vec<EvalRecord> = slots.iter().flatten().cloned().collect();
    write_records(&kept, out_path)?;

    let pending: Vec<usize> = (0..dataset.len()).filter(|&i| slots[i].is_none()).collect();
    let workers = if adapter.single_flight() {
        1
    } else {
        opts.parallelism.max(1)
    }
    .min(pending.len());

    let file = OpenOptions::new()
        .append(true)
        .open(out_path)
        .map_err(io_error(out_path))?;
    let mut writer = BufWriter::new(file);
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let mut write_failure = None;
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, EvalRecord)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, abort, pending, renderings) = (&next, &abort, &pending, &renderings);
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&i) = pending.get(k) else { break };
                let record = evaluate_one(&dataset[i], &renderings[i], adapter, opts.variant);
                if tx.send((i, record)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, record) in rx {
            if write_failure.is_none() {
                let line = serde_json::to_string(&record).expect("records serialize");
                let written = writeln!(writer, "{line}").and_then(|_| writer.flush());
                if let Err(e) = written {
                    abort.store(true, Ordering::Relaxed);
                    write_failure = Some(e);
                }
            }
            slots[i] = Some(record);
        }
    });
    if let Some(e) = write_failure {
        return Err(io_error(out_path)(e));
    }
    drop(writer);

    let records: Vec<EvalRecord> = slots.into_iter().flatten().collect();
    debug_assert_eq!(records.len(), dataset.len());
    let ids: HashSet<&str> = records.iter().map(|r| r.instance_id.as_str()).collect();
    debug_assert_eq!(ids.len(), records.len());
    write_records(&records, out_path)?;
    Ok(records)
}

/// The translate-then-solve pipeline: the model translates the menu
/// preferences into a LaTeX CNF, the solver decides the translation, and the
/// solver's answer is scored against the original instance.
pub fn run_translate_pipeline(
    dataset: &[Instance],
    adapter: &dyn ModelAdapter,
    variant: Variant,
    parallelism: usize,
    vocab_seed: u64,
    out_path: &Path,
) -> Result<Vec<EvalRecord>, EvalError> {
    let opts = EvalOptions {
        format: Format::SatTranslate,
        variant,
        shots: 0,
        parallelism,
        vocab_seed,
    };
    run_eval(dataset, adapter, &opts, out_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Prompt;
    use crate::eval::{rescore, CompletionResult, ScriptedAdapter, TransportError};
    use crate::generate::{generate, GenSpec};
    use std::sync::Mutex;

    fn mixed(per: usize) -> Vec<Instance> {
        let mut v = generate(&GenSpec::new(7, 3.0, per, 1)).unwrap();
        v.extend(generate(&GenSpec::new(7, 4.4, per, 2)).unwrap());
        v.extend(generate(&GenSpec::new(7, 9.0, per, 3)).unwrap());
        v
    }

    fn opts(format: Format, variant: Variant) -> EvalOptions {
        EvalOptions {
            format,
            variant,
            shots: 0,
            parallelism: 4,
            vocab_seed: 9,
        }
    }

    fn accuracy(records: &[EvalRecord]) -> f64 {
        records.iter().filter(|r| r.verdict.is_correct()).count() as f64 / records.len() as f64
    }

    #[test]
    fn oracle_ceiling_every_format_and_variant() {
        let data = mixed(10);
        let dir = tempfile::tempdir().unwrap();
        for format in Format::ALL {
            for variant in Variant::ALL {
                let path = dir.path().join(format!("{format}-{variant}.jsonl"));
                let records = run_eval(&data, &ScriptedAdapter::oracle(), &opts(format, variant), &path).unwrap();
                assert_eq!(records.len(), data.len());
                assert_eq!(accuracy(&records), 1.0, "{format} {variant}");
                assert_eq!(read_records(&path).unwrap(), records);
            }
        }
    }

    #[test]
    fn constant_yes_scores_the_sat_fraction() {
        let data = mixed(20);
        let dir = tempfile::tempdir().unwrap();
        let records = run_eval(
            &data,
            &ScriptedAdapter::constant("yes"),
            &opts(Format::SatCnf, Variant::Decision),
            &dir.path().join("r.jsonl"),
        )
        .unwrap();
        let sat = data.iter().filter(|i| i.label.is_sat()).count();
        assert_eq!(records.iter().filter(|r| r.verdict.is_correct()).count(), sat);
    }

    #[test]
    fn output_is_independent_of_parallelism_and_rescoring_is_exact() {
        let data = mixed(10);
        let dir = tempfile::tempdir().unwrap();
        let noisy = ScriptedAdapter::noisy(0.5, 4).unwrap();
        let mut o = opts(Format::SatMenu, Variant::Search);
        let a = dir.path().join("a.jsonl");
        run_eval(&data, &noisy, &o, &a).unwrap();
        o.parallelism = 1;
        let b = dir.path().join("b.jsonl");
        run_eval(&data, &noisy, &o, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        for (r, inst) in read_records(&a).unwrap().iter().zip(&data) {
            assert_eq!(rescore(r, inst), r.verdict);
        }
    }

    #[test]
    fn resume_skips_persisted_records_and_tolerates_truncation() {
        let data = mixed(10);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let o = opts(Format::SatCnf, Variant::Search);
        let full = run_eval(&data, &ScriptedAdapter::oracle(), &o, &path).unwrap();
        let reference = fs::read(&path).unwrap();

        // Simulate an interruption: keep 12 records and half of the 13th line.
        let text = String::from_utf8(reference.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let mut cut = lines[..12].join("\n");
        cut.push('\n');
        cut.push_str(&lines[12][..lines[12].len() / 2]);
        fs::write(&path, cut).unwrap();

        let counting = Counting::default();
        let resumed = run_eval(&data, &counting, &o, &path).unwrap();
        assert_eq!(*counting.calls.lock().unwrap(), data.len() - 12);
        assert_eq!(resumed, full);
        assert_eq!(fs::read(&path).unwrap(), reference);
    }

    #[test]
    fn foreign_and_corrupt_files_are_rejected() {
        let data = mixed(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        run_eval(&data, &ScriptedAdapter::oracle(), &opts(Format::SatCnf, Variant::Search), &path).unwrap();
        assert!(matches!(
            run_eval(&data, &ScriptedAdapter::oracle(), &opts(Format::SatMenu, Variant::Search), &path),
            Err(EvalError::ForeignRecord { line: 1, .. })
        ));
        fs::write(&path, "{\"schema_version\": 1}\n{}\n").unwrap();
        assert!(matches!(read_records(&path), Err(EvalError::CorruptRecord { line: 1, .. })));
        let mut bumped = serde_json::to_value(&run_eval(&data, &ScriptedAdapter::oracle(), &opts(Format::SatCnf, Variant::Search), &dir.path().join("x.jsonl")).unwrap()[0]).unwrap();
        bumped["schema_version"] = 99.into();
        fs::write(&path, format!("{bumped}\n")).unwrap();
        assert!(matches!(read_records(&path), Err(EvalError::CorruptRecord { reason, .. }) if reason.contains("99")));
    }

    #[test]
    fn transport_failures_are_recorded_then_retried_on_resume() {
        let data = mixed(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let o = opts(Format::SatCnf, Variant::Decision);
        let records = run_eval(&data, &Failing, &o, &path).unwrap();
        assert!(records.iter().all(|r| r.verdict == Outcome::TransportError && r.error.is_some()));
        assert_eq!(accuracy(&records), 0.0);

        struct Renamed(ScriptedAdapter);
        impl ModelAdapter for Renamed {
            fn name(&self) -> &str {
                "failing"
            }
            fn complete(&self, p: &Prompt) -> Result<CompletionResult, TransportError> {
                self.0.complete(p)
            }
        }
        let healed = run_eval(&data, &Renamed(ScriptedAdapter::oracle()), &o, &path).unwrap();
        assert_eq!(accuracy(&healed), 1.0);
    }

    #[test]
    fn unwritable_output_is_fatal() {
        let data = mixed(1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing-dir").join("r.jsonl");
        assert!(matches!(
            run_eval(&data, &ScriptedAdapter::oracle(), &opts(Format::SatCnf, Variant::Search), &path),
            Err(EvalError::Io { .. })
        ));
    }

    #[test]
    fn translate_pipeline_failures() {
        let data = mixed(4);
        let dir = tempfile::tempdir().unwrap();
        let broken = ScriptedAdapter::constant("(naan \\lor");
        let records =
            run_translate_pipeline(&data, &broken, Variant::Search, 2, 1, &dir.path().join("t.jsonl")).unwrap();
        assert!(records.iter().all(|r| r.verdict == Outcome::Unparseable && r.error.is_some()));

        // A translator that drops the last clause can turn an UNSAT instance SAT.
        // All eight sign patterns over three variables: every clause is needed.
        let mut unsat = generate(&GenSpec::new(3, 8.0 / 3.0, 1, 5)).unwrap();
        let all: Vec<Vec<i32>> = (0..8)
            .map(|m: i32| (0..3).map(|b| if m >> b & 1 == 1 { b + 1 } else { -(b + 1) }).collect())
            .collect();
        unsat[0].formula = crate::cnf::CnfFormula::from_ints(3, &all).unwrap();
        unsat[0].label = crate::solver::Verdict::Unsat;
        let faithful =
            run_translate_pipeline(&unsat, &ScriptedAdapter::oracle(), Variant::Decision, 1, 1, &dir.path().join("o.jsonl"))
                .unwrap();
        assert_eq!(faithful[0].verdict, Outcome::Correct);
        let dropped =
            run_translate_pipeline(&unsat, &DropLast, Variant::Decision, 1, 1, &dir.path().join("d.jsonl")).unwrap();
        assert_eq!(dropped[0].verdict, Outcome::Incorrect);
        assert_eq!(dropped[0].parsed, ParsedAnswer::DecisionYes);
        assert!(matches!(
            run_eval(&data, &broken, &EvalOptions { shots: 3, ..opts(Format::SatTranslate, Variant::Search) }, &dir.path().join("e.jsonl")),
            Err(EvalError::Encoding(EncodingError::UnsupportedTranslateOptions))
        ));
    }

    #[derive(Default)]
    struct Counting {
        calls: Mutex<usize>,
    }

    impl ModelAdapter for Counting {
        fn name(&self) -> &str {
            "scripted_oracle"
        }
        fn complete(&self, p: &Prompt) -> Result<CompletionResult, TransportError> {
            *self.calls.lock().unwrap() += 1;
            ScriptedAdapter::oracle().complete(p)
        }
    }

    struct Failing;

    impl ModelAdapter for Failing {
        fn name(&self) -> &str {
            "failing"
        }
        fn complete(&self, _: &Prompt) -> Result<CompletionResult, TransportError> {
            Err(TransportError::EndpointUnreachable {
                attempts: 1,
                reason: "offline".into(),
            })
        }
    }

    /// Translates correctly, then forgets the final clause.
    struct DropLast;

    impl ModelAdapter for DropLast {
        fn name(&self) -> &str {
            "drop_last"
        }
        fn complete(&self, p: &Prompt) -> Result<CompletionResult, TransportError> {
            let mut c = ScriptedAdapter::oracle().complete(p)?;
            if let Some(cut) = c.text.rfind(" \\land ") {
                c.text.truncate(cut);
            }
            Ok(c)
        }
    }
}
