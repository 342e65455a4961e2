use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde_json::json;

use proscript::aggregation::{predict_edges, AggregationConfig, ScoresFile};
use proscript::baselines::{random_baseline_eval, PolicyKind, RandomPolicy};
use proscript::dataset::{
    agreement_f1, agreement_filter, corpus_stats, load_jsonl, write_jsonl, Corpus, CorpusRecord,
    Source, Split,
};
use proscript::dot::{emit_dot, emit_dot_with_scenario, parse_dot, parse_lenient, scenario_hint};
use proscript::metrics::{
    corpus_report, Convention, EvalItem, EvalReport, GedConfig, ReportConfig,
};
use proscript::{Error, ScriptGraph};

use crate::*;

const DEFAULT_SCENARIO: &str = "script";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn failure(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

/// Unreadable or malformed input exits 2; everything else exits 1.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Json { .. } | Error::Schema { .. } => 2,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<ExitCode> {
    let jobs = cli.jobs.map(usize::from);
    match cli.command {
        Command::Validate(a) => validate(a),
        Command::Eval(a) => eval(a, jobs),
        Command::Aggregate(a) => aggregate(a),
        Command::Baseline(a) => baseline(a, jobs),
        Command::Stats(a) => stats(a),
        Command::Convert(a) => convert(a),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> CliResult<Corpus> {
    let corpus = load_jsonl(path)?;
    for w in &corpus.warnings {
        eprintln!(
            "warning: {}:{}: `{}`: {}",
            path.display(),
            w.line,
            w.id,
            w.message
        );
    }
    Ok(corpus)
}

fn report_quarantine(path: &Path, corpus: &Corpus) {
    for q in &corpus.quarantined {
        let codes: Vec<&str> = q.violations.iter().map(|v| v.code.as_str()).collect();
        eprintln!(
            "warning: {}:{}: record `{}` excluded ({})",
            path.display(),
            q.line,
            q.id,
            codes.join(", ")
        );
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn validate(a: ValidateArgs) -> CliResult<ExitCode> {
    if !(0.0..=100.0).contains(&a.threshold) {
        return Err(CliError::usage("--threshold must lie in [0, 100]"));
    }
    let corpus = load(&a.corpus)?;
    let convention = Convention::from(a.convention);
    let mut rows: Vec<(usize, serde_json::Value)> = Vec::new();
    let mut warnings: Vec<String> = corpus
        .warnings
        .iter()
        .map(|w| format!("line {}: {}", w.line, w.message))
        .collect();
    let (mut kept, mut rejected) = (0, 0);
    for (r, &line) in corpus.records.iter().zip(&corpus.lines) {
        let split = agreement_filter(std::slice::from_ref(r), a.threshold, convention);
        warnings.extend(split.warnings.iter().map(|w| format!("line {line}: {w}")));
        let f1 = agreement_f1(r, convention)
            .ok()
            .map(|s| round2(s.f1_percent()));
        let status = if split.kept.is_empty() {
            rejected += 1;
            "rejected"
        } else {
            kept += 1;
            "kept"
        };
        rows.push((
            line,
            json!({"line": line, "id": r.id, "status": status, "agreement_f1": f1}),
        ));
    }
    for q in &corpus.quarantined {
        rows.push((
            q.line,
            json!({"line": q.line, "id": q.id, "status": "quarantined", "violations": q.violations}),
        ));
    }
    rows.sort_by_key(|r| r.0);
    let ok = corpus.quarantined.is_empty();
    let doc = json!({
        "ok": ok,
        "n_records": rows.len(),
        "kept": kept,
        "rejected": rejected,
        "quarantined": corpus.quarantined.len(),
        "threshold": a.threshold,
        "records": rows.into_iter().map(|r| r.1).collect::<Vec<_>>(),
        "warnings": warnings,
    });
    write_out(None, &serde_json::to_string_pretty(&doc).expect("json"))?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn ged_config(g: &GedArgs) -> GedConfig {
    GedConfig {
        node_match: g.node_match.into(),
        max_exact_nodes: g.ged_node_limit as usize,
        edge_rep_mode: g.edge_rep.into(),
        include_virtual: g.include_virtual,
        approx_beam: g.approx_beam.map(|b| b as usize),
        ..Default::default()
    }
}

fn render(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Tsv => report.to_tsv(),
    }
}

fn dot_files(path: &Path) -> CliResult<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries =
        fs::read_dir(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "dot"))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn eval(a: EvalArgs, jobs: Option<usize>) -> CliResult<ExitCode> {
    let gold = load(&a.gold)?;
    report_quarantine(&a.gold, &gold);
    let mut order: Vec<String> = Vec::new();
    let mut golds: HashMap<String, Vec<ScriptGraph>> = HashMap::new();
    for r in &gold.records {
        let g = r.script()?;
        golds
            .entry(r.id.clone())
            .or_insert_with(|| {
                order.push(r.id.clone());
                Vec::new()
            })
            .push(g);
    }

    let mut problems: Vec<String> = Vec::new();
    let mut preds: HashMap<String, ScriptGraph> = HashMap::new();
    let mut pred_order: Vec<String> = Vec::new();
    let mut add_pred =
        |id: String, g: ScriptGraph, problems: &mut Vec<String>| match preds.entry(id) {
            Entry::Occupied(e) => problems.push(format!("duplicate prediction for `{}`", e.key())),
            Entry::Vacant(e) => {
                pred_order.push(e.key().clone());
                e.insert(g);
            }
        };
    if a.pred.is_dir() || a.pred.extension().is_some_and(|x| x == "dot") {
        for file in dot_files(&a.pred)? {
            let id = stem(&file);
            let text = read(&file)?;
            let scenario = scenario_hint(&text)
                .or_else(|| golds.get(&id).map(|g| g[0].scenario().to_string()))
                .unwrap_or_else(|| DEFAULT_SCENARIO.into());
            match parse_lenient(&text, &scenario) {
                Ok((g, diag)) => {
                    for w in &diag.warnings {
                        eprintln!("warning: {}:{w}", file.display());
                    }
                    add_pred(id, g, &mut problems);
                }
                Err(e) => problems.push(format!("prediction `{id}` could not be parsed: {e}")),
            }
        }
    } else {
        let corpus = load(&a.pred)?;
        report_quarantine(&a.pred, &corpus);
        for r in &corpus.records {
            add_pred(r.id.clone(), r.script()?, &mut problems);
        }
    }

    let mut items = Vec::new();
    for id in &order {
        match preds.remove(id) {
            Some(pred) => items.push(EvalItem {
                id: id.clone(),
                pred,
                golds: golds.remove(id).expect("grouped above"),
            }),
            None => problems.push(format!("missing prediction for `{id}`")),
        }
    }
    for id in pred_order.iter().filter(|id| preds.contains_key(*id)) {
        problems.push(format!("no gold script for prediction `{id}`"));
    }

    let cfg = ReportConfig {
        metric: a.metric.into(),
        convention: a.convention.into(),
        matching: a.matching.into(),
        ged: ged_config(&a.ged),
        jobs,
    };
    let report = corpus_report(&items, &cfg)?;
    write_out(a.output.as_deref(), &render(&report, a.format))?;
    for p in &problems {
        eprintln!("error: {p}");
    }
    Ok(if problems.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn aggregate(a: AggregateArgs) -> CliResult<ExitCode> {
    let cfg = AggregationConfig {
        edge_policy: a.policy.into(),
        tau: a.tau,
        ..Default::default()
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let text = read(&a.scores)?;
    let file: ScoresFile = serde_json::from_str(&text).map_err(|e| {
        CliError::from(Error::Json {
            line: e.line(),
            message: e.to_string(),
        })
    })?;
    let (scenario, events, scores) = file.into_parts()?;
    let scenario = scenario
        .or(a.scenario)
        .unwrap_or_else(|| DEFAULT_SCENARIO.into());
    let g = predict_edges(&events, &scores, &cfg, &scenario)?;
    write_out(a.output.as_deref(), &emit_dot(&g)?)?;
    Ok(ExitCode::SUCCESS)
}

fn baseline(a: BaselineArgs, jobs: Option<usize>) -> CliResult<ExitCode> {
    let kind = match a.policy {
        BaselinePolicyArg::RandomChain => PolicyKind::RandomChain,
        BaselinePolicyArg::RandomDag => PolicyKind::RandomDag {
            p_branch: a.p_branch,
        },
    };
    let policy = RandomPolicy { kind, seed: a.seed };
    policy
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let gold = load(&a.gold)?;
    report_quarantine(&a.gold, &gold);
    let cfg = ReportConfig {
        metric: a.metric.into(),
        convention: a.convention.into(),
        ged: ged_config(&a.ged),
        jobs,
        ..Default::default()
    };
    let report = random_baseline_eval(&gold.records, &policy, &cfg)?;
    write_out(a.output.as_deref(), &render(&report, a.format))?;
    Ok(ExitCode::SUCCESS)
}

fn stats(a: StatsArgs) -> CliResult<ExitCode> {
    let corpus = load(&a.corpus)?;
    report_quarantine(&a.corpus, &corpus);
    let s = corpus_stats(&corpus.records);
    let text = match a.format {
        StatsFormat::Json => s.to_json(),
        StatsFormat::Csv => s.to_csv()?,
    };
    write_out(a.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn safe_id(id: &str) -> bool {
    !id.is_empty() && id != "." && id != ".." && !id.contains(['/', '\\', '\0'])
}

fn convert(a: ConvertArgs) -> CliResult<ExitCode> {
    match (a.from, a.to) {
        (ConvertFormat::Jsonl, ConvertFormat::Dot) => jsonl_to_dot(&a),
        (ConvertFormat::Dot, ConvertFormat::Jsonl) => dot_to_jsonl(&a),
        _ => Err(CliError::usage("--from and --to must differ")),
    }
}

fn jsonl_to_dot(a: &ConvertArgs) -> CliResult<ExitCode> {
    let corpus = load(&a.input)?;
    report_quarantine(&a.input, &corpus);
    fs::create_dir_all(&a.output)
        .map_err(|e| CliError::usage(format!("{}: {e}", a.output.display())))?;
    let mut seen = std::collections::HashSet::new();
    for r in &corpus.records {
        if !safe_id(&r.id) {
            return Err(CliError::failure(format!(
                "record id `{}` is not a usable file name",
                r.id
            )));
        }
        if !seen.insert(r.id.as_str()) {
            return Err(CliError::failure(format!(
                "record id `{}` appears more than once",
                r.id
            )));
        }
        if r.alt_edges.is_some() {
            eprintln!(
                "warning: record `{}`: alt_edges are not carried into DOT",
                r.id
            );
        }
        let path = a.output.join(format!("{}.dot", r.id));
        let text = emit_dot_with_scenario(&r.script()?)? + "\n";
        fs::write(&path, text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn dot_to_jsonl(a: &ConvertArgs) -> CliResult<ExitCode> {
    let source = match a.source {
        SourceArg::Rocstories => Source::Rocstories,
        SourceArg::Descript => Source::Descript,
        SourceArg::Virtualhome => Source::Virtualhome,
        SourceArg::Other => Source::Other,
    };
    let split = match a.split {
        SplitArg::Train => Split::Train,
        SplitArg::Dev => Split::Dev,
        SplitArg::Test => Split::Test,
    };
    let mut records: Vec<CorpusRecord> = Vec::new();
    for file in dot_files(&a.input)? {
        let text = read(&file)?;
        let scenario = scenario_hint(&text)
            .or_else(|| a.scenario.clone())
            .ok_or_else(|| {
                CliError::failure(format!(
                    "{}: no scenario comment; pass --scenario",
                    file.display()
                ))
            })?;
        let g = if a.lenient {
            let (g, diag) = parse_lenient(&text, &scenario)?;
            for w in &diag.warnings {
                eprintln!("warning: {}:{w}", file.display());
            }
            g
        } else {
            parse_dot(&text, &scenario)
                .map_err(|e| CliError::failure(format!("{}: {e}", file.display())))?
        };
        records.push(CorpusRecord::from_script(stem(&file), source, split, &g));
    }
    let mut buf = Vec::new();
    write_jsonl(&records, &mut buf)?;
    fs::write(&a.output, buf)
        .map_err(|e| CliError::usage(format!("{}: {e}", a.output.display())))?;
    Ok(ExitCode::SUCCESS)
}
