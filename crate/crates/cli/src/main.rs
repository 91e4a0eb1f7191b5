mod config;
mod input;
mod table;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use taac_core::compressor::{compress_with_strategy, extract_signatures, inject_signatures};
use taac_core::eval_harness::{
    ingest_trials, pass_rate_table, quality_curve_fit, quality_retention, signature_report, trial_ancova,
    ErrorClass,
};
use taac_core::perplexity::{category_stats, load_corpus_dir, load_ppl_cache, token_perplexities};
use taac_core::scoring::{load_weight_matrix, sns_score};
use taac_core::statkit::{
    cochran_armitage, cohens_d, cohens_h, estimate_threshold, ks_two_sample, pareto_set, tost_equivalence,
    wilson_interval,
};
use taac_core::taac_engine::{load_quality_curve, taac_compress, TaacOutcome};
use taac_core::task_classifier::profile;
use taac_core::token_model::lex_tokens;
use taac_core::{
    CompressionStrategy, NGramModel, PerplexityProvider, QualityCurve, TaacConfig, TaskType, WeightMatrix,
};

use table::{emit_tables, format_num, Format, Table};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] taac_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}

/// Task-aware prompt compression and evaluation statistics.
#[derive(Debug, Parser)]
#[command(name = "taac", version, arg_required_else_help = true)]
struct Cli {
    /// Output format for tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    /// Decimal places for numeric output (default 4; 3 for Wilson bounds).
    #[arg(long, global = true)]
    precision: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split a prompt into categorized tokens.
    Lex(InputArg),
    /// Per-token perplexity from a trained n-gram model or a cache file.
    #[command(group(ArgGroup::new("source").required(true).args(["model", "cache"])))]
    Ppl {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Per-token semantic necessity scores.
    Score {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Classify a prompt as code, cot or hybrid.
    Classify(InputArg),
    /// Prune a prompt to a fixed keep-ratio.
    Compress {
        #[command(flatten)]
        input: InputArg,
        /// Fraction of non-whitespace tokens to keep, in (0, 1].
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value = "sns", value_parser = parse_strategy)]
        strategy: CompressionStrategy,
        /// Seed for the random strategy.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Prepend def headers that compression removed.
        #[arg(long)]
        inject_signatures: bool,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Quality-gated adaptive compression of a file, or every file in a directory.
    Taac {
        #[command(flatten)]
        input: InputArg,
        /// Config file of `key = value` lines (default: $TAAC_CONFIG).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        q_min: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<CompressionStrategy>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        inject_signatures: bool,
        /// Quality curve JSON (`{"code": [[ratio, quality], ...], ...}`).
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        /// JSON weight overrides, `{"CATEGORY.task": weight}`.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Extract or inject function signatures.
    #[command(subcommand)]
    Signatures(SignaturesCommand),
    /// Corpus analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Reports over recorded trial files.
    #[command(subcommand)]
    Report(ReportCommand),
    /// Statistical tests and effect sizes.
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Debug, Subcommand)]
enum SignaturesCommand {
    /// Print each single-line def header, first occurrence only.
    Extract(InputArg),
    /// Prepend the def headers of `--from` missing from the input.
    Inject {
        #[command(flatten)]
        input: InputArg,
        /// Original uncompressed source.
        #[arg(long)]
        from: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum AnalyzeCommand {
    /// Mean and spread of perplexity per token category, highest first.
    Categories {
        /// Files or directories to pool.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    /// Pass rate with 95% Wilson interval per ratio.
    PassRates { trials: PathBuf },
    /// Baseline vs signature injection contrast and error classes.
    Signature { trials: PathBuf },
    /// Fit quality anchors per task and show retention.
    QualityCurve {
        trials: PathBuf,
        /// Also write the fitted curve as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum StatsCommand {
    /// Wilson score interval.
    Wilson {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Cohen's h between two proportions (`k/n` or decimal).
    H {
        #[arg(long, value_parser = input::proportion)]
        a: f64,
        #[arg(long, value_parser = input::proportion)]
        b: f64,
    },
    /// Cohen's d between two samples (comma list or @file).
    D {
        #[arg(long, value_parser = input::numbers)]
        a: std::vec::Vec<f64>,
        #[arg(long, value_parser = input::numbers)]
        b: std::vec::Vec<f64>,
    },
    /// Cochran-Armitage trend test.
    Trend {
        /// Comma-separated `k/n` per group.
        #[arg(long, value_parser = input::fractions)]
        counts: std::vec::Vec<(u64, u64)>,
        /// Comma-separated group scores.
        #[arg(long, value_parser = input::numbers)]
        scores: std::vec::Vec<f64>,
    },
    /// Two-sample Kolmogorov-Smirnov test.
    Ks {
        #[arg(long, value_parser = input::numbers)]
        a: std::vec::Vec<f64>,
        #[arg(long, value_parser = input::numbers)]
        b: std::vec::Vec<f64>,
    },
    /// ANCOVA of quality on task x ratio with prompt length as covariate.
    Ancova { trials: PathBuf },
    /// Two one-sided tests for equivalence.
    Tost {
        #[arg(long, allow_hyphen_values = true)]
        diff: f64,
        #[arg(long)]
        se: f64,
        #[arg(long)]
        margin: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Lowest ratio whose interpolated quality reaches the floor.
    Threshold {
        /// Comma-separated `ratio:quality` anchors.
        #[arg(long, value_parser = input::pairs)]
        anchors: std::vec::Vec<(f64, f64)>,
        #[arg(long, default_value_t = 0.95)]
        floor: f64,
    },
    /// Pareto labels for `NAME=savings:quality` points.
    Pareto {
        #[arg(required = true, value_parser = input::named_point)]
        points: Vec<(String, (f64, f64))>,
    },
}

#[derive(Debug, Args)]
struct InputArg {
    /// Input file; `-` or absent reads standard input.
    input: Option<PathBuf>,
}

impl InputArg {
    fn read(&self) -> CliResult<String> {
        match self.input.as_deref() {
            None => read_stdin(),
            Some(p) if p == Path::new("-") => read_stdin(),
            Some(p) => fs::read_to_string(p).map_err(io_err(p)),
        }
    }
}

fn read_stdin() -> CliResult<String> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s).map_err(io_err(Path::new("<stdin>")))?;
    Ok(s)
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Directory of training texts for the n-gram model (default: bundled corpus).
    #[arg(long, conflicts_with = "cache")]
    model: Option<PathBuf>,
    /// JSON `{"token index": perplexity}` produced by an external model.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value_t = taac_core::perplexity::DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = taac_core::perplexity::DEFAULT_SMOOTHING_K)]
    smoothing_k: f64,
}

impl ModelArgs {
    fn provider(&self) -> CliResult<Box<dyn PerplexityProvider>> {
        if let Some(cache) = &self.cache {
            return Ok(Box::new(load_ppl_cache(cache)?));
        }
        let dir = self
            .model
            .clone()
            .unwrap_or_else(|| taac_core::fixtures_dir().join("lm_corpus"));
        Ok(Box::new(NGramModel::from_corpus_dir(&dir, self.order, self.smoothing_k)?))
    }
}

#[derive(Debug, Args)]
struct ScoringArgs {
    /// Score as this task type instead of the classified one.
    #[arg(long, value_parser = parse_task)]
    task: Option<TaskType>,
    /// JSON weight overrides, `{"CATEGORY.task": weight}`.
    #[arg(long)]
    weights: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<CompressionStrategy, String> {
    s.parse()
}

fn parse_task(s: &str) -> Result<TaskType, String> {
    s.parse()
}

struct Ctx {
    format: Format,
    precision: Option<usize>,
}

impl Ctx {
    fn precision(&self) -> usize {
        self.precision.unwrap_or(4)
    }

    fn tables(&self, tables: &[Table]) -> CliResult {
        emit_tables(tables, self.format, self.precision()).map_err(stdout_err)
    }

    fn text(&self, s: &str) -> CliResult {
        io::stdout().lock().write_all(s.as_bytes()).map_err(stdout_err)
    }

    fn line(&self, s: &str) -> CliResult {
        self.text(&format!("{s}\n"))
    }

    fn json(&self, v: &serde_json::Value) -> CliResult {
        self.line(&v.to_string())
    }

    /// A single number, bare in TSV mode.
    fn scalar(&self, name: &str, v: f64) -> CliResult {
        match self.format {
            Format::Tsv => self.line(&format_num(v, self.precision())),
            Format::Json => self.json(&serde_json::json!({ name: v })),
        }
    }
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
    let ctx = Ctx {
        format: cli.format,
        precision: cli.precision,
    };
    match run(cli.command, &ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, ctx: &Ctx) -> CliResult {
    match command {
        Command::Lex(input) => lex(&input.read()?, ctx),
        Command::Ppl { input, model } => ppl(&input.read()?, &model, ctx),
        Command::Score { input, model, scoring } => score(&input.read()?, &model, &scoring, ctx),
        Command::Classify(input) => classify(&input.read()?, ctx),
        Command::Compress {
            input,
            ratio,
            strategy,
            seed,
            inject_signatures,
            model,
            scoring,
        } => {
            let source = input.read()?;
            let tokens = lex_tokens(&source);
            let task = match scoring.task {
                Some(t) => t,
                None => profile(&tokens, &Default::default())?.task,
            };
            let weights = load_weight_matrix(scoring.weights.as_deref())?;
            let ppls = match strategy {
                // The random control never looks at perplexity.
                CompressionStrategy::RandomControl => vec![1.0; tokens.len()],
                _ => token_perplexities(model.provider()?.as_ref(), &tokens)?,
            };
            let mut result = compress_with_strategy(&tokens, &ppls, strategy, task, &weights, ratio, seed)?;
            if inject_signatures && !result.is_identity() {
                result = result.inject_signatures_from(&source);
            }
            match ctx.format {
                Format::Tsv => ctx.text(&result.rendered),
                Format::Json => ctx.json(&serde_json::to_value(&result).expect("result serializes")),
            }
        }
        Command::Taac {
            input,
            config,
            q_min,
            lambda,
            delta,
            strategy,
            seed,
            inject_signatures,
            curve,
            model,
            weights,
        } => {
            let mut cfg = config::load(config::resolve_path(config.as_deref()).as_deref())?;
            if let Some(v) = q_min {
                cfg.q_min = v;
            }
            if let Some(v) = lambda {
                cfg.lambda = v;
            }
            if let Some(v) = delta {
                cfg.delta = v;
            }
            if let Some(v) = strategy {
                cfg.strategy = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            cfg.inject_signatures |= inject_signatures;
            cfg.validate()?;
            let curve = match curve {
                Some(p) => load_quality_curve(&p)?,
                None => QualityCurve::default_curve(),
            };
            let weights = load_weight_matrix(weights.as_deref())?;
            taac(&input, &cfg, &curve, &model, &weights, ctx)
        }
        Command::Signatures(SignaturesCommand::Extract(input)) => {
            let sigs = extract_signatures(&input.read()?);
            match ctx.format {
                Format::Tsv => sigs.iter().try_for_each(|s| ctx.line(s)),
                Format::Json => ctx.json(&serde_json::json!({ "signatures": sigs.as_slice() })),
            }
        }
        Command::Signatures(SignaturesCommand::Inject { input, from }) => {
            let compressed = input.read()?;
            let source = fs::read_to_string(&from).map_err(io_err(&from))?;
            ctx.text(&inject_signatures(&compressed, &extract_signatures(&source)))
        }
        Command::Analyze(AnalyzeCommand::Categories { inputs, model }) => categories(&inputs, &model, ctx),
        Command::Report(cmd) => report(cmd, ctx),
        Command::Stats(cmd) => stats(cmd, ctx),
    }
}

fn lex(source: &str, ctx: &Ctx) -> CliResult {
    let mut t = Table::new("tokens", &["index", "start", "end", "category", "text"]);
    for tok in lex_tokens(source) {
        t.push(vec![
            tok.index.into(),
            tok.span.0.into(),
            tok.span.1.into(),
            tok.category.as_str().into(),
            tok.text.into(),
        ]);
    }
    ctx.tables(&[t])
}

fn ppl(source: &str, model: &ModelArgs, ctx: &Ctx) -> CliResult {
    let tokens = lex_tokens(source);
    let ppls = token_perplexities(model.provider()?.as_ref(), &tokens)?;
    let mut t = Table::new("perplexity", &["index", "category", "text", "ppl"]);
    for (tok, p) in tokens.into_iter().zip(ppls) {
        t.push(vec![tok.index.into(), tok.category.as_str().into(), tok.text.into(), p.into()]);
    }
    ctx.tables(&[t])
}

fn score(source: &str, model: &ModelArgs, scoring: &ScoringArgs, ctx: &Ctx) -> CliResult {
    let tokens = lex_tokens(source);
    let task = match scoring.task {
        Some(t) => t,
        None => profile(&tokens, &Default::default())?.task,
    };
    let weights = load_weight_matrix(scoring.weights.as_deref())?;
    let ppls = token_perplexities(model.provider()?.as_ref(), &tokens)?;
    let mut t = Table::new("sns", &["index", "category", "text", "task", "ppl", "weight", "sns"]);
    for (tok, p) in tokens.into_iter().zip(ppls) {
        t.push(vec![
            tok.index.into(),
            tok.category.as_str().into(),
            tok.text.clone().into(),
            task.as_str().into(),
            p.into(),
            weights.weight(tok.category, task).into(),
            sns_score(p, tok.category, task, &weights).into(),
        ]);
    }
    ctx.tables(&[t])
}

fn classify(source: &str, ctx: &Ctx) -> CliResult {
    let p = profile(&lex_tokens(source), &Default::default())?;
    let mut t = Table::new("profile", &["task", "code_signal", "cot_signal"]);
    t.push(vec![p.task.as_str().into(), p.code_signal.into(), p.cot_signal.into()]);
    ctx.tables(&[t])
}

fn taac(
    input: &InputArg,
    cfg: &TaacConfig,
    curve: &QualityCurve,
    model: &ModelArgs,
    weights: &WeightMatrix,
    ctx: &Ctx,
) -> CliResult {
    let provider = model.provider()?;
    let run_one = |text: &str| -> CliResult<TaacOutcome> {
        Ok(taac_compress(text, cfg, curve, provider.as_ref(), weights)?)
    };
    match input.input.as_deref() {
        Some(dir) if dir.is_dir() => {
            if model.cache.is_some() {
                return Err(CliError::Usage("--cache applies to a single input, not a directory".into()));
            }
            let mut t = Table::new(
                "taac",
                &["name", "task", "target_ratio", "achieved_ratio", "predicted_quality", "steps", "signatures_injected"],
            );
            for (name, text) in load_corpus_dir(dir)? {
                let out = run_one(&text)?;
                t.push(vec![
                    name.into(),
                    out.profile.task.as_str().into(),
                    out.target_ratio.into(),
                    out.result.achieved_ratio.into(),
                    out.result.predicted_quality.into(),
                    out.trace.steps.len().into(),
                    out.result.signatures_injected.into(),
                ]);
            }
            ctx.tables(&[t])
        }
        _ => {
            let out = run_one(&input.read()?)?;
            match ctx.format {
                Format::Tsv => ctx.text(&out.result.rendered),
                Format::Json => ctx.json(&serde_json::to_value(&out).expect("outcome serializes")),
            }
        }
    }
}

fn categories(inputs: &[PathBuf], model: &ModelArgs, ctx: &Ctx) -> CliResult {
    let mut files = Vec::new();
    for p in inputs {
        collect_files(p, &mut files)?;
    }
    let texts = files
        .iter()
        .map(|p| fs::read_to_string(p).map_err(io_err(p)))
        .collect::<CliResult<Vec<_>>>()?;
    if model.cache.is_some() && texts.len() != 1 {
        return Err(CliError::Usage("--cache applies to a single input file".into()));
    }
    let provider = model.provider()?;
    let (mut tokens, mut ppls) = (Vec::new(), Vec::new());
    for text in &texts {
        let toks = lex_tokens(text);
        ppls.extend(token_perplexities(provider.as_ref(), &toks)?);
        tokens.extend(toks);
    }
    let stats = category_stats(&tokens, &ppls)?;
    let mut t = Table::new("categories", &["rank", "category", "count", "mean_ppl", "sd_ppl"]);
    for (i, (cat, s)) in stats.ranked().into_iter().enumerate() {
        t.push(vec![(i + 1).into(), cat.as_str().into(), s.count.into(), s.mean.into(), s.std_dev.into()]);
    }
    ctx.tables(&[t])
}

/// Regular files under `path`, depth first, sorted by name at each level.
fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> CliResult {
    if !path.is_dir() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io_err(path))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()
        .map_err(io_err(path))?;
    entries.sort();
    for e in entries {
        collect_files(&e, out)?;
    }
    Ok(())
}

fn report(cmd: ReportCommand, ctx: &Ctx) -> CliResult {
    match cmd {
        ReportCommand::PassRates { trials } => {
            let rows = pass_rate_table(&ingest_trials(&trials)?)?;
            let mut t = Table::new("pass_rates", &["ratio", "passed", "total", "rate", "ci_lower", "ci_upper"]);
            for r in rows {
                t.push(vec![
                    r.ratio.into(),
                    r.passed.into(),
                    r.total.into(),
                    r.rate.into(),
                    r.ci.lower.into(),
                    r.ci.upper.into(),
                ]);
            }
            ctx.tables(&[t])
        }
        ReportCommand::Signature { trials } => {
            let rep = signature_report(&ingest_trials(&trials)?)?;
            let mut contrast = Table::new(
                "signature_contrast",
                &[
                    "ratio",
                    "baseline_passed",
                    "baseline_total",
                    "baseline_rate",
                    "injection_passed",
                    "injection_total",
                    "injection_rate",
                    "delta_pp",
                    "cohens_h",
                ],
            );
            for c in rep.per_ratio.iter().chain([&rep.pooled]) {
                let label = match c.ratio {
                    Some(r) => format_num(r, 2),
                    None => "pooled".into(),
                };
                contrast.push(vec![
                    label.into(),
                    c.baseline_passed.into(),
                    c.baseline_total.into(),
                    c.baseline_rate.into(),
                    c.injection_passed.into(),
                    c.injection_total.into(),
                    c.injection_rate.into(),
                    c.delta_pp.into(),
                    c.cohens_h.into(),
                ]);
            }
            let mut errors = Table::new("error_classes", &["condition", "error", "count", "share"]);
            for dist in &rep.errors {
                for class in ErrorClass::FAILURES {
                    errors.push(vec![
                        dist.condition.as_str().into(),
                        class.as_str().into(),
                        (*dist.counts.get(&class).unwrap_or(&0)).into(),
                        dist.share(class).into(),
                    ]);
                }
            }
            ctx.tables(&[contrast, errors])
        }
        ReportCommand::QualityCurve { trials, out } => {
            let curve = quality_curve_fit(&ingest_trials(&trials)?)?;
            if let Some(path) = out {
                fs::write(&path, curve.to_json() + "\n").map_err(io_err(&path))?;
            }
            let mut t = Table::new("quality_curve", &["task", "ratio", "quality", "retention"]);
            for task in curve.tasks().collect::<Vec<_>>() {
                let anchors = curve.anchors(task).unwrap_or_default();
                let retention = quality_retention(&curve, task).ok();
                for (i, &(r, q)) in anchors.iter().enumerate() {
                    let ret = retention.as_ref().map(|v| v[i].1);
                    t.push(vec![task.as_str().into(), r.into(), q.into(), ret.into()]);
                }
            }
            ctx.tables(&[t])
        }
    }
}

fn stats(cmd: StatsCommand, ctx: &Ctx) -> CliResult {
    match cmd {
        StatsCommand::Wilson { k, n, confidence } => {
            let ci = wilson_interval(k, n, confidence)?;
            match ctx.format {
                Format::Tsv => {
                    let p = ctx.precision.unwrap_or(3);
                    ctx.line(&format!("[{}, {}]", format_num(ci.lower, p), format_num(ci.upper, p)))
                }
                Format::Json => ctx.json(&serde_json::to_value(ci).expect("interval serializes")),
            }
        }
        StatsCommand::H { a, b } => ctx.scalar("cohens_h", cohens_h(a, b)?),
        StatsCommand::D { a, b } => {
            let e = cohens_d(&a, &b)?;
            let mut t = Table::new("cohens_d", &["d", "standard_error", "ci_lower", "ci_upper"]);
            t.push(vec![e.d.into(), e.standard_error.into(), e.ci_lower.into(), e.ci_upper.into()]);
            ctx.tables(&[t])
        }
        StatsCommand::Trend { counts, scores } => {
            let (succ, trials): (Vec<u64>, Vec<u64>) = counts.into_iter().unzip();
            let r = cochran_armitage(&succ, &trials, &scores)?;
            let mut t = Table::new("trend", &["z", "p"]);
            t.push(vec![r.z.into(), r.p.into()]);
            ctx.tables(&[t])
        }
        StatsCommand::Ks { a, b } => {
            let r = ks_two_sample(&a, &b)?;
            let mut t = Table::new("ks", &["d", "p"]);
            t.push(vec![r.d.into(), r.p.into()]);
            ctx.tables(&[t])
        }
        StatsCommand::Ancova { trials } => {
            let table = trial_ancova(&ingest_trials(&trials)?)?;
            let mut t = Table::new("ancova", &["source", "ss", "df", "ms", "f", "p", "partial_eta_sq"]);
            for r in table.rows {
                t.push(vec![
                    r.source.label().into(),
                    r.ss.into(),
                    r.df.into(),
                    r.ms.into(),
                    r.f.into(),
                    r.p.into(),
                    r.partial_eta_sq.into(),
                ]);
            }
            ctx.tables(&[t])
        }
        StatsCommand::Tost { diff, se, margin, alpha } => {
            let r = tost_equivalence(diff, se, margin, alpha)?;
            let mut t = Table::new("tost", &["difference", "margin", "p_lower", "p_upper", "equivalent"]);
            t.push(vec![r.difference.into(), r.margin.into(), r.p_lower.into(), r.p_upper.into(), r.equivalent.into()]);
            ctx.tables(&[t])
        }
        StatsCommand::Threshold { anchors, floor } => ctx.scalar("threshold", estimate_threshold(&anchors, floor)?),
        StatsCommand::Pareto { points } => {
            let coords: Vec<(f64, f64)> = points.iter().map(|(_, p)| *p).collect();
            let labels = pareto_set(&coords);
            let mut t = Table::new("pareto", &["name", "savings", "quality", "strict_pareto", "convex_pareto"]);
            for (i, (name, (s, q))) in points.into_iter().enumerate() {
                t.push(vec![
                    name.into(),
                    s.into(),
                    q.into(),
                    labels.strict_pareto[i].into(),
                    labels.convex_pareto[i].into(),
                ]);
            }
            ctx.tables(&[t])
        }
    }
}
