//! The `recarena` binary: the pipeline as subcommands over the library.
//!
//! Every command reads an optional JSON run config (`--config`); explicit
//! flags override file values, and commands that produce an output
//! directory echo the effective config back into it as a run manifest.
//!
//! Exit codes: 0 ok, 2 input/config error, 3 judging-quality failure.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arena::{build_report, render_report, ReportFormat, ReportOptions};
use crate::corpus::{
    baseline_recommend, group_by_system, parse_mind, parse_movielens, read_reclists,
    single_system_index, toy, write_reclists, BaselineMethod, Corpus, MovieLensOptions,
};
use crate::error::{Error, Result};
use crate::judge::{
    run_batch, HttpProvider, MockJudge, Provider, ProviderConfig, ProviderMeta, RawJudgment,
    ResponseCache,
};
use crate::metrics::{
    auc_scoped, ndcg_at_k, read_relevance, read_scores, relevance_from_corpus, urd, AucScope,
};
use crate::promptkit::{
    build_absolute_bundle, build_pair_bundle, DimensionRegistry, PromptBundle, PromptOptions,
    PromptTemplate,
};
use crate::verdict::{
    parse_score, parse_verdict, read_verdict_lines, write_verdict_lines, JudgedVerdict,
    JudgmentFailure, Outcome, PairVerdict, ScoreVerdict, VerdictLine,
};

/// List-order debiasing strategy for pairwise judging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DebiasMode {
    /// Single pass, lists shown in the given order.
    None,
    /// Judge twice (original and swapped presentation) and reconcile:
    /// agreement stands, disagreement becomes a tie.
    Swap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Mock,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliJudgeMode {
    Pairwise,
    Absolute,
}

/// Shared run configuration. Serialized form is the `--config` file;
/// the same shape is echoed into output directories as the manifest of
/// effective values after flag overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Canonical corpus JSON path.
    pub corpus: Option<PathBuf>,
    pub provider: ProviderConfig,
    /// Dimension registry JSON; the built-in six dimensions when unset.
    pub registry: Option<PathBuf>,
    /// Prompt template file; the bundled template when unset.
    pub template: Option<PathBuf>,
    /// Recommendation list length.
    pub k: usize,
    /// Judge at most this many users.
    pub sample: Option<usize>,
    pub seed: u64,
    /// HTTP response cache directory.
    pub cache_dir: Option<PathBuf>,
    pub debias: DebiasMode,
    pub output_dir: PathBuf,
    pub max_history: usize,
    pub include_abstracts: bool,
    /// Fraction of received responses that may fail parsing before the
    /// judge command reports a judging-quality failure (exit 3).
    pub unparseable_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            provider: ProviderConfig::default(),
            registry: None,
            template: None,
            k: 5,
            sample: None,
            seed: 0,
            cache_dir: None,
            debias: DebiasMode::None,
            output_dir: PathBuf::from("arena-out"),
            max_history: PromptOptions::default().max_history,
            include_abstracts: false,
            unparseable_threshold: 0.5,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::json(format!("run config {}", path.display()), e))?;
        if config.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&config.unparseable_threshold) {
            return Err(Error::Config(
                "unparseable_threshold must be within [0, 1]".into(),
            ));
        }
        Ok(config)
    }

    fn echo(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::json("run config echo", e))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "recarena",
    version,
    about = "LLM-judged pair-wise arena for recommender systems"
)]
pub struct Cli {
    /// JSON run config; explicit flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a raw dataset (or emit the bundled toy corpus) as canonical corpus JSON.
    Ingest(IngestArgs),
    /// Generate baseline recommendation lists from a corpus.
    Recommend(RecommendArgs),
    /// Compute offline metrics (AUC, nDCG@k, URD) per system.
    Metrics(MetricsArgs),
    /// Build prompts, run the LLM judge over user/list pairs, write verdicts.
    Judge(Box<JudgeArgs>),
    /// Aggregate verdicts into tallies, Q, ranks, and report files.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Input format: movielens, mind, or toy (bundled, needs no --input).
    #[arg(long)]
    format: String,
    /// Dataset directory (unused for --format toy).
    #[arg(long, value_name = "DIR")]
    input: Option<PathBuf>,
    /// Canonical corpus JSON to write.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Ratings at or above this become positive labels (movielens only).
    #[arg(long)]
    rating_threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    /// Canonical corpus JSON (falls back to the config's corpus path).
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Baseline: popularity, random, or graded (history-affinity lists
    /// at a chosen quality, for demos and fixtures).
    #[arg(long)]
    method: String,
    /// List length.
    #[arg(long)]
    k: Option<usize>,
    /// RNG seed (random baseline).
    #[arg(long)]
    seed: Option<u64>,
    /// Quality in [0, 1] for --method graded.
    #[arg(long)]
    quality: Option<f64>,
    /// Override the system id stamped on the lists.
    #[arg(long)]
    system_id: Option<String>,
    /// Recommendation lists JSONL to write.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Recommendation lists JSONL; each file may contain several systems.
    /// Repeatable.
    #[arg(long, value_name = "FILE")]
    lists: Vec<PathBuf>,
    /// Scored (user, item, label, score) JSONL for AUC, as NAME=PATH
    /// with NAME the system the scores belong to. Repeatable.
    #[arg(long, value_name = "NAME=PATH")]
    scores: Vec<String>,
    /// Relevance judgments JSONL; derived from corpus labels when unset.
    #[arg(long, value_name = "FILE")]
    relevance: Option<PathBuf>,
    /// Cutoff for nDCG@k.
    #[arg(long)]
    k: Option<usize>,
    /// AUC pooling: global or per-user-mean.
    #[arg(long, default_value = "global")]
    auc_scope: String,
    /// Metrics JSON to write.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct JudgeArgs {
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Single-system recommendation lists JSONL shown as System A.
    #[arg(long, value_name = "FILE")]
    list_a: PathBuf,
    /// Single-system recommendation lists JSONL shown as System B.
    #[arg(long, value_name = "FILE")]
    list_b: PathBuf,
    #[arg(long, value_enum, default_value_t = ProviderKind::Mock)]
    provider: ProviderKind,
    #[arg(long, value_enum, default_value_t = CliJudgeMode::Pairwise)]
    mode: CliJudgeMode,
    #[arg(long, value_enum)]
    debias: Option<DebiasMode>,
    /// Judge at most this many users (deterministic under --seed).
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    registry: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    template: Option<PathBuf>,
    #[arg(long)]
    max_history: Option<usize>,
    #[arg(long)]
    include_abstracts: bool,
    #[arg(long, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    #[arg(long)]
    max_retries: Option<u32>,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    timeout_secs: Option<u64>,
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    unparseable_threshold: Option<f64>,
    /// Verdicts JSONL (pairwise) or scores JSONL (absolute) to write.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Verdicts JSONL from the judge command. Repeatable; one pair per
    /// file, all sharing a common baseline system B.
    #[arg(long, value_name = "FILE", required = true)]
    verdicts: Vec<PathBuf>,
    /// Metrics JSON from the metrics command.
    #[arg(long, value_name = "FILE")]
    metrics: Option<PathBuf>,
    /// Correlate Q against this metric key (e.g. auc or ndcg@5);
    /// requires --metrics.
    #[arg(long, value_name = "METRIC")]
    correlate: Option<String>,
    /// Absolute-mode scores JSONL to summarize alongside the tallies.
    #[arg(long, value_name = "FILE")]
    scores: Option<PathBuf>,
    /// Include qualitative analysis excerpts per dimension.
    #[arg(long)]
    include_analysis: bool,
    /// Directory for report.md, report.json, tallies.csv, run_config.json.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

/// Run the CLI on the given argument list, returning the process exit
/// code. `--help`/`--version` print and return 0; argument errors return
/// 2; judging-quality failures return 3.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Recommend(args) => cmd_recommend(config, args),
        Command::Metrics(args) => cmd_metrics(config, args),
        Command::Judge(args) => cmd_judge(config, *args),
        Command::Report(args) => cmd_report(config, args),
    }
}

fn require_input(input: Option<PathBuf>, format: &str) -> Result<PathBuf> {
    input.ok_or_else(|| Error::Input(format!("--format {format} requires --input DIR")))
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let corpus = match args.format.as_str() {
        "toy" => toy::toy_corpus(),
        "movielens" => {
            let dir = require_input(args.input, "movielens")?;
            let mut options = MovieLensOptions::default();
            if let Some(threshold) = args.rating_threshold {
                options.rating_threshold = threshold;
            }
            parse_movielens(&dir, options)?
        }
        "mind" => {
            let dir = require_input(args.input, "mind")?;
            parse_mind(&dir)?
        }
        other => {
            return Err(Error::Input(format!(
                "unknown --format {other:?}; expected one of: toy, movielens, mind"
            )))
        }
    };
    corpus.write_canonical(&args.out)?;
    println!(
        "ingested {} users, {} items, {} interactions -> {}",
        corpus.users.len(),
        corpus.items.len(),
        corpus.interactions.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_recommend(config: RunConfig, args: RecommendArgs) -> Result<()> {
    let corpus_path = args
        .corpus
        .or(config.corpus)
        .ok_or_else(|| Error::Config("no corpus path given (--corpus or config)".into()))?;
    let corpus = Corpus::read_canonical(&corpus_path)?;
    let k = args.k.unwrap_or(config.k);
    if k < 1 {
        return Err(Error::Input("k must be at least 1".into()));
    }
    let seed = args.seed.unwrap_or(config.seed);
    let mut lists = match args.method.as_str() {
        "popularity" => baseline_recommend(&corpus, BaselineMethod::Popularity, k, seed)?,
        "random" => baseline_recommend(&corpus, BaselineMethod::Random, k, seed)?,
        "graded" => {
            let quality = args
                .quality
                .ok_or_else(|| Error::Input("--method graded requires --quality".into()))?;
            if !(0.0..=1.0).contains(&quality) {
                return Err(Error::Input("--quality must be within [0, 1]".into()));
            }
            let system_id = args.system_id.clone().unwrap_or_else(|| "graded".into());
            toy::graded_reclists(&corpus, &system_id, quality, k)
        }
        other => {
            return Err(Error::Input(format!(
                "unknown --method {other:?}; expected one of: popularity, random, graded"
            )))
        }
    };
    if let Some(system_id) = &args.system_id {
        for list in &mut lists {
            list.system_id = system_id.clone();
        }
    }
    for list in &lists {
        list.validate(&corpus)?;
    }
    write_reclists(&args.out, &lists)?;
    let system = lists.first().map(|l| l.system_id.as_str()).unwrap_or("-");
    println!(
        "wrote {} lists for system {} -> {}",
        lists.len(),
        system,
        args.out.display()
    );
    Ok(())
}

/// On-disk shape of the metrics command output and the report command's
/// correlation input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsFile {
    pub k: usize,
    pub auc_scope: String,
    /// system id -> metric key ("auc", "ndcg@k", "urd") -> value.
    pub systems: BTreeMap<String, BTreeMap<String, f64>>,
}

fn parse_scores_arg(arg: &str) -> Result<(String, PathBuf)> {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), PathBuf::from(path)))
        }
        _ => Err(Error::Input(format!(
            "--scores expects NAME=PATH, got {arg:?}"
        ))),
    }
}

fn cmd_metrics(config: RunConfig, args: MetricsArgs) -> Result<()> {
    let corpus_path = args
        .corpus
        .or(config.corpus)
        .ok_or_else(|| Error::Config("no corpus path given (--corpus or config)".into()))?;
    let corpus = Corpus::read_canonical(&corpus_path)?;
    let k = args.k.unwrap_or(config.k);
    let scope: AucScope = args.auc_scope.parse()?;
    let mut systems: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();

    if !args.lists.is_empty() {
        let mut lists = Vec::new();
        for path in &args.lists {
            lists.extend(read_reclists(path, &corpus)?);
        }
        let relevance = match &args.relevance {
            Some(path) => read_relevance(path)?,
            None => relevance_from_corpus(&corpus),
        };
        for (system, system_lists) in group_by_system(&lists) {
            let entry = systems.entry(system.to_string()).or_default();
            let mean_ndcg = system_lists
                .iter()
                .map(|l| ndcg_at_k(l, &relevance, k))
                .sum::<f64>()
                / system_lists.len() as f64;
            entry.insert(format!("ndcg@{k}"), mean_ndcg);
            let mut urd_sum = 0.0;
            let mut urd_ok = true;
            for list in &system_lists {
                match urd(list, &corpus) {
                    Ok(value) => urd_sum += value,
                    Err(Error::UndefinedMetric(message)) => {
                        log::warn!("urd undefined for system {system}: {message}");
                        urd_ok = false;
                        break;
                    }
                    Err(other) => return Err(other),
                }
            }
            if urd_ok {
                entry.insert("urd".to_string(), urd_sum / system_lists.len() as f64);
            }
        }
    }

    for arg in &args.scores {
        let (system, path) = parse_scores_arg(arg)?;
        let examples = read_scores(&path)?;
        let value = auc_scoped(&examples, scope)?;
        systems.entry(system).or_default().insert("auc".to_string(), value);
    }

    if systems.is_empty() {
        return Err(Error::Input(
            "nothing to compute: pass --lists and/or --scores".into(),
        ));
    }

    let file = MetricsFile {
        k,
        auc_scope: args.auc_scope.clone(),
        systems,
    };
    let mut text =
        serde_json::to_string_pretty(&file).map_err(|e| Error::json("metrics file", e))?;
    text.push('\n');
    fs::write(&args.out, text).map_err(|e| Error::io(&args.out, e))?;
    println!(
        "wrote metrics for {} systems -> {}",
        file.systems.len(),
        args.out.display()
    );
    Ok(())
}

fn sample_users(mut users: Vec<String>, sample: Option<usize>, seed: u64) -> Vec<String> {
    users.sort();
    if let Some(n) = sample {
        if n < users.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            users.shuffle(&mut rng);
            users.truncate(n);
            users.sort();
        }
    }
    users
}

enum Judged {
    Parsed(PairVerdict, ProviderMeta),
    Failed(String),
}

fn judge_outcome(
    bundle: &PromptBundle,
    result: std::result::Result<RawJudgment, Error>,
    received: &mut usize,
    parse_failed: &mut usize,
) -> Judged {
    match result {
        Ok(raw) => {
            *received += 1;
            match parse_verdict(&raw, bundle) {
                Ok(verdict) => Judged::Parsed(verdict, raw.provider_meta),
                Err(err) => {
                    *parse_failed += 1;
                    Judged::Failed(format!("parse: {err}"))
                }
            }
        }
        Err(err) => Judged::Failed(format!("judge: {err}")),
    }
}

/// Merge the original and swapped passes of one user's judgment: both
/// verdicts are already in logical-system terms, so agreement survives
/// and any disagreement is demoted to a tie.
fn merge_verdicts(plain: PairVerdict, swapped: PairVerdict) -> PairVerdict {
    let keys: BTreeSet<String> = plain
        .per_dimension
        .keys()
        .chain(swapped.per_dimension.keys())
        .cloned()
        .collect();
    let mut per_dimension = BTreeMap::new();
    for key in keys {
        let merged = match (plain.per_dimension.get(&key), swapped.per_dimension.get(&key)) {
            (Some(a), Some(b)) if a == b => *a,
            (Some(_), Some(_)) => Outcome::Tie,
            (Some(only), None) | (None, Some(only)) => *only,
            (None, None) => continue,
        };
        per_dimension.insert(key, merged);
    }
    let overall = if plain.overall == swapped.overall {
        plain.overall
    } else {
        Outcome::Tie
    };
    let mut analysis = plain.analysis;
    for (key, text) in swapped.analysis {
        analysis.entry(key).or_insert(text);
    }
    PairVerdict {
        user_id: plain.user_id,
        system_a_id: plain.system_a_id,
        system_b_id: plain.system_b_id,
        per_dimension,
        overall,
        analysis,
        swap_corrected: true,
    }
}

fn reconcile(user_id: &str, a_id: &str, b_id: &str, plain: Judged, swapped: Judged) -> VerdictLine {
    match (plain, swapped) {
        (Judged::Parsed(p, meta), Judged::Parsed(s, _)) => VerdictLine::Verdict(JudgedVerdict {
            verdict: merge_verdicts(p, s),
            provider_meta: meta,
        }),
        (Judged::Parsed(v, meta), Judged::Failed(err))
        | (Judged::Failed(err), Judged::Parsed(v, meta)) => {
            log::warn!("user {user_id}: one debias pass failed ({err}); keeping the other");
            VerdictLine::Verdict(JudgedVerdict {
                verdict: v,
                provider_meta: meta,
            })
        }
        (Judged::Failed(e1), Judged::Failed(e2)) => VerdictLine::Failure(JudgmentFailure {
            user_id: user_id.to_string(),
            system_a_id: a_id.to_string(),
            system_b_id: b_id.to_string(),
            error: format!("both passes failed: {e1}; {e2}"),
        }),
    }
}

#[derive(Serialize)]
struct ScoreLineOut<'a> {
    #[serde(flatten)]
    score: &'a ScoreVerdict,
    provider_meta: &'a ProviderMeta,
}

fn cmd_judge(mut config: RunConfig, args: JudgeArgs) -> Result<()> {
    if let Some(path) = args.corpus {
        config.corpus = Some(path);
    }
    if let Some(path) = args.registry {
        config.registry = Some(path);
    }
    if let Some(path) = args.template {
        config.template = Some(path);
    }
    if let Some(n) = args.sample {
        config.sample = Some(n);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(mode) = args.debias {
        config.debias = mode;
    }
    if let Some(n) = args.max_history {
        config.max_history = n;
    }
    if args.include_abstracts {
        config.include_abstracts = true;
    }
    if let Some(dir) = args.cache_dir {
        config.cache_dir = Some(dir);
    }
    if let Some(n) = args.max_in_flight {
        config.provider.max_in_flight = n;
    }
    if let Some(n) = args.max_retries {
        config.provider.max_retries = n;
    }
    if let Some(url) = args.base_url {
        config.provider.base_url = url;
    }
    if let Some(model) = args.model {
        config.provider.model_id = model;
    }
    if let Some(t) = args.temperature {
        config.provider.temperature = t;
    }
    if let Some(secs) = args.timeout_secs {
        config.provider.timeout_secs = secs;
    }
    if let Some(name) = args.api_key_env {
        config.provider.api_key_env = name;
    }
    if let Some(threshold) = args.unparseable_threshold {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(
                "unparseable threshold must be within [0, 1]".into(),
            ));
        }
        config.unparseable_threshold = threshold;
    }
    config.provider.validate()?;

    let corpus_path = config
        .corpus
        .clone()
        .ok_or_else(|| Error::Config("no corpus path given (--corpus or config)".into()))?;
    let corpus = Corpus::read_canonical(&corpus_path)?;
    let lists_a = read_reclists(&args.list_a, &corpus)?;
    let lists_b = read_reclists(&args.list_b, &corpus)?;
    let (system_a, index_a) = single_system_index(&lists_a)?;
    let (system_b, index_b) = single_system_index(&lists_b)?;
    if system_a == system_b {
        return Err(Error::Input(format!(
            "both list files belong to system {system_a:?}; judging needs two systems"
        )));
    }

    let common: Vec<String> = index_a
        .keys()
        .filter(|user| index_b.contains_key(*user))
        .map(|user| user.to_string())
        .collect();
    let skipped = index_a.len().max(index_b.len()) - common.len();
    if skipped > 0 {
        log::warn!("{skipped} users lack a list from one of the systems and are skipped");
    }
    if common.is_empty() {
        return Err(Error::Input(
            "no users have lists from both systems".into(),
        ));
    }
    let users = sample_users(common, config.sample, config.seed);

    let registry = match &config.registry {
        Some(path) => DimensionRegistry::from_json_file(path)?,
        None => DimensionRegistry::defaults(),
    };
    let template = match &config.template {
        Some(path) => PromptTemplate::from_file(path)?,
        None => PromptTemplate::default(),
    };
    let options = PromptOptions {
        max_history: config.max_history,
        include_abstracts: config.include_abstracts,
        ..PromptOptions::default()
    };

    let provider: Box<dyn Provider + '_> = match args.provider {
        ProviderKind::Mock => Box::new(MockJudge::new(&corpus)),
        ProviderKind::Http => {
            let cache_dir = config
                .cache_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(".recarena-cache"));
            config.cache_dir = Some(cache_dir.clone());
            Box::new(HttpProvider::new(
                config.provider.clone(),
                ResponseCache::new(cache_dir),
            )?)
        }
    };

    let manifest_path = args.out.with_extension("config.json");
    config.echo(&manifest_path)?;

    let mut received = 0usize;
    let mut parse_failed = 0usize;

    match args.mode {
        CliJudgeMode::Pairwise => {
            let mut bundles: Vec<PromptBundle> = Vec::new();
            for user in &users {
                let list_a = index_a[user.as_str()];
                let list_b = index_b[user.as_str()];
                bundles.push(build_pair_bundle(
                    &corpus, user, list_a, list_b, &registry, &template, &options, false,
                )?);
                if config.debias == DebiasMode::Swap {
                    bundles.push(build_pair_bundle(
                        &corpus, user, list_a, list_b, &registry, &template, &options, true,
                    )?);
                }
            }
            eprintln!(
                "judging {} prompts ({} users, debias {:?}) with provider {}",
                bundles.len(),
                users.len(),
                config.debias,
                provider.name()
            );
            let (results, summary) = run_batch(
                &bundles,
                config.provider.max_in_flight,
                |bundle: &PromptBundle| provider.judge_pair(bundle),
            );
            eprintln!(
                "batch done: {} ok, {} failed, {} cache hits",
                summary.ok, summary.failed, summary.cached
            );

            let mut judged: Vec<Judged> = Vec::with_capacity(results.len());
            for (bundle, result) in bundles.iter().zip(results) {
                judged.push(judge_outcome(bundle, result, &mut received, &mut parse_failed));
            }

            let mut lines: Vec<VerdictLine> = Vec::with_capacity(users.len());
            match config.debias {
                DebiasMode::None => {
                    for (user, item) in users.iter().zip(judged) {
                        lines.push(match item {
                            Judged::Parsed(verdict, provider_meta) => {
                                VerdictLine::Verdict(JudgedVerdict {
                                    verdict,
                                    provider_meta,
                                })
                            }
                            Judged::Failed(error) => VerdictLine::Failure(JudgmentFailure {
                                user_id: user.clone(),
                                system_a_id: system_a.clone(),
                                system_b_id: system_b.clone(),
                                error,
                            }),
                        });
                    }
                }
                DebiasMode::Swap => {
                    let mut iter = judged.into_iter();
                    for user in &users {
                        let plain = iter.next().expect("two entries per user");
                        let swapped = iter.next().expect("two entries per user");
                        lines.push(reconcile(user, &system_a, &system_b, plain, swapped));
                    }
                }
            }

            write_verdict_lines(&args.out, &lines)?;
            let failures = lines
                .iter()
                .filter(|l| matches!(l, VerdictLine::Failure(_)))
                .count();
            eprintln!(
                "wrote {} verdict lines ({} failures) -> {}",
                lines.len(),
                failures,
                args.out.display()
            );
            println!("{}", args.out.display());
        }
        CliJudgeMode::Absolute => {
            let mut bundles = Vec::new();
            for user in &users {
                for list in [index_a[user.as_str()], index_b[user.as_str()]] {
                    bundles.push(build_absolute_bundle(
                        &corpus, user, list, &registry, &template, &options,
                    )?);
                }
            }
            eprintln!(
                "scoring {} prompts ({} users x 2 systems) with provider {}",
                bundles.len(),
                users.len(),
                provider.name()
            );
            let (results, summary) = run_batch(
                &bundles,
                config.provider.max_in_flight,
                |bundle: &crate::promptkit::AbsoluteBundle| provider.judge_absolute(bundle),
            );
            eprintln!(
                "batch done: {} ok, {} failed, {} cache hits",
                summary.ok, summary.failed, summary.cached
            );

            let mut out = Vec::new();
            let mut failures = 0usize;
            for (bundle, result) in bundles.iter().zip(results) {
                match result {
                    Ok(raw) => {
                        received += 1;
                        match parse_score(&raw, bundle) {
                            Ok(score) => {
                                let line = ScoreLineOut {
                                    score: &score,
                                    provider_meta: &raw.provider_meta,
                                };
                                serde_json::to_writer(&mut out, &line)
                                    .map_err(|e| Error::json("score line", e))?;
                                out.push(b'\n');
                            }
                            Err(err) => {
                                parse_failed += 1;
                                failures += 1;
                                log::warn!(
                                    "user {} system {}: {err}",
                                    bundle.user_id,
                                    bundle.system_id
                                );
                            }
                        }
                    }
                    Err(err) => {
                        failures += 1;
                        log::warn!(
                            "user {} system {}: {err}",
                            bundle.user_id,
                            bundle.system_id
                        );
                    }
                }
            }
            fs::write(&args.out, out).map_err(|e| Error::io(&args.out, e))?;
            eprintln!(
                "wrote {} score lines ({} failures) -> {}",
                bundles.len() - failures,
                failures,
                args.out.display()
            );
            println!("{}", args.out.display());
        }
    }

    if received == 0 {
        return Err(Error::JudgingQuality(
            "no responses received from the judge".into(),
        ));
    }
    let fraction = parse_failed as f64 / received as f64;
    if fraction > config.unparseable_threshold {
        return Err(Error::JudgingQuality(format!(
            "{parse_failed} of {received} responses unparseable ({:.0}% > {:.0}% threshold)",
            100.0 * fraction,
            100.0 * config.unparseable_threshold
        )));
    }
    Ok(())
}

fn read_score_lines(path: &Path) -> Result<Vec<ScoreVerdict>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut scores = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let score: ScoreVerdict = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{}:{}", path.display(), lineno + 1), e))?;
        scores.push(score);
    }
    Ok(scores)
}

fn cmd_report(mut config: RunConfig, args: ReportArgs) -> Result<()> {
    if let Some(dir) = args.out_dir {
        config.output_dir = dir;
    }
    let mut lines = Vec::new();
    for path in &args.verdicts {
        lines.extend(read_verdict_lines(path)?);
    }

    let mut options = ReportOptions::new();
    options.include_analysis = args.include_analysis;
    if let Some(metric_key) = &args.correlate {
        let metrics_path = args.metrics.as_ref().ok_or_else(|| {
            Error::Config("--correlate requires --metrics FILE".into())
        })?;
        let text = fs::read_to_string(metrics_path).map_err(|e| Error::io(metrics_path, e))?;
        let file: MetricsFile = serde_json::from_str(&text)
            .map_err(|e| Error::json(format!("metrics file {}", metrics_path.display()), e))?;
        let values: BTreeMap<String, f64> = file
            .systems
            .iter()
            .filter_map(|(system, metrics)| metrics.get(metric_key).map(|v| (system.clone(), *v)))
            .collect();
        if values.is_empty() {
            return Err(Error::Input(format!(
                "metric {metric_key:?} not present for any system in {}",
                metrics_path.display()
            )));
        }
        options.correlate = Some((metric_key.clone(), values));
    }
    if let Some(scores_path) = &args.scores {
        options.absolute_scores = Some(read_score_lines(scores_path)?);
    }

    let report = match build_report(&lines, &options) {
        Err(Error::UndefinedCorrelation(message)) if options.correlate.is_some() => {
            log::warn!("correlation omitted: {message}");
            eprintln!("warning: correlation omitted: {message}");
            options.correlate = None;
            build_report(&lines, &options)?
        }
        other => other?,
    };

    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    for (name, format) in [
        ("report.md", ReportFormat::Markdown),
        ("report.json", ReportFormat::Json),
        ("tallies.csv", ReportFormat::Csv),
    ] {
        let path = config.output_dir.join(name);
        let document = render_report(&report, format)?;
        let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        file.write_all(document.as_bytes())
            .map_err(|e| Error::io(&path, e))?;
    }
    config.echo(&config.output_dir.join("run_config.json"))?;
    println!("{}", config.output_dir.display());
    Ok(())
}
