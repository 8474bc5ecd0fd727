//! Command-line front end. Every command reads and writes a period store
//! directory and records a run manifest next to the files it writes.
//!
//! Store layout:
//!
//! ```text
//! <store>/corpus/<period>.tsv
//! <store>/embeddings/<kind>-<period>.vec   (+ .meta)
//! <store>/maps/<op|lt>-<kind>-<base>__<target>.map
//! <store>/stats/  <store>/eval/
//! ```
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 numeric failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::align::{
    intersect, orthogonal_procrustes, ridge_linear_map, select_seed_pairs, AlignmentMap, Preprocess,
    DEFAULT_RIDGE_ALPHA, DEFAULT_SEED_TOP_N,
};
use crate::config::KeyValues;
use crate::corpus::{bucket_by_decade, ingest, FrequencyStore, IngestFormat, PeriodCorpus, TimePeriod, DEFAULT_EPOCH};
use crate::embed::{meta_path, train_cbow, train_svd, CbowConfig, EmbeddingSpace, SvdConfig};
use crate::error::{Error, Result};
use crate::evaluate::{
    evaluate_methods, generate_synthetic_replacement_corpus, load_gold_pairs, temporal_sweep, EmbeddingKind,
    EvalReport, EvalSettings, Maps, OovPolicy, SweepConfig, SynthSpec,
};
use crate::lexstats::{categorize_words, period_jsd, top_divergence_words, ShiftThresholds, DEFAULT_TOP_WORDS};
use crate::retrieve::{Method, QueryOptions, RerankOrder, Retriever};
use crate::sigfig::sig6;

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! say {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout(), $($arg)*).map_err(|e| Error::io("<stdout>", e))?
    };
}

#[derive(Parser, Debug)]
#[command(name = "diachron", version, about = "Diachronic counterpart retrieval over aligned period embeddings")]
pub struct Cli {
    /// Period store directory.
    #[arg(long, global = true, default_value = "store")]
    pub store: PathBuf,
    /// key=value defaults; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for stochastic training and synthesis.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 is fully deterministic.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tokenize a raw corpus and split it into decades.
    Ingest(IngestArgs),
    /// Corpus statistics: divergence mining and frequency series.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Train one period's embeddings.
    Train(TrainArgs),
    /// Fit a map from base-period to target-period embeddings.
    Align(AlignArgs),
    /// Ranked target-period counterparts of a base-period word.
    Query(QueryArgs),
    /// Score methods against gold pairs.
    Eval(EvalArgs),
    /// Evaluate one base period against several target periods.
    Sweep(SweepArgs),
    /// Write a synthetic corpus with planted replacement pairs.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// JSONL file or a directory of per-year folders.
    pub corpus: PathBuf,
    /// jsonl or year_dirs; inferred from the path when omitted.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub epoch: Option<i32>,
    /// Store to write into (defaults to --store).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum StatsCommand {
    /// Jensen-Shannon divergence between two periods and its top words.
    Jsd {
        #[arg(long)]
        base: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Relative-frequency series of words across all periods.
    Freq {
        #[arg(required = true)]
        words: Vec<String>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmbeddingChoice {
    Svd,
    Cbow,
}

impl EmbeddingChoice {
    fn label(self) -> &'static str {
        match self {
            EmbeddingChoice::Svd => "svd",
            EmbeddingChoice::Cbow => "cbow",
        }
    }
}

impl FromStr for EmbeddingChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <EmbeddingChoice as ValueEnum>::from_str(s, true).map_err(|_| Error::Usage(format!("unknown embedding '{s}'")))
    }
}

impl std::fmt::Display for EmbeddingChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Args, Debug, Default)]
pub struct TrainParams {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Context smoothing (svd) or noise exponent (cbow).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub sigma_exponent: Option<f64>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub downsample: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    pub kind: EmbeddingChoice,
    #[arg(long)]
    pub period: String,
    #[command(flatten)]
    pub params: TrainParams,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapChoice {
    Op,
    Lt,
}

impl MapChoice {
    fn label(self) -> &'static str {
        match self {
            MapChoice::Op => "op",
            MapChoice::Lt => "lt",
        }
    }
}

/// Which embeddings to use: explicit files, or a period pair in the store.
#[derive(Args, Debug, Default)]
pub struct SpaceArgs {
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub embedding: Option<EmbeddingChoice>,
    #[arg(long)]
    pub base_emb: Option<PathBuf>,
    #[arg(long)]
    pub target_emb: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    pub kind: MapChoice,
    #[command(flatten)]
    pub spaces: SpaceArgs,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub ridge_alpha: Option<f64>,
    /// none, l2 or center.
    #[arg(long)]
    pub preprocess: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    pub word: String,
    /// op, opsc or lt.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub pool: Option<usize>,
    /// anti or desc.
    #[arg(long)]
    pub order: Option<String>,
    #[command(flatten)]
    pub spaces: SpaceArgs,
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Allow the query word itself among the candidates.
    #[arg(long)]
    pub include_query: bool,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: PathBuf,
    /// Comma-separated: op,opsc,lt.
    #[arg(long)]
    pub methods: Option<String>,
    /// Comma-separated cutoffs.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub order: Option<String>,
    #[command(flatten)]
    pub spaces: SpaceArgs,
    #[arg(long)]
    pub op_map: Option<PathBuf>,
    #[arg(long)]
    pub lt_map: Option<PathBuf>,
    /// Count out-of-vocabulary queries as misses instead of skipping them.
    #[arg(long)]
    pub oov_as_miss: bool,
    #[arg(long)]
    pub include_query: bool,
    /// Output prefix; writes <prefix>.json and <prefix>.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub base: String,
    /// Comma-separated target periods.
    #[arg(long)]
    pub targets: String,
    #[arg(long)]
    pub embedding: Option<EmbeddingChoice>,
    #[arg(long)]
    pub balance_tokens: bool,
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub ridge_alpha: Option<f64>,
    #[command(flatten)]
    pub params: TrainParams,
    /// Output prefix; writes <prefix>.json and <prefix>.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub fillers: Option<usize>,
    #[arg(long)]
    pub docs_per_period: Option<usize>,
    #[arg(long)]
    pub sentences_per_pair: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_snapshot: BTreeMap<String, String>,
    pub input_digests: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// SHA-256 of a file, or of the sorted (relative path, digest) list of a
/// directory tree.
pub fn digest_path(path: &Path) -> Result<String> {
    if path.is_dir() {
        let mut files = Vec::new();
        collect_files(path, &mut files)?;
        files.sort();
        let mut h = Sha256::new();
        for f in files {
            let rel = f.strip_prefix(path).unwrap_or(&f);
            h.update(rel.to_string_lossy().as_bytes());
            h.update(digest_path(&f)?.as_bytes());
        }
        Ok(hex::encode(h.finalize()))
    } else {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_dir() {
            collect_files(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Resolves settings as flag, then config file, then default, and keeps a
/// snapshot of what was used.
struct Settings {
    file: KeyValues,
    snapshot: BTreeMap<String, String>,
}

impl Settings {
    fn pick<T: FromStr + ToString>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = match flag {
            Some(v) => v,
            None => self.file.parsed(key)?.unwrap_or(default),
        };
        self.snapshot.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn pick_str<T: FromStr<Err = Error>>(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<T> {
        let raw = self.pick(key, flag, default.to_string())?;
        raw.parse()
    }

    fn flag(&mut self, key: &str, set: bool) -> Result<bool> {
        self.pick(key, set.then_some(true), false)
    }
}

struct Ctx {
    store: PathBuf,
    force: bool,
    settings: Settings,
    inputs: BTreeMap<String, String>,
    outputs: Vec<PathBuf>,
    command: String,
    seed: Option<u64>,
    workers: Option<usize>,
}

impl Ctx {
    fn input(&mut self, path: &Path) -> Result<()> {
        let d = digest_path(path)?;
        self.inputs.insert(path.display().to_string(), d);
        Ok(())
    }

    /// Registers an output path, refusing to clobber without `--force`.
    fn output(&mut self, path: PathBuf) -> Result<PathBuf> {
        if path.exists() && !self.force {
            return Err(Error::WouldOverwrite(path));
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        self.outputs.push(path.clone());
        Ok(path)
    }

    fn seed(&mut self, default: u64) -> Result<u64> {
        let seed = self.seed;
        self.settings.pick("seed", seed, default)
    }

    fn workers(&mut self) -> Result<usize> {
        let w = self.workers;
        let w = self.settings.pick("workers", w, 1)?;
        if w == 0 {
            return Err(Error::Usage("--workers must be >= 1".into()));
        }
        Ok(w)
    }

    /// Writes the manifest beside `anchor` (the primary output).
    fn finish(self, anchor: &Path, seed: u64) -> Result<PathBuf> {
        let path = manifest_path(anchor);
        let manifest = RunManifest {
            command: self.command,
            config_snapshot: self.settings.snapshot,
            input_digests: self.inputs,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    fn corpus_path(&self, p: &TimePeriod) -> PathBuf {
        self.store.join("corpus").join(format!("{}.tsv", p.label))
    }

    fn embedding_path(&self, kind: EmbeddingChoice, p: &TimePeriod) -> PathBuf {
        self.store.join("embeddings").join(format!("{}-{}.vec", kind.label(), p.label))
    }

    fn map_path(&self, map: MapChoice, kind: &str, base: &str, target: &str) -> PathBuf {
        self.store.join("maps").join(format!("{}-{kind}-{base}__{target}.map", map.label()))
    }

    fn load_corpus(&mut self, p: &TimePeriod) -> Result<PeriodCorpus> {
        let path = self.corpus_path(p);
        if !path.exists() {
            return Err(Error::MissingPeriod(format!(
                "{} (no corpus at {}; run `diachron ingest` first)",
                p.label,
                path.display()
            )));
        }
        self.input(&path)?;
        PeriodCorpus::load(&path)
    }

    fn load_all_corpora(&mut self) -> Result<BTreeMap<TimePeriod, PeriodCorpus>> {
        let dir = self.store.join("corpus");
        let mut out = BTreeMap::new();
        let entries = fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for p in paths.into_iter().filter(|p| p.extension().is_some_and(|e| e == "tsv")) {
            self.input(&p)?;
            let pc = PeriodCorpus::load(&p)?;
            out.insert(pc.period.clone(), pc);
        }
        if out.is_empty() {
            return Err(Error::EmptyCorpus(dir));
        }
        Ok(out)
    }

    fn load_space(&mut self, path: &Path, hint: &str) -> Result<EmbeddingSpace> {
        if !path.exists() {
            return Err(Error::MissingPeriod(format!(
                "{hint} (no embedding at {}; run `diachron train` first)",
                path.display()
            )));
        }
        self.input(path)?;
        EmbeddingSpace::load(path)
    }

    /// Base and target spaces plus their period labels and embedding kind.
    fn spaces(&mut self, a: &SpaceArgs) -> Result<(EmbeddingSpace, EmbeddingSpace, String)> {
        let kind: EmbeddingChoice = self.settings.pick("embedding", a.embedding, EmbeddingChoice::Svd)?;
        let side = |ctx: &mut Ctx, explicit: &Option<PathBuf>, period: &Option<String>, key: &str| -> Result<EmbeddingSpace> {
            match explicit {
                Some(p) => ctx.load_space(p, key),
                None => {
                    let period: String = match period {
                        Some(p) => p.clone(),
                        None => ctx
                            .settings
                            .file
                            .get(key)
                            .map(String::from)
                            .ok_or_else(|| Error::Usage(format!("give --{key} or --{key}-emb")))?,
                    };
                    let tp: TimePeriod = period.parse()?;
                    ctx.settings.snapshot.insert(key.to_string(), tp.label.clone());
                    let path = ctx.embedding_path(kind, &tp);
                    ctx.load_space(&path, &tp.label)
                }
            }
        };
        let base = side(self, &a.base_emb, &a.base, "base")?;
        let target = side(self, &a.target_emb, &a.target, "target")?;
        let label = if a.base_emb.is_some() {
            base.meta.method.clone()
        } else {
            kind.label().to_string()
        };
        Ok((base, target, label))
    }

    fn frequencies(&mut self) -> Result<FrequencyStore> {
        let corpora = self.load_all_corpora()?;
        Ok(FrequencyStore::from_corpora(corpora.values()))
    }
}

fn period_label(space: &EmbeddingSpace, fallback: &str) -> String {
    space.meta.period.clone().unwrap_or_else(|| fallback.to_string())
}

fn parse_list<T: FromStr<Err = Error>>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::parse).collect()
}

fn parse_ks(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<usize>().map_err(|_| Error::Usage(format!("bad k value '{x}'"))))
        .collect()
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Parses `args` (program name first) and runs the command. Parse
/// failures, including `--help`, come back as [`Error::Usage`].
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args).map_err(|e| Error::Usage(e.render().to_string()))?;
    execute(cli, &args)
}

/// Runs an already parsed command line; `argv` is recorded in the manifest.
pub fn execute(cli: Cli, argv: &[OsString]) -> Result<()> {
    let file = match &cli.config {
        Some(p) => KeyValues::load(p)?,
        None => KeyValues::default(),
    };
    let mut ctx = Ctx {
        store: cli.store.clone(),
        force: cli.force,
        settings: Settings {
            file,
            snapshot: BTreeMap::new(),
        },
        inputs: BTreeMap::new(),
        outputs: Vec::new(),
        command: argv.iter().map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" "),
        seed: cli.seed,
        workers: cli.workers,
    };
    if let Some(p) = &cli.config {
        ctx.input(p)?;
    }
    match cli.command {
        Command::Ingest(a) => cmd_ingest(ctx, a),
        Command::Stats(StatsCommand::Jsd { base, target, top }) => cmd_jsd(ctx, &base, &target, top),
        Command::Stats(StatsCommand::Freq { words, out }) => cmd_freq(ctx, &words, out),
        Command::Train(a) => cmd_train(ctx, a),
        Command::Align(a) => cmd_align(ctx, a),
        Command::Query(a) => cmd_query(ctx, a),
        Command::Eval(a) => cmd_eval(ctx, a),
        Command::Sweep(a) => cmd_sweep(ctx, a),
        Command::Synth(a) => cmd_synth(ctx, a),
    }
}

fn cmd_ingest(mut ctx: Ctx, a: IngestArgs) -> Result<()> {
    let inferred = if a.corpus.is_dir() { "year_dirs" } else { "jsonl" };
    let format: IngestFormat = ctx.settings.pick_str("format", a.format, inferred)?;
    let epoch = ctx.settings.pick("epoch", a.epoch, DEFAULT_EPOCH)?;
    if let Some(out) = a.out {
        ctx.store = out;
    }
    ctx.input(&a.corpus)?;
    let ingested = ingest(&a.corpus, format)?;
    let periods = bucket_by_decade(ingested.documents, epoch);
    say!("{:<10} {:>8} {:>12} {:>8}", "period", "docs", "tokens", "types");
    for pc in periods.values() {
        let path = ctx.output(ctx.corpus_path(&pc.period))?;
        pc.save(&path)?;
        say!(
            "{:<10} {:>8} {:>12} {:>8}",
            pc.period.label,
            pc.documents.len(),
            pc.token_count,
            pc.vocabulary.len()
        );
    }
    if ingested.skipped > 0 {
        say!("skipped {} malformed record(s)", ingested.skipped);
    }
    let anchor = ctx.store.join("corpus");
    ctx.finish(&anchor, 0)?;
    Ok(())
}

fn cmd_jsd(mut ctx: Ctx, base: &str, target: &str, top: Option<usize>) -> Result<()> {
    let bp: TimePeriod = base.parse()?;
    let tp: TimePeriod = target.parse()?;
    let top = ctx.settings.pick("top", top, DEFAULT_TOP_WORDS)?;
    let base_pc = ctx.load_corpus(&bp)?;
    let target_pc = ctx.load_corpus(&tp)?;
    let report = period_jsd(&target_pc, &base_pc)?;
    let words = top_divergence_words(&report, top);
    let store = FrequencyStore::from_corpora([&base_pc, &target_pc]);
    let shifts = categorize_words(&words, |w| store.series(w), &bp, &tp, &ShiftThresholds::default())?;

    let stem = format!("{}__{}", bp.label, tp.label);
    let report_path = ctx.output(ctx.store.join("stats").join(format!("jsd-{stem}.tsv")))?;
    write_file(&report_path, |w| report.write_tsv(w))?;
    let cand_path = ctx.output(ctx.store.join("stats").join(format!("candidates-{stem}.tsv")))?;
    write_file(&cand_path, |w| {
        writeln!(w, "token\tcontribution\tshift")?;
        for (word, c) in report.contributions.iter().take(top) {
            writeln!(w, "{word}\t{c}\t{}", serde_json::to_value(shifts[word]).unwrap().as_str().unwrap())?;
        }
        Ok(())
    })?;
    say!("jsd({}, {}) = {} nats", bp.label, tp.label, sig6(report.jsd));
    for (word, c) in report.contributions.iter().take(10) {
        say!("  {word:<20} {:>12}", sig6(*c));
    }
    say!("wrote {} and {}", report_path.display(), cand_path.display());
    ctx.finish(&report_path, 0)?;
    Ok(())
}

fn cmd_freq(mut ctx: Ctx, words: &[String], out: Option<PathBuf>) -> Result<()> {
    let store = ctx.frequencies()?;
    let words: Vec<String> = words.iter().flat_map(|w| crate::corpus::tokenize(w)).collect();
    match out {
        Some(path) => {
            let path = ctx.output(path)?;
            write_file(&path, |w| store.write_tsv(&words, w))?;
            ctx.finish(&path, 0)?;
        }
        None => store
            .write_tsv(&words, std::io::stdout().lock())
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn svd_config(s: &mut Settings, p: &TrainParams) -> Result<SvdConfig> {
    let d = SvdConfig::default();
    Ok(SvdConfig {
        dim: s.pick("dim", p.dim, d.dim)?,
        window: s.pick("window", p.window, d.window)?,
        alpha: s.pick("alpha", p.alpha, d.alpha)?,
        min_count: s.pick("min_count", p.min_count, d.min_count)?,
        sigma_exponent: s.pick("sigma_exponent", p.sigma_exponent, d.sigma_exponent)?,
        solver: d.solver,
    })
}

fn cbow_config(ctx: &mut Ctx, p: &TrainParams) -> Result<CbowConfig> {
    let d = CbowConfig::default();
    let seed = ctx.seed(d.seed)?;
    let workers = ctx.workers()?;
    let s = &mut ctx.settings;
    Ok(CbowConfig {
        dim: s.pick("dim", p.dim, d.dim)?,
        window: s.pick("window", p.window, d.window)?,
        negatives: s.pick("negatives", p.negatives, d.negatives)?,
        downsample: s.pick("downsample", p.downsample, d.downsample)?,
        epochs: s.pick("epochs", p.epochs, d.epochs)?,
        learning_rate: s.pick("learning_rate", p.learning_rate, d.learning_rate)?,
        min_learning_rate: d.min_learning_rate,
        min_count: s.pick("min_count", p.min_count, d.min_count)?,
        alpha: s.pick("alpha", p.alpha, d.alpha)?,
        seed,
        workers,
    })
}

fn cmd_train(mut ctx: Ctx, a: TrainArgs) -> Result<()> {
    let period: TimePeriod = a.period.parse()?;
    let pc = ctx.load_corpus(&period)?;
    let out = a.out.clone().unwrap_or_else(|| ctx.embedding_path(a.kind, &period));
    let out = ctx.output(out)?;
    ctx.outputs.push(meta_path(&out));
    let (space, seed) = match a.kind {
        EmbeddingChoice::Svd => {
            let cfg = svd_config(&mut ctx.settings, &a.params)?;
            (train_svd(&pc, &cfg)?, 0)
        }
        EmbeddingChoice::Cbow => {
            let cfg = cbow_config(&mut ctx, &a.params)?;
            let trained = train_cbow(&pc, &cfg)?;
            for (e, l) in trained.epoch_losses.iter().enumerate() {
                say!("epoch {}: loss {}", e + 1, sig6(*l));
            }
            (trained.space, cfg.seed)
        }
    };
    space.save(&out)?;
    say!(
        "{} {}: {} words x {} dims -> {}",
        a.kind,
        period.label,
        space.len(),
        space.dim(),
        out.display()
    );
    for w in &space.meta.warnings {
        say!("warning: {w}");
    }
    ctx.finish(&out, seed)?;
    Ok(())
}

fn cmd_align(mut ctx: Ctx, a: AlignArgs) -> Result<()> {
    let preprocess: Preprocess = ctx.settings.pick_str("preprocess", a.preprocess.clone(), &Preprocess::default().to_string())?;
    let (base, target, kind) = ctx.spaces(&a.spaces)?;
    let (bl, tl) = (period_label(&base, "base"), period_label(&target, "target"));
    let map = match a.kind {
        MapChoice::Op => orthogonal_procrustes(&intersect(&base, &target, preprocess)?)?,
        MapChoice::Lt => {
            let top_n = ctx.settings.pick("top_n", a.top_n, DEFAULT_SEED_TOP_N)?;
            let alpha = ctx.settings.pick("ridge_alpha", a.ridge_alpha, DEFAULT_RIDGE_ALPHA)?;
            let bpc = ctx.load_corpus(&bl.parse()?)?;
            let tpc = ctx.load_corpus(&tl.parse()?)?;
            let seeds = select_seed_pairs(&base, &target, &bpc.vocabulary, &tpc.vocabulary, top_n, preprocess)?;
            ridge_linear_map(&seeds, alpha)?
        }
    };
    let out = a.out.clone().unwrap_or_else(|| ctx.map_path(a.kind, &kind, &bl, &tl));
    let out = ctx.output(out)?;
    map.save(&out)?;
    say!(
        "{} map {bl} -> {tl}: {} pairs, residual {}, orthogonality error {} -> {}",
        a.kind.label(),
        map.stats.pairs,
        sig6(map.stats.residual),
        sig6(map.orthogonality_error()),
        out.display()
    );
    for w in &map.stats.warnings {
        say!("warning: {w}");
    }
    ctx.finish(&out, 0)?;
    Ok(())
}

fn load_map(ctx: &mut Ctx, path: &Path) -> Result<AlignmentMap> {
    if !path.exists() {
        return Err(Error::InvalidInput(format!(
            "no alignment map at {}; run `diachron align` first",
            path.display()
        )));
    }
    ctx.input(path)?;
    AlignmentMap::load(path)
}

fn cmd_query(mut ctx: Ctx, a: QueryArgs) -> Result<()> {
    let method: Method = ctx.settings.pick_str("method", a.method.clone(), "op")?;
    let k = ctx.settings.pick("k", a.k, 10)?;
    let order: RerankOrder = ctx.settings.pick_str("order", a.order.clone(), "anti")?;
    let include = ctx.settings.flag("include_query", a.include_query)?;
    let (base, target, kind) = ctx.spaces(&a.spaces)?;
    let (bl, tl) = (period_label(&base, "base"), period_label(&target, "target"));
    let map_kind = if method == Method::Lt { MapChoice::Lt } else { MapChoice::Op };
    let map_path = a.map.clone().unwrap_or_else(|| ctx.map_path(map_kind, &kind, &bl, &tl));
    let map = load_map(&mut ctx, &map_path)?;
    let freq = if method == Method::OpSc { Some(ctx.frequencies()?) } else { None };
    let word = crate::corpus::tokenize(&a.word).pop().unwrap_or(a.word.clone());
    let mut opts = QueryOptions::new(k);
    opts.pool = a.pool;
    opts.order = order;
    opts.exclude_query = !include;
    let ranked = Retriever::new(&base, &target, &map, freq.as_ref())?.query(&word, method, &opts)?;
    for w in &ranked.warnings {
        eprintln!("warning: {w}");
    }
    match a.out {
        Some(path) => {
            let path = ctx.output(path)?;
            write_file(&path, |w| ranked.write_tsv(w))?;
            ctx.finish(&path, 0)?;
        }
        None => ranked
            .write_tsv(std::io::stdout().lock())
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn eval_settings(ctx: &mut Ctx, methods: Option<String>, k: Option<String>, order: Option<String>, oov_as_miss: bool, include_query: bool) -> Result<EvalSettings> {
    let methods = parse_list(&ctx.settings.pick("methods", methods, "op,opsc,lt".to_string())?)?;
    let ks = parse_ks(&ctx.settings.pick("k", k, "1,10,100".to_string())?)?;
    let order = ctx.settings.pick_str("order", order, "anti")?;
    let oov = if ctx.settings.flag("oov_as_miss", oov_as_miss)? {
        OovPolicy::CountAsMiss
    } else {
        OovPolicy::Skip
    };
    let exclude_query = !ctx.settings.flag("include_query", include_query)?;
    Ok(EvalSettings {
        methods,
        ks,
        order,
        oov,
        exclude_query,
    })
}

fn write_report(ctx: &mut Ctx, report: &EvalReport, prefix: PathBuf) -> Result<PathBuf> {
    let json = ctx.output(prefix.with_extension("json"))?;
    fs::write(&json, report.to_json() + "\n").map_err(|e| Error::io(&json, e))?;
    let csv = ctx.output(prefix.with_extension("csv"))?;
    write_file(&csv, |w| report.write_csv(w))?;
    report.write_summary(std::io::stdout().lock()).map_err(|e| Error::io("<stdout>", e))?;
    say!("wrote {} and {}", json.display(), csv.display());
    Ok(json)
}

fn cmd_eval(mut ctx: Ctx, a: EvalArgs) -> Result<()> {
    let settings = eval_settings(&mut ctx, a.methods.clone(), a.k.clone(), a.order.clone(), a.oov_as_miss, a.include_query)?;
    ctx.input(&a.gold)?;
    let gold = load_gold_pairs(&a.gold)?;
    let (base, target, kind) = ctx.spaces(&a.spaces)?;
    let (bl, tl) = (period_label(&base, "base"), period_label(&target, "target"));
    let needs = |m: MapChoice| {
        settings
            .methods
            .iter()
            .any(|x| (*x == Method::Lt) == (m == MapChoice::Lt))
    };

    let op = if needs(MapChoice::Op) {
        let path = a.op_map.clone().unwrap_or_else(|| ctx.map_path(MapChoice::Op, &kind, &bl, &tl));
        Some(if path.exists() || a.op_map.is_some() {
            load_map(&mut ctx, &path)?
        } else {
            log::warn!("no OP map at {}; fitting one now", path.display());
            orthogonal_procrustes(&intersect(&base, &target, Preprocess::default())?)?
        })
    } else {
        None
    };
    let lt = if needs(MapChoice::Lt) {
        let path = a.lt_map.clone().unwrap_or_else(|| ctx.map_path(MapChoice::Lt, &kind, &bl, &tl));
        Some(if path.exists() || a.lt_map.is_some() {
            load_map(&mut ctx, &path)?
        } else {
            log::warn!("no LT map at {}; fitting one now", path.display());
            let bpc = ctx.load_corpus(&bl.parse()?)?;
            let tpc = ctx.load_corpus(&tl.parse()?)?;
            let seeds = select_seed_pairs(&base, &target, &bpc.vocabulary, &tpc.vocabulary, DEFAULT_SEED_TOP_N, Preprocess::default())?;
            ridge_linear_map(&seeds, DEFAULT_RIDGE_ALPHA)?
        })
    } else {
        None
    };
    let freq = if settings.methods.contains(&Method::OpSc) {
        Some(ctx.frequencies()?)
    } else {
        None
    };
    let maps = Maps {
        orthogonal: op.as_ref(),
        linear: lt.as_ref(),
    };
    let mut conventions = settings.conventions();
    conventions.insert("gold_provenance".into(), gold.provenance.clone());
    let report = EvalReport {
        cells: evaluate_methods(&base, &target, maps, freq.as_ref(), &gold, &kind, &settings)?,
        conventions,
    };
    let prefix = a
        .out
        .clone()
        .unwrap_or_else(|| ctx.store.join("eval").join(format!("{kind}-{bl}__{tl}")));
    let anchor = write_report(&mut ctx, &report, prefix)?;
    ctx.finish(&anchor, 0)?;
    Ok(())
}

fn cmd_sweep(mut ctx: Ctx, a: SweepArgs) -> Result<()> {
    let eval = eval_settings(&mut ctx, a.methods.clone(), a.k.clone(), None, false, false)?;
    let kind: EmbeddingChoice = ctx.settings.pick("embedding", a.embedding, EmbeddingChoice::Svd)?;
    let embedding = match kind {
        EmbeddingChoice::Svd => EmbeddingKind::Svd(svd_config(&mut ctx.settings, &a.params)?),
        EmbeddingChoice::Cbow => EmbeddingKind::Cbow(cbow_config(&mut ctx, &a.params)?),
    };
    let base: TimePeriod = a.base.parse()?;
    let targets: Vec<TimePeriod> = parse_list(&a.targets)?;
    let seed = ctx.seed(0)?;
    let workers = ctx.workers()?;
    let balance = ctx.settings.flag("balance_tokens", a.balance_tokens)?;
    let top_n = ctx.settings.pick("top_n", a.top_n, DEFAULT_SEED_TOP_N)?;
    let ridge_alpha = ctx.settings.pick("ridge_alpha", a.ridge_alpha, DEFAULT_RIDGE_ALPHA)?;
    ctx.input(&a.gold)?;
    let gold = load_gold_pairs(&a.gold)?;
    let corpora = ctx.load_all_corpora()?;
    let cfg = SweepConfig {
        balance_tokens: balance,
        balance_seed: seed,
        seed_top_n: top_n,
        ridge_alpha,
        eval,
        workers,
        ..SweepConfig::new(base.clone(), targets, embedding)
    };
    let outcome = temporal_sweep(&corpora, &gold, &cfg)?;
    if outcome.filtered_out > 0 {
        say!("{} gold pairs dropped (query missing from a target period)", outcome.filtered_out);
    }
    if let Some(b) = outcome.balanced_tokens {
        say!("targets balanced to {b} tokens");
    }
    let prefix = a
        .out
        .clone()
        .unwrap_or_else(|| ctx.store.join("eval").join(format!("sweep-{kind}-{}", base.label)));
    let anchor = write_report(&mut ctx, &outcome.report, prefix)?;
    ctx.finish(&anchor, seed)?;
    Ok(())
}

fn cmd_synth(mut ctx: Ctx, a: SynthArgs) -> Result<()> {
    let d = SynthSpec::default();
    let seed = ctx.seed(d.seed)?;
    let s = &mut ctx.settings;
    let spec = SynthSpec {
        n_pairs: s.pick("pairs", a.pairs, d.n_pairs)?,
        n_filler_words: s.pick("fillers", a.fillers, d.n_filler_words)?,
        docs_per_period: s.pick("docs_per_period", a.docs_per_period, d.docs_per_period)?,
        sentences_per_pair: s.pick("sentences_per_pair", a.sentences_per_pair, d.sentences_per_pair)?,
        seed,
        ..d
    };
    let synth = generate_synthetic_replacement_corpus(&spec)?;
    ctx.output(a.out.join("corpus.jsonl"))?;
    ctx.output(a.out.join("gold.tsv"))?;
    let (corpus_path, gold_path) = synth.write(&a.out)?;
    say!(
        "{} documents, {} pairs -> {} and {}",
        synth.documents.len(),
        synth.gold.len(),
        corpus_path.display(),
        gold_path.display()
    );
    ctx.finish(&corpus_path, seed)?;
    Ok(())
}
