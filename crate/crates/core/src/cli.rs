//! Command-line pipeline. Each stage reads the artifacts of earlier stages
//! from the output directory and writes its own, together with a
//! `manifest.json` listing every file it wrote and its SHA-256.
//!
//! Layout under the output directory:
//!
//! ```text
//! synth/   tweets.jsonl snapshots.csv debates.csv truth.json
//! corpus/  corpus.json rows.json vocab.txt summary.csv
//! lda/     model.json theta.csv topics.txt loglik.csv
//! design/  design.csv
//! fit/     nb.json poisson.json nb_no_topics.json tests.json
//! sweep/   sweep.csv sweep.json
//! report/  regression.* regression_no_topics.* topics.txt summary.* ci.svg ci.csv comparison.txt
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::countreg::{
    fit_nb, fit_poisson, lr_test_overdispersion, stars, wald, LrTest, NbFit, Wald,
};
use crate::design::{build_design, complete_rows, summary_stats, DesignOptions};
use crate::error::{Error, Result};
use crate::ingest::{
    build_rows, format_timestamp, load_schedule, load_snapshots, load_tweets, write_schedule_csv,
    write_snapshots_csv, write_tweets_jsonl, AnalysisRow, IngestConfig, TweetFormat,
};
use crate::lda::{fit_lda, LdaConfig, TopicModel, RNG_NAME};
use crate::modelsel::{
    compare_aic, modal_k, sweep_csv, sweep_repeated, AicComparison, BaselineRule, SweepConfig,
};
use crate::report::{
    ci_csv, ci_points, ci_svg, regression_table, render_summary, render_topic_table, TableFormat,
};
use crate::synth::{gen_campaign, SynthSpec};
use crate::textproc::{build_corpus, Corpus, TokenizerConfig};

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "TOPICLIKES_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "topiclikes",
    version,
    about = "Topic extraction and negative binomial regression of likes"
)]
pub struct Cli {
    /// Output directory for all stage artifacts.
    #[arg(long, global = true, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    /// Run configuration (TOML, or JSON when the extension is .json). Flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset, then ingest it.
    Synth(SynthArgs),
    /// Read tweets, follower snapshots and the debate schedule; build the corpus.
    Ingest(IngestArgs),
    /// Fit the topic model.
    Lda(LdaArgs),
    /// Build the design and fit the count regressions.
    Fit(FitArgs),
    /// Sweep the number of topics and score each by MAE.
    Sweep(SweepArgs),
    /// Render tables and the coefficient plot.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "campaign")]
    pub preset: String,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct IngestArgs {
    #[arg(long)]
    pub tweets: Option<PathBuf>,
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub debates: Option<PathBuf>,
    /// Tweet file format; guessed from the extension when absent.
    #[arg(long)]
    pub format: Option<TweetFormat>,
    #[arg(long, allow_hyphen_values = true)]
    pub utc_offset_minutes: Option<i32>,
    #[arg(long)]
    pub max_staleness_hours: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct LdaArgs {
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct FitArgs {
    #[arg(long)]
    pub baseline_topic: Option<usize>,
    #[arg(long)]
    pub baseline_hour: Option<u32>,
    #[arg(long)]
    pub no_hour_controls: bool,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[arg(long)]
    pub kmin: Option<usize>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Fraction of rows held out for the MAE (default: in-sample).
    #[arg(long)]
    pub holdout: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct ReportArgs {
    #[arg(long)]
    pub format: Option<TableFormat>,
    #[arg(long)]
    pub top_words: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSettings {
    pub topics: usize,
    /// `None` uses 50/K.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for LdaSettings {
    fn default() -> Self {
        let d = LdaConfig::new(4);
        Self {
            topics: 4,
            alpha: None,
            beta: d.beta,
            iters: d.iters,
            burnin: d.burnin,
            thin: d.thin,
            seed: d.seed,
        }
    }
}

impl LdaSettings {
    pub fn config(&self) -> LdaConfig {
        LdaConfig {
            alpha: self.alpha.unwrap_or(50.0 / self.topics.max(1) as f64),
            beta: self.beta,
            iters: self.iters,
            burnin: self.burnin,
            thin: self.thin,
            seed: self.seed,
            topics: self.topics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSettings {
    pub baseline_topic: usize,
    pub baseline_hour: u32,
    pub hour_controls: bool,
}

impl Default for DesignSettings {
    fn default() -> Self {
        let d = DesignOptions::default();
        Self {
            baseline_topic: d.baseline_topic,
            baseline_hour: d.baseline_hour,
            hour_controls: d.hour_controls,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub k_min: usize,
    pub k_max: usize,
    pub repeats: usize,
    pub holdout: Option<f64>,
    pub seed: u64,
    pub baseline: BaselineRule,
}

impl Default for SweepSettings {
    fn default() -> Self {
        let d = SweepConfig::default();
        Self {
            k_min: d.k_min,
            k_max: d.k_max,
            repeats: 1,
            holdout: d.holdout,
            seed: d.base_seed,
            baseline: d.baseline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    pub format: TableFormat,
    pub top_words: usize,
    /// Topic index (as a string key) to display name.
    pub topic_labels: BTreeMap<String, String>,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            format: TableFormat::Text,
            top_words: 10,
            topic_labels: BTreeMap::new(),
        }
    }
}

/// Full run configuration: defaults, overridden by a config file, overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tweets: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    pub debates: Option<PathBuf>,
    pub tweet_format: Option<TweetFormat>,
    pub ingest: IngestConfig,
    pub tokenizer: TokenizerConfig,
    pub lda: LdaSettings,
    pub design: DesignSettings,
    pub sweep: SweepSettings,
    pub report: ReportSettings,
    pub synth_seed: u64,
}

impl RunConfig {
    /// Parse a config file; relative input paths resolve against its directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut config.tweets,
            &mut config.snapshots,
            &mut config.debates,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    fn topic_labels(&self) -> HashMap<usize, String> {
        self.report
            .topic_labels
            .iter()
            .filter_map(|(k, v)| k.parse().ok().map(|k| (k, v.clone())))
            .collect()
    }

    /// Labels keyed by design column name (`topic_k`).
    fn column_labels(&self) -> HashMap<String, String> {
        self.topic_labels()
            .into_iter()
            .map(|(k, v)| (crate::design::topic_column(k), v))
            .collect()
    }

    pub fn apply_ingest(&mut self, a: &IngestArgs) {
        if let Some(p) = &a.tweets {
            self.tweets = Some(p.clone());
        }
        if let Some(p) = &a.snapshots {
            self.snapshots = Some(p.clone());
        }
        if let Some(p) = &a.debates {
            self.debates = Some(p.clone());
        }
        if let Some(f) = a.format {
            self.tweet_format = Some(f);
        }
        if let Some(m) = a.utc_offset_minutes {
            self.ingest.utc_offset_minutes = m;
        }
        if let Some(h) = a.max_staleness_hours {
            self.ingest.max_staleness_hours = Some(h);
        }
    }

    pub fn apply_lda(&mut self, a: &LdaArgs) {
        let l = &mut self.lda;
        if let Some(k) = a.topics {
            l.topics = k;
        }
        if a.alpha.is_some() {
            l.alpha = a.alpha;
        }
        if let Some(b) = a.beta {
            l.beta = b;
        }
        if let Some(i) = a.iters {
            l.iters = i;
        }
        if let Some(b) = a.burnin {
            l.burnin = b;
        }
        if let Some(t) = a.thin {
            l.thin = t;
        }
        if let Some(s) = a.seed {
            l.seed = s;
        }
    }

    pub fn apply_fit(&mut self, a: &FitArgs) {
        if let Some(t) = a.baseline_topic {
            self.design.baseline_topic = t;
        }
        if let Some(h) = a.baseline_hour {
            self.design.baseline_hour = h;
        }
        if a.no_hour_controls {
            self.design.hour_controls = false;
        }
    }

    pub fn apply_sweep(&mut self, a: &SweepArgs) {
        let s = &mut self.sweep;
        if let Some(k) = a.kmin {
            s.k_min = k;
        }
        if let Some(k) = a.kmax {
            s.k_max = k;
        }
        if let Some(r) = a.repeats {
            s.repeats = r;
        }
        if a.holdout.is_some() {
            s.holdout = a.holdout;
        }
        if let Some(seed) = a.seed {
            s.seed = seed;
        }
        if let Some(i) = a.iters {
            self.lda.iters = i;
        }
        if let Some(b) = a.burnin {
            self.lda.burnin = b;
        }
    }

    pub fn apply_report(&mut self, a: &ReportArgs) {
        if let Some(f) = a.format {
            self.report.format = f;
        }
        if let Some(n) = a.top_words {
            self.report.top_words = n;
        }
    }

    fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            k_min: self.sweep.k_min,
            k_max: self.sweep.k_max,
            alpha: self.lda.alpha,
            beta: self.lda.beta,
            iters: self.lda.iters,
            burnin: self.lda.burnin,
            thin: self.lda.thin,
            base_seed: self.sweep.seed,
            baseline: self.sweep.baseline,
            hour_controls: self.design.hour_controls,
            holdout: self.sweep.holdout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub tool: String,
    pub version: String,
    pub created_at: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub seeds: BTreeMap<String, u64>,
    pub rng: String,
    pub timings_ms: BTreeMap<String, f64>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn relative(out: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(out).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn file_entry(out: &Path, path: &Path) -> Result<FileEntry> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileEntry {
        path: relative(out, path),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

/// Collects a stage's outputs and writes its manifest.
struct Stage<'a> {
    name: &'static str,
    out: &'a Path,
    dir: PathBuf,
    config: &'a RunConfig,
    started: Instant,
    seeds: BTreeMap<String, u64>,
    timings_ms: BTreeMap<String, f64>,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
}

impl<'a> Stage<'a> {
    fn begin(name: &'static str, out: &'a Path, config: &'a RunConfig) -> Result<Self> {
        let dir = out.join(name);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        log::info!("stage {name}: writing to {}", dir.display());
        Ok(Self {
            name,
            out,
            dir,
            config,
            started: Instant::now(),
            seeds: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(file_entry(self.out, path)?);
        Ok(())
    }

    fn write(&mut self, file: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.dir.join(file);
        let bytes = bytes.as_ref();
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(FileEntry {
            path: relative(self.out, &path),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(file, bytes)
    }

    /// Register a file written by a helper that takes a path.
    fn record(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(file_entry(self.out, path)?);
        Ok(())
    }

    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let value = f()?;
        self.timings_ms
            .insert(label.to_string(), t.elapsed().as_secs_f64() * 1e3);
        Ok(value)
    }

    fn finish(mut self) -> Result<Manifest> {
        self.timings_ms
            .insert("total".into(), self.started.elapsed().as_secs_f64() * 1e3);
        let manifest = Manifest {
            stage: self.name.to_string(),
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_at: format_timestamp(&chrono::Utc::now()),
            config_hash: self.config.hash(),
            config: self.config.clone(),
            seeds: self.seeds,
            rng: RNG_NAME.to_string(),
            timings_ms: self.timings_ms,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let path = self.dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// Command that writes the artifacts in an output subdirectory.
fn producer(dir: &str) -> &str {
    match dir {
        "corpus" => "ingest",
        "design" => "fit",
        other => other,
    }
}

/// Path of an artifact in `dir`, or a "run <command> first" error.
fn require(out: &Path, dir: &str, file: &str) -> Result<PathBuf> {
    let path = out.join(dir).join(file);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingArtifact {
            stage: producer(dir).to_string(),
            path,
        })
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_json(&text)
}

fn existing_input(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let path = path.clone().ok_or_else(|| {
        Error::InvalidConfig(format!(
            "no {what} file given (flag --{what} or config key `{what}`)"
        ))
    })?;
    if !path.is_file() {
        return Err(Error::InvalidConfig(format!(
            "{what} file {} does not exist",
            path.display()
        )));
    }
    Ok(path)
}

pub fn cmd_ingest(out: &Path, config: &RunConfig) -> Result<Manifest> {
    let tweets_path = existing_input(&config.tweets, "tweets")?;
    let snapshots_path = existing_input(&config.snapshots, "snapshots")?;
    let debates_path = existing_input(&config.debates, "debates")?;
    let mut stage = Stage::begin("corpus", out, config)?;
    for p in [&tweets_path, &snapshots_path, &debates_path] {
        stage.input(p)?;
    }
    let format = config
        .tweet_format
        .unwrap_or_else(|| TweetFormat::from_path(&tweets_path));
    let (corpus, rows) = stage.time("ingest", || {
        let tweets = load_tweets(&tweets_path, format)?;
        let snapshots = load_snapshots(&snapshots_path)?;
        let schedule = load_schedule(&debates_path)?;
        let rows = build_rows(&tweets, &snapshots, &schedule, &config.ingest)?;
        let corpus = build_corpus(&tweets, &config.tokenizer)?;
        Ok((corpus, rows))
    })?;
    let missing = rows
        .iter()
        .filter(|r| r.followers_millions.is_none())
        .count();
    if missing > 0 {
        log::warn!("{missing} of {} tweets have no qualifying follower snapshot and are left out of the regression", rows.len());
    }
    let empty = corpus.empty_docs().len();
    if empty > 0 {
        log::warn!("{empty} documents have no tokens after filtering");
    }
    stage.write_json("corpus.json", &corpus)?;
    stage.write_json("rows.json", &rows)?;
    stage.write("vocab.txt", corpus.vocab.terms().join("\n") + "\n")?;
    let summary = summary_stats(&rows)?;
    stage.write("summary.csv", render_summary(&summary, TableFormat::Csv)?)?;
    println!(
        "ingested {} tweets ({} with follower data), vocabulary {} terms, {} tokens",
        rows.len(),
        rows.len() - missing,
        corpus.vocab.len(),
        corpus.num_tokens()
    );
    stage.finish()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthTruth {
    pub preset: String,
    pub spec: SynthSpec,
}

pub fn cmd_synth(out: &Path, config: &RunConfig, preset: &str) -> Result<Vec<Manifest>> {
    let spec = match preset {
        "campaign" => SynthSpec::campaign(config.synth_seed),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown synth preset `{other}` (available: campaign)"
            )))
        }
    };
    let mut stage = Stage::begin("synth", out, config)?;
    stage.seeds.insert("synth".into(), spec.seed);
    let data = stage.time("generate", || gen_campaign(&spec))?;
    let tweets = stage.dir.join("tweets.jsonl");
    write_tweets_jsonl(&tweets, &data.tweets)?;
    stage.record(&tweets)?;
    let snapshots = stage.dir.join("snapshots.csv");
    write_snapshots_csv(&snapshots, &data.snapshots)?;
    stage.record(&snapshots)?;
    let debates = stage.dir.join("debates.csv");
    write_schedule_csv(&debates, &data.schedule)?;
    stage.record(&debates)?;
    stage.write_json(
        "truth.json",
        &SynthTruth {
            preset: preset.to_string(),
            spec: spec.clone(),
        },
    )?;
    println!(
        "generated {} synthetic tweets ({preset} preset, seed {})",
        data.tweets.len(),
        spec.seed
    );
    let synth_manifest = stage.finish()?;

    let ingest_config = RunConfig {
        tweets: Some(tweets),
        snapshots: Some(snapshots),
        debates: Some(debates),
        tweet_format: Some(TweetFormat::Jsonl),
        ..config.clone()
    };
    let corpus_manifest = cmd_ingest(out, &ingest_config)?;
    Ok(vec![synth_manifest, corpus_manifest])
}

fn theta_csv(model: &TopicModel) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["doc_id".to_string()];
    header.extend((0..model.topics).map(crate::design::topic_column));
    w.write_record(&header)?;
    for (d, id) in model.doc_ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend(model.theta.row(d).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<theta csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn cmd_lda(out: &Path, config: &RunConfig) -> Result<Manifest> {
    let corpus_path = require(out, "corpus", "corpus.json")?;
    let corpus = load_corpus(&corpus_path)?;
    let lda_config = config.lda.config();
    lda_config.validate()?;
    let mut stage = Stage::begin("lda", out, config)?;
    stage.input(&corpus_path)?;
    stage.seeds.insert("lda".into(), lda_config.seed);
    let model = stage.time("gibbs", || fit_lda(&corpus, &lda_config))?;
    stage.write_json("model.json", &model)?;
    stage.write("theta.csv", theta_csv(&model)?)?;
    let topics = render_topic_table(
        &model,
        &corpus.vocab,
        config.report.top_words,
        &config.topic_labels(),
    );
    stage.write("topics.txt", &topics)?;
    let trace: String = std::iter::once("sweep,loglik".to_string())
        .chain(
            model
                .loglik_trace
                .iter()
                .enumerate()
                .map(|(s, ll)| format!("{},{ll}", s + 1)),
        )
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    stage.write("loglik.csv", trace)?;
    print!("{topics}");
    stage.finish()
}

/// Inference summary for one coefficient, written alongside the raw fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub stars: String,
}

fn coefficient_row(name: &str, estimate: f64, w: Option<Wald>) -> CoefficientRow {
    CoefficientRow {
        name: name.to_string(),
        estimate,
        se: w.map(|w| w.se),
        z: w.map(|w| w.z),
        p_value: w.map(|w| w.p_value),
        ci_low: w.map(|w| w.ci_low),
        ci_high: w.map(|w| w.ci_high),
        stars: w.map_or("", |w| stars(w.p_value)).to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbFitArtifact {
    pub coefficients: Vec<CoefficientRow>,
    pub ln_alpha: CoefficientRow,
    pub fit: NbFit,
}

impl NbFitArtifact {
    pub fn new(fit: NbFit) -> Self {
        let inference = |j: usize| {
            if fit.cov_reliable {
                wald(&fit, j).ok()
            } else {
                None
            }
        };
        let coefficients = fit
            .column_names
            .iter()
            .enumerate()
            .map(|(j, name)| coefficient_row(name, fit.coef[j], inference(j)))
            .collect();
        let alpha_wald = if fit.ln_alpha_at_bound {
            None
        } else {
            inference(fit.coef.len())
        };
        let ln_alpha = coefficient_row("ln_alpha", fit.ln_alpha, alpha_wald);
        Self {
            coefficients,
            ln_alpha,
            fit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTests {
    pub overdispersion: LrTest,
    /// Models compared, in `aic` order.
    pub models: Vec<String>,
    pub aic: AicComparison,
    pub preferred: String,
}

fn load_rows(path: &Path) -> Result<Vec<AnalysisRow>> {
    read_json(path)
}

fn load_model(out: &Path, corpus: &Corpus) -> Result<(PathBuf, TopicModel)> {
    let path = require(out, "lda", "model.json")?;
    let model: TopicModel = read_json(&path)?;
    if model.vocab_hash != corpus.vocab.hash() {
        return Err(Error::MissingArtifact {
            stage: "lda".into(),
            path: PathBuf::from(format!("{} (stale: vocabulary changed)", path.display())),
        });
    }
    Ok((path, model))
}

pub fn cmd_fit(out: &Path, config: &RunConfig) -> Result<Vec<Manifest>> {
    let corpus_path = require(out, "corpus", "corpus.json")?;
    let rows_path = require(out, "corpus", "rows.json")?;
    let corpus = load_corpus(&corpus_path)?;
    let (model_path, model) = load_model(out, &corpus)?;
    let rows = complete_rows(&load_rows(&rows_path)?);
    let options = DesignOptions {
        baseline_topic: config.design.baseline_topic,
        baseline_hour: config.design.baseline_hour,
        hour_controls: config.design.hour_controls,
        include_topics: true,
    };

    let mut design_stage = Stage::begin("design", out, config)?;
    for p in [&corpus_path, &rows_path, &model_path] {
        design_stage.input(p)?;
    }
    let design = design_stage.time("build", || {
        build_design(&rows, &model.doc_ids, &model.theta, &options)
    })?;
    let no_topics = build_design(
        &rows,
        &model.doc_ids,
        &model.theta,
        &DesignOptions {
            include_topics: false,
            ..options.clone()
        },
    )?;
    let design_path = design_stage.write("design.csv", design.to_csv()?)?;
    let design_manifest = design_stage.finish()?;

    let mut stage = Stage::begin("fit", out, config)?;
    stage.input(&design_path)?;
    stage.input(&model_path)?;
    stage.seeds.insert("lda".into(), model.config.seed);
    let nb = stage.time("nb", || fit_nb(&design, None))?;
    let poisson = stage.time("poisson", || fit_poisson(&design))?;
    let nb_base = stage.time("nb_no_topics", || fit_nb(&no_topics, None))?;
    if !nb.converged {
        log::warn!(
            "negative binomial fit did not converge (score norm {:.3e})",
            nb.score_norm
        );
    }
    let overdispersion = lr_test_overdispersion(&nb, &poisson)?;
    let aic = compare_aic(&[&nb_base, &nb])?;
    let models = vec!["no_topics".to_string(), "topics".to_string()];
    let tests = FitTests {
        overdispersion,
        preferred: models[aic.best].clone(),
        models,
        aic,
    };
    println!(
        "NB fit: {} observations, {} coefficients, ln(alpha) = {:.3}, AIC = {:.1} (without topics {:.1})",
        nb.n,
        nb.coef.len(),
        nb.ln_alpha,
        nb.aic,
        nb_base.aic
    );
    stage.write_json("nb.json", &NbFitArtifact::new(nb))?;
    stage.write_json("poisson.json", &poisson)?;
    stage.write_json("nb_no_topics.json", &NbFitArtifact::new(nb_base))?;
    stage.write_json("tests.json", &tests)?;
    Ok(vec![design_manifest, stage.finish()?])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub k_min: usize,
    pub k_max: usize,
    pub holdout: Option<f64>,
    pub base_seeds: Vec<u64>,
    pub chosen_k: Vec<usize>,
    pub modal_k: Option<usize>,
    pub results: Vec<crate::modelsel::SweepResult>,
}

pub fn cmd_sweep(out: &Path, config: &RunConfig) -> Result<Manifest> {
    let corpus_path = require(out, "corpus", "corpus.json")?;
    let rows_path = require(out, "corpus", "rows.json")?;
    let corpus = load_corpus(&corpus_path)?;
    let rows = load_rows(&rows_path)?;
    let sweep = config.sweep_config();
    let repeats = config.sweep.repeats.max(1);
    let mut stage = Stage::begin("sweep", out, config)?;
    stage.input(&corpus_path)?;
    stage.input(&rows_path)?;
    for r in 0..repeats {
        let base = sweep.base_seed.wrapping_add(r as u64);
        stage.seeds.insert(format!("base_{r}"), base);
    }
    let results = stage.time("sweep", || sweep_repeated(&corpus, &rows, &sweep, repeats))?;
    for (r, result) in results.iter().enumerate() {
        let name = if r == 0 {
            "sweep.csv".to_string()
        } else {
            format!("sweep_{r}.csv")
        };
        stage.write(&name, sweep_csv(result)?)?;
    }
    let summary = SweepSummary {
        k_min: sweep.k_min,
        k_max: sweep.k_max,
        holdout: sweep.holdout,
        base_seeds: (0..repeats)
            .map(|r| sweep.base_seed.wrapping_add(r as u64))
            .collect(),
        chosen_k: results.iter().map(|r| r.chosen_k).collect(),
        modal_k: modal_k(&results),
        results,
    };
    stage.write_json("sweep.json", &summary)?;
    for e in &summary.results[0].entries {
        println!(
            "K = {}: MAE {:.3}{}",
            e.k,
            e.mae,
            if e.converged { "" } else { " (failed)" }
        );
    }
    println!(
        "chosen K: {:?} (modal {:?})",
        summary.chosen_k, summary.modal_k
    );
    stage.finish()
}

fn table_ext(format: TableFormat) -> &'static str {
    match format {
        TableFormat::Text => "txt",
        TableFormat::Csv => "csv",
        TableFormat::Markdown => "md",
    }
}

pub fn cmd_report(out: &Path, config: &RunConfig) -> Result<Manifest> {
    let nb_path = require(out, "fit", "nb.json")?;
    let base_path = require(out, "fit", "nb_no_topics.json")?;
    let tests_path = require(out, "fit", "tests.json")?;
    let corpus_path = require(out, "corpus", "corpus.json")?;
    let rows_path = require(out, "corpus", "rows.json")?;
    let corpus = load_corpus(&corpus_path)?;
    let (model_path, model) = load_model(out, &corpus)?;
    let nb: NbFitArtifact = read_json(&nb_path)?;
    let base: NbFitArtifact = read_json(&base_path)?;
    let tests: FitTests = read_json(&tests_path)?;
    let rows = load_rows(&rows_path)?;

    let mut stage = Stage::begin("report", out, config)?;
    for p in [
        &nb_path,
        &base_path,
        &tests_path,
        &corpus_path,
        &rows_path,
        &model_path,
    ] {
        stage.input(p)?;
    }
    let format = config.report.format;
    let ext = table_ext(format);
    let labels = config.column_labels();
    let table = regression_table(&nb.fit, &labels)?.render(format)?;
    stage.write(&format!("regression.{ext}"), &table)?;
    let base_table = regression_table(&base.fit, &labels)?.render(format)?;
    stage.write(&format!("regression_no_topics.{ext}"), &base_table)?;
    stage.write(
        &format!("summary.{ext}"),
        render_summary(&summary_stats(&rows)?, format)?,
    )?;
    let topic_labels = config.topic_labels();
    stage.write(
        "topics.txt",
        render_topic_table(
            &model,
            &corpus.vocab,
            config.report.top_words,
            &topic_labels,
        ),
    )?;

    let topic_names: Vec<String> = nb
        .fit
        .column_names
        .iter()
        .filter(|c| c.starts_with("topic_"))
        .cloned()
        .collect();
    if nb.fit.cov_reliable && !topic_names.is_empty() {
        let points = ci_points(&nb.fit, &topic_names, &labels)?;
        let baseline = config.design.baseline_topic;
        let baseline_label = topic_labels
            .get(&baseline)
            .cloned()
            .unwrap_or_else(|| format!("Topic {baseline}"));
        stage.write("ci.svg", ci_svg(&points, &baseline_label))?;
        stage.write("ci.csv", ci_csv(&points)?)?;
    } else {
        log::warn!("covariance unreliable; coefficient plot skipped");
    }

    let mut comparison = String::new();
    comparison.push_str("Model comparison\n");
    for (name, (aic, delta)) in tests
        .models
        .iter()
        .zip(tests.aic.aic.iter().zip(&tests.aic.delta))
    {
        comparison.push_str(&format!("{name:<12} AIC {aic:>12.1}  delta {delta:>8.1}\n"));
    }
    comparison.push_str(&format!("preferred by AIC: {}\n", tests.preferred));
    comparison.push_str(&format!(
        "over-dispersion LR test: statistic {:.3}, p = {:.3e}\n",
        tests.overdispersion.statistic, tests.overdispersion.p_value
    ));
    if let Ok(sweep_path) = require(out, "sweep", "sweep.json") {
        let sweep: SweepSummary = read_json(&sweep_path)?;
        stage.input(&sweep_path)?;
        comparison.push_str("\nTopic-count sweep (MAE)\n");
        for e in &sweep.results[0].entries {
            comparison.push_str(&format!("K = {}  MAE {:.3}\n", e.k, e.mae));
        }
        comparison.push_str(&format!("chosen K: {:?}\n", sweep.chosen_k));
    }
    stage.write("comparison.txt", &comparison)?;
    print!("{table}");
    stage.finish()
}

/// Load the config file (if any) and apply the subcommand's flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Synth(a) => {
            if let Some(s) = a.seed {
                config.synth_seed = s;
            }
        }
        Command::Ingest(a) => config.apply_ingest(a),
        Command::Lda(a) => config.apply_lda(a),
        Command::Fit(a) => config.apply_fit(a),
        Command::Sweep(a) => config.apply_sweep(a),
        Command::Report(a) => config.apply_report(a),
    }
    Ok(config)
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = resolve_config(cli)?;
    let out = &cli.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    match &cli.command {
        Command::Synth(a) => cmd_synth(out, &config, &a.preset).map(drop),
        Command::Ingest(_) => cmd_ingest(out, &config).map(drop),
        Command::Lda(_) => cmd_lda(out, &config).map(drop),
        Command::Fit(_) => cmd_fit(out, &config).map(drop),
        Command::Sweep(_) => cmd_sweep(out, &config).map(drop),
        Command::Report(_) => cmd_report(out, &config).map(drop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("topiclikes").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(
            &cfg,
            "tweets = \"data/t.jsonl\"\n[lda]\ntopics = 6\niters = 200\nburnin = 100\n",
        )
        .unwrap();
        let cli = parse(&["--config", cfg.to_str().unwrap(), "lda", "--topics", "3"]);
        let config = resolve_config(&cli).unwrap();
        assert_eq!(config.lda.topics, 3);
        assert_eq!(config.lda.iters, 200);
        assert_eq!(config.lda.thin, 10);
        assert_eq!(config.tweets.unwrap(), dir.path().join("data/t.jsonl"));
        assert_eq!(config.lda.config().alpha, 50.0 / 3.0);
    }

    #[test]
    fn json_config_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.json");
        fs::write(&cfg, r#"{"sweep": {"k_min": 3, "k_max": 5}, "report": {"topic_labels": {"2": "Democrats"}}}"#).unwrap();
        let config = RunConfig::load(&cfg).unwrap();
        assert_eq!((config.sweep.k_min, config.sweep.k_max), (3, 5));
        assert_eq!(config.column_labels()["topic_2"], "Democrats");
        fs::write(&cfg, r#"{"lda": {"topcs": 3}}"#).unwrap();
        assert!(RunConfig::load(&cfg).is_err());
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.lda.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn missing_artifact_names_stage() {
        let dir = tempfile::tempdir().unwrap();
        let err = cmd_lda(dir.path(), &RunConfig::default()).unwrap_err();
        assert!(err.to_string().contains("run ingest first"), "{err}");
        assert_eq!(err.exit_kind(), crate::error::ExitKind::Usage);
        let err = cmd_report(dir.path(), &RunConfig::default()).unwrap_err();
        assert!(err.to_string().contains("run fit first"), "{err}");
    }

    #[test]
    fn missing_inputs_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            tweets: Some(dir.path().join("nope.jsonl")),
            ..Default::default()
        };
        let err = cmd_ingest(dir.path(), &config).unwrap_err();
        assert_eq!(err.exit_kind(), crate::error::ExitKind::Usage);
    }
}
