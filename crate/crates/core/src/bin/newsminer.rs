use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use newsminer::config::{parse_ranks, parse_rules, validate_config, ConfigErrors, PipelineConfig};
use newsminer::factor::{
    self, bicluster, hac, linkage, linkage_names, tfidf_row_normalize, tucker3, BiclusterConfig,
    TuckerConfig,
};
use newsminer::pipeline::{self as p, PipelineError, Stage};
use newsminer::records::write_text;
use newsminer::toy::write_toy_corpus;

#[derive(Parser)]
#[command(name = "newsminer", version, about = "Mine closed-caption news streams")]
struct Cli {
    /// TOML configuration file; paths in it are relative to its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured artifact directory.
    #[arg(long, global = true)]
    work: Option<PathBuf>,
    /// Generate the bundled toy corpus under the work directory and run every stage.
    #[arg(long)]
    toy: bool,
    /// Log verbosity (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a contiguous range of stages from the configuration.
    Run {
        /// Comma-separated stages (default: all).
        #[arg(long, value_delimiter = ',')]
        stages: Vec<Stage>,
    },
    /// Parse caption files and partition them by provider.
    Ingest {
        #[arg(long)]
        captions: Option<PathBuf>,
        #[arg(long)]
        guide: Option<PathBuf>,
        #[arg(long)]
        channels: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split caption lines into sentences.
    Segment {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// TOML file of segmentation keys.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tokenize, tag and link entity mentions.
    Annotate {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        #[arg(long)]
        tag_lexicon: Option<PathBuf>,
        #[arg(long)]
        suffix_rules: Option<PathBuf>,
        /// External annotations used instead of the built-in tagger.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-mention sentiment and readability.
    Score {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the matcher, match sentences to stories, qualify matchings.
    Match {
        #[command(subcommand)]
        step: MatchStep,
    },
    /// Write one report (or all reports plus clustering outputs).
    Analyze {
        /// Report name; omit for everything.
        report: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clustering and decomposition on text-format arrays.
    Cluster {
        #[command(subcommand)]
        method: ClusterMethod,
    },
}

#[derive(Args)]
struct MatchParams {
    #[arg(long)]
    window_ms: Option<i64>,
    #[arg(long)]
    min_evidence: Option<usize>,
    #[arg(long)]
    precision_target: Option<f64>,
}

#[derive(Subcommand)]
enum MatchStep {
    Train {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: MatchParams,
    },
    Run {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Qualify {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: MatchParams,
    },
}

#[derive(Subcommand)]
enum ClusterMethod {
    /// Agglomerative clustering of matrix rows.
    Hac {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "average")]
        linkage: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sparse biclustering of a count matrix.
    Bicluster {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        sparsity: f64,
        /// Use the values as given instead of TF-IDF weighting.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Three-way Tucker decomposition; writes the fit and a projection.
    Tucker {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "3,2,3")]
        ranks: String,
        /// Apply ln(1 + x) before decomposing.
        #[arg(long)]
        log_counts: bool,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn config_error(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(ConfigErrors(vec![msg.into()]))
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new("."));
            validate_config(&text, base)?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.train.seed = seed;
    }
    if let Some(work) = &cli.work {
        config.paths.work = work.clone();
    }
    Ok(config)
}

/// An explicit flag, else the configured path, else a config error.
fn pick(flag: &Option<PathBuf>, configured: &Option<PathBuf>, name: &str) -> Result<PathBuf, PipelineError> {
    flag.clone()
        .or_else(|| configured.clone())
        .ok_or_else(|| config_error(format!("missing --{name} (or paths.{name} in the configuration)")))
}

fn artifact(flag: &Option<PathBuf>, config: &PipelineConfig, name: &str) -> PathBuf {
    flag.clone().unwrap_or_else(|| config.paths.work.join(name))
}

fn apply_match_params(config: &mut PipelineConfig, m: &MatchParams) -> Result<(), PipelineError> {
    let mut errors = Vec::new();
    if let Some(w) = m.window_ms {
        if w <= 0 {
            errors.push(format!("--window-ms: must be > 0, got {w}"));
        }
        config.qualify.window_ms = w;
    }
    if let Some(e) = m.min_evidence {
        if e < 1 {
            errors.push("--min-evidence: must be >= 1".to_string());
        }
        config.qualify.min_evidence = e;
    }
    if let Some(t) = m.precision_target {
        if !(t > 0.0 && t <= 1.0) {
            errors.push(format!("--precision-target: must be in (0, 1], got {t}"));
        }
        config.train.precision_target = t;
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::Config(ConfigErrors(errors)))
    }
}

fn run_toy(cli: &Cli) -> Result<(), PipelineError> {
    let dir = cli.work.clone().unwrap_or_else(|| PathBuf::from("newsminer-toy"));
    let seed = cli.seed.unwrap_or(42);
    let corpus = write_toy_corpus(&dir, seed)?;
    let text = std::fs::read_to_string(&corpus.config).map_err(|e| PipelineError::Data(e.to_string()))?;
    let mut config = validate_config(&text, &dir)?;
    config.seed = seed;
    config.train.seed = seed;
    // stale artifacts from an earlier run would end up in the manifest
    if corpus.work.exists() {
        std::fs::remove_dir_all(&corpus.work).map_err(|e| PipelineError::Data(e.to_string()))?;
    }
    let manifest = p::run_pipeline(&config, &Stage::ALL)?;
    println!("{}", corpus.work.join(newsminer::records::MANIFEST).display());
    tracing::info!(files = manifest.lines().count(), "toy pipeline complete");
    Ok(())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    if cli.toy {
        if cli.command.is_some() {
            return Err(config_error("--toy runs every stage and takes no subcommand"));
        }
        return run_toy(&cli);
    }
    let mut config = load_config(&cli)?;
    let Some(command) = &cli.command else {
        return Err(config_error("no command given (try --help)"));
    };
    let paths = config.paths.clone();
    match command {
        Command::Run { stages } => {
            let stages = if stages.is_empty() { Stage::ALL.to_vec() } else { stages.clone() };
            p::run_pipeline(&config, &stages)?;
            println!("{}", config.paths.work.join(newsminer::records::MANIFEST).display());
        }
        Command::Ingest { captions, guide, channels, out } => {
            let s = p::run_ingest(
                &pick(captions, &paths.captions, "captions")?,
                &pick(guide, &paths.guide, "guide")?,
                &pick(channels, &paths.channels, "channels")?,
                &artifact(out, &config, p::CORPUS),
            )?;
            println!(
                "lines\t{}\nrejects\t{}\norder_violations\t{}\noff_guide\t{}",
                s.lines, s.rejects, s.order_violations, s.off_guide
            );
        }
        Command::Segment { input, rules, out } => {
            if let Some(r) = rules {
                let text = std::fs::read_to_string(r).map_err(|e| config_error(format!("{}: {e}", r.display())))?;
                config.segmentation = parse_rules(&text)?;
            }
            let input = artifact(input, &config, p::CORPUS);
            p::require(Stage::Segment, &input, Stage::Ingest)?;
            let n = p::run_segment(&input, &config.segmentation, &artifact(out, &config, p::SENTENCES))?;
            println!("sentences\t{n}");
        }
        Command::Annotate { input, gazetteer, tag_lexicon, suffix_rules, annotations, out } => {
            let input = artifact(input, &config, p::SENTENCES);
            p::require(Stage::Annotate, &input, Stage::Segment)?;
            let gazetteer = pick(gazetteer, &paths.gazetteer, "gazetteer")?;
            let tag_lexicon = tag_lexicon.clone().or(paths.tag_lexicon.clone());
            let suffix_rules = suffix_rules.clone().or(paths.suffix_rules.clone());
            let annotations = annotations.clone().or(paths.annotations.clone());
            let with = p::AnnotateInputs {
                gazetteer: &gazetteer,
                tag_lexicon: tag_lexicon.as_deref(),
                suffix_rules: suffix_rules.as_deref(),
                annotations: annotations.as_deref(),
                min_salience: config.min_salience,
            };
            let n = p::run_annotate(&input, &with, &artifact(out, &config, p::ANNOTATED))?;
            println!("sentences\t{n}");
        }
        Command::Score { input, lexicon, out } => {
            let input = artifact(input, &config, p::ANNOTATED);
            p::require(Stage::Score, &input, Stage::Annotate)?;
            let n = p::run_score(&input, &pick(lexicon, &paths.lexicon, "lexicon")?, &artifact(out, &config, p::SCORED))?;
            println!("sentences\t{n}");
        }
        Command::Match { step } => match step {
            MatchStep::Train { input, labels, out, params } => {
                apply_match_params(&mut config, params)?;
                let input = artifact(input, &config, p::SCORED);
                p::require(Stage::Match, &input, Stage::Score)?;
                let models = p::run_train(
                    &input,
                    &pick(&None, &paths.stories, "stories")?,
                    &pick(labels, &paths.labels, "labels")?,
                    &pick(&None, &paths.gazetteer, "gazetteer")?,
                    &config.train,
                    &artifact(out, &config, p::MODELS),
                )?;
                for m in &models {
                    let precision = m.holdout_precision.map_or("-".to_string(), |v| format!("{v:.4}"));
                    println!("{}\tthreshold {:.4}\tholdout_precision {precision}", m.model.genre, m.model.threshold);
                }
            }
            MatchStep::Run { input, models, out } => {
                let input = artifact(input, &config, p::SCORED);
                p::require(Stage::Match, &input, Stage::Score)?;
                let models = artifact(models, &config, p::MODELS);
                p::require(Stage::Match, &models, Stage::Match)?;
                let n = p::run_match(
                    &input,
                    &pick(&None, &paths.stories, "stories")?,
                    &pick(&None, &paths.gazetteer, "gazetteer")?,
                    &models,
                    &artifact(out, &config, p::MATCHES),
                )?;
                println!("matches\t{n}");
            }
            MatchStep::Qualify { input, out, params } => {
                apply_match_params(&mut config, params)?;
                let input = artifact(input, &config, p::MATCHES);
                p::require(Stage::Match, &input, Stage::Match)?;
                let n = p::run_qualify(&input, &config.qualify, &artifact(out, &config, p::QUALIFIED))?;
                println!("qualified\t{n}");
            }
        },
        Command::Analyze { report, out } => {
            let work = &config.paths.work;
            let with = p::AnalyzeInputs {
                scored: &work.join(p::SCORED),
                matches: &work.join(p::MATCHES),
                qualified: &work.join(p::QUALIFIED),
                stories: paths.stories.as_deref(),
                professions: paths.professions.as_deref(),
                stopwords: paths.stopwords.as_deref(),
            };
            let input = p::load_analysis(&with, &config.analytics)?;
            let out = artifact(out, &config, p::REPORTS);
            let written = match report {
                Some(name) => p::run_reports(&input, Some(name), &out)?,
                None => p::run_analyze(&input, &config.factor, config.seed, &out)?,
            };
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Cluster { method } => run_cluster(method, config.seed)?,
    }
    Ok(())
}

fn read_array(path: &Path) -> Result<factor::ArrayText, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
    Ok(factor::parse_array(&text)?)
}

fn run_cluster(method: &ClusterMethod, seed: u64) -> Result<(), PipelineError> {
    match method {
        ClusterMethod::Hac { input, linkage: name, out } => {
            let link = linkage(name).ok_or_else(|| {
                config_error(format!(
                    "unknown linkage `{name}` (known: {})",
                    linkage_names().collect::<Vec<_>>().join(", ")
                ))
            })?;
            let a = read_array(input)?;
            let m = a.to_matrix()?;
            let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
            let d = hac(&a.labels[0], &rows, link)?;
            write_text(out, &(serde_json::to_string_pretty(&d)? + "\n"))?;
        }
        ClusterMethod::Bicluster { input, k, sparsity, raw, out } => {
            let a = read_array(input)?;
            let m = a.to_matrix()?;
            let x = if *raw { m } else { tfidf_row_normalize(&m) };
            let result = bicluster(
                &x,
                &BiclusterConfig {
                    k: *k,
                    sparsity: *sparsity,
                    seed,
                    ..Default::default()
                },
            )?;
            write_text(out, &p::render_biclusters(&result, &a.labels[0], &a.labels[1]))?;
        }
        ClusterMethod::Tucker { input, ranks, log_counts, out } => {
            let ranks = parse_ranks(ranks).map_err(|e| config_error(format!("--ranks: {e}")))?;
            let a = read_array(input)?;
            let mut x = a.to_tensor()?;
            if *log_counts {
                x = x.map(f64::ln_1p);
            }
            let model = tucker3(&x, &TuckerConfig { ranks, ..Default::default() })?;
            write_text(&out.join("tucker_fit.txt"), &p::render_tucker_fit(&model, ranks))?;
            write_text(&out.join("projection.tsv"), &p::render_projection(&model, &a.labels)?)?;
            println!("fit\t{:.6}", model.fit);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level)))
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
