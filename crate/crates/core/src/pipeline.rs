//! Stage runners. Each stage reads its predecessor's artifact and writes its
//! own; reruns on unchanged inputs reproduce identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{self, AnalysisInput, AnalyticsParams};
use crate::annotate::{self, ingest_external_annotations, AnnotatedSentence, Gazetteer, LexiconTagger};
use crate::config::{ConfigErrors, FactorParams, PipelineConfig};
use crate::factor::{
    self, bicluster, hac, linkage, project, tfidf_row_normalize, tucker3, ArrayText, BiclusterConfig,
    Mode, Tensor3, TuckerConfig, TuckerModel,
};
use crate::ingest::{self, parse_caption_stream, CaptionLine, Genre, Provider};
use crate::matching::{
    classify, extract_features, parse_labels, qualify, train_matcher, Features, Label, MatchModel,
    QualifiedMatching, QualifyConfig, SentenceMatch, Story, StoryPool, StoryRecord, TrainConfig,
};
use crate::records::{read_jsonl, write_jsonl, write_manifest, write_text, RecordError};
use crate::scoring::{self, ScoredSentence, ValenceLexicon};
use crate::segment::{segment, SegmentationRules, Sentence};

pub const CORPUS: &str = "corpus.jsonl";
pub const REJECTS: &str = "rejects.tsv";
pub const SENTENCES: &str = "sentences.jsonl";
pub const ANNOTATED: &str = "annotated.jsonl";
pub const SCORED: &str = "scored.jsonl";
pub const MODELS: &str = "models.json";
pub const MATCHES: &str = "matches.jsonl";
pub const QUALIFIED: &str = "qualified.jsonl";
pub const REPORTS: &str = "reports";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error:\n{0}")]
    Config(ConfigErrors),
    #[error("{0}")]
    Data(String),
    #[error("stage `{stage}` needs {missing}; run `{run_first}` first")]
    StageOrder {
        stage: Stage,
        missing: String,
        run_first: Stage,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Data(_) => 3,
            PipelineError::StageOrder { .. } => 4,
        }
    }

    fn data(e: impl fmt::Display) -> Self {
        PipelineError::Data(e.to_string())
    }
}

impl From<ConfigErrors> for PipelineError {
    fn from(e: ConfigErrors) -> Self {
        PipelineError::Config(e)
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {
        $(impl From<$t> for PipelineError {
            fn from(e: $t) -> Self {
                PipelineError::data(e)
            }
        })*
    };
}

data_error!(
    RecordError,
    ingest::IngestError,
    annotate::AnnotateError,
    scoring::ScoringError,
    crate::matching::MatchError,
    analytics::AnalyticsError,
    factor::FactorError,
    serde_json::Error
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Segment,
    Annotate,
    Score,
    Match,
    Analyze,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Segment,
        Stage::Annotate,
        Stage::Score,
        Stage::Match,
        Stage::Analyze,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Segment => "segment",
            Stage::Annotate => "annotate",
            Stage::Score => "score",
            Stage::Match => "match",
            Stage::Analyze => "analyze",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// Fails with a stage-order error when `path` (produced by `producer`) is missing.
pub fn require(stage: Stage, path: &Path, producer: Stage) -> Result<(), PipelineError> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::StageOrder {
            stage,
            missing: path.display().to_string(),
            run_first: producer,
        })
    }
}

fn required<'a>(stage: Stage, what: &str, p: &'a Option<PathBuf>) -> Result<&'a Path, PipelineError> {
    p.as_deref().ok_or_else(|| {
        PipelineError::Config(ConfigErrors(vec![format!("stage `{stage}` needs paths.{what}")]))
    })
}

/// A caption line tagged with the provider airing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub provider: Provider,
    #[serde(flatten)]
    pub line: CaptionLine,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IngestSummary {
    pub lines: usize,
    pub rejects: usize,
    pub order_violations: usize,
    pub off_guide: usize,
}

/// Parses every caption file in `captions` (channel id = file stem) and keeps
/// lines that fall in news programs.
pub fn run_ingest(
    captions: &Path,
    guide: &Path,
    channels: &Path,
    out: &Path,
) -> Result<IngestSummary, PipelineError> {
    let guide = ingest::load_guide(guide)?;
    let channels = ingest::load_channel_map(channels)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(captions)
        .map_err(|e| PipelineError::Data(format!("{}: {e}", captions.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();

    let mut summary = IngestSummary::default();
    let mut rejects = String::from("channel_id\tline_no\treason\tcontent\n");
    let mut lines = Vec::new();
    for path in files {
        let channel = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let raw = std::fs::read_to_string(&path)
            .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
        let parsed = parse_caption_stream(&raw, &channel);
        for r in &parsed.rejects {
            rejects.push_str(&format!("{channel}\t{}\t{}\t{}\n", r.line_no, r.reason, r.content));
        }
        for v in &parsed.order_violations {
            tracing::warn!(channel, line = v.line_no, "timestamp earlier than previous line");
        }
        summary.rejects += parsed.rejects.len();
        summary.order_violations += parsed.order_violations.len();
        lines.extend(parsed.lines);
    }
    let total = lines.len();
    let by_provider = ingest::partition_by_provider(&lines, &guide, &channels)?;
    let mut records = Vec::new();
    for (provider, mut lines) in by_provider {
        lines.sort_by_key(|l| l.ts_ms);
        records.extend(lines.into_iter().map(|line| CorpusRecord {
            provider: provider.clone(),
            line,
        }));
    }
    summary.lines = records.len();
    summary.off_guide = total - records.len();
    write_jsonl(out, &records)?;
    write_text(&out.with_file_name(REJECTS), &rejects)?;
    Ok(summary)
}

pub fn run_segment(input: &Path, rules: &SegmentationRules, out: &Path) -> Result<usize, PipelineError> {
    rules.validate().map_err(|e| PipelineError::Config(ConfigErrors(vec![e.to_string()])))?;
    let records: Vec<CorpusRecord> = read_jsonl(input)?;
    let mut by_provider: BTreeMap<Provider, Vec<CaptionLine>> = BTreeMap::new();
    for r in records {
        by_provider.entry(r.provider).or_default().push(r.line);
    }
    let mut sentences = Vec::new();
    for (provider, mut lines) in by_provider {
        lines.sort_by_key(|l| l.ts_ms);
        sentences.extend(segment(&provider, &lines, rules));
    }
    Ok(write_jsonl(out, &sentences)?)
}

pub struct AnnotateInputs<'a> {
    pub gazetteer: &'a Path,
    pub tag_lexicon: Option<&'a Path>,
    pub suffix_rules: Option<&'a Path>,
    pub annotations: Option<&'a Path>,
    pub min_salience: f64,
}

pub fn run_annotate(input: &Path, with: &AnnotateInputs, out: &Path) -> Result<usize, PipelineError> {
    let sentences: Vec<Sentence> = read_jsonl(input)?;
    let gazetteer = Gazetteer::load(with.gazetteer)?;
    let annotated: Vec<AnnotatedSentence> = match with.annotations {
        Some(path) => ingest_external_annotations(path, sentences, &gazetteer)?
            .into_iter()
            .map(|mut a| {
                a.mentions.retain(|m| m.salience >= with.min_salience);
                a
            })
            .collect(),
        None => {
            let (Some(lex), Some(suf)) = (with.tag_lexicon, with.suffix_rules) else {
                return Err(PipelineError::Config(ConfigErrors(vec![
                    "annotate needs paths.tag_lexicon and paths.suffix_rules (or paths.annotations)".into(),
                ])));
            };
            let tagger = LexiconTagger::load(lex, suf)?;
            sentences
                .into_iter()
                .map(|s| annotate::annotate(s, &tagger, &gazetteer, with.min_salience))
                .collect()
        }
    };
    Ok(write_jsonl(out, &annotated)?)
}

pub fn run_score(input: &Path, lexicon_dir: &Path, out: &Path) -> Result<usize, PipelineError> {
    let annotated: Vec<AnnotatedSentence> = read_jsonl(input)?;
    let lexicon = ValenceLexicon::load_dir(lexicon_dir)?;
    let scored: Vec<ScoredSentence> = annotated.into_iter().map(|a| scoring::score(a, &lexicon)).collect();
    Ok(write_jsonl(out, &scored)?)
}

pub fn load_stories(path: &Path, gazetteer: &Gazetteer) -> Result<StoryPool, PipelineError> {
    let records: Vec<StoryRecord> = read_jsonl(path)?;
    let stories = records
        .iter()
        .map(|r| Story::from_record(r, gazetteer))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StoryPool::new(stories))
}

/// A trained per-genre model with its held-out diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub model: MatchModel,
    pub holdout_precision: Option<f64>,
    pub epochs: usize,
    pub examples: usize,
    pub warning: Option<String>,
}

/// Labeled feature vectors per genre. Labels whose sentence or story is
/// unknown, or whose genres differ, are skipped with a warning.
pub fn training_examples(
    sentences: &[ScoredSentence],
    pool: &StoryPool,
    labels_text: &str,
    labels_file: &str,
) -> Result<BTreeMap<Genre, Vec<(Features, bool)>>, PipelineError> {
    let by_id: BTreeMap<&str, &AnnotatedSentence> = sentences
        .iter()
        .map(|s| (s.annotated.sentence.id.as_str(), &s.annotated))
        .collect();
    let mut out: BTreeMap<Genre, Vec<(Features, bool)>> = BTreeMap::new();
    let mut skipped = 0usize;
    for row in parse_labels(labels_text, labels_file)? {
        let (Some(s), Some(story)) = (by_id.get(row.sentence_ref.as_str()), pool.get(&row.story_id)) else {
            skipped += 1;
            continue;
        };
        if s.sentence.provider.genre != story.genre {
            skipped += 1;
            continue;
        }
        let f = extract_features(&s.mentions, s.sentence.start_ms, story);
        out.entry(story.genre).or_default().push((f, row.label == Label::Same));
    }
    if skipped > 0 {
        tracing::warn!(skipped, "labels skipped: unknown sentence or story, or cross-genre pair");
    }
    Ok(out)
}

pub fn run_train(
    scored: &Path,
    stories: &Path,
    labels: &Path,
    gazetteer: &Path,
    config: &TrainConfig,
    out: &Path,
) -> Result<Vec<ModelEntry>, PipelineError> {
    let sentences: Vec<ScoredSentence> = read_jsonl(scored)?;
    let gazetteer = Gazetteer::load(gazetteer)?;
    let pool = load_stories(stories, &gazetteer)?;
    let text = std::fs::read_to_string(labels).map_err(|e| PipelineError::Data(format!("{}: {e}", labels.display())))?;
    let examples = training_examples(&sentences, &pool, &text, &labels.display().to_string())?;
    let mut models = Vec::new();
    for (genre, ex) in examples {
        match train_matcher(&ex, genre, config) {
            Ok(r) => models.push(ModelEntry {
                model: r.model,
                holdout_precision: r.holdout_precision,
                epochs: r.epochs,
                examples: ex.len(),
                warning: r.warning,
            }),
            Err(e) => tracing::warn!("{genre}: no model trained: {e}"),
        }
    }
    let mut json = serde_json::to_string_pretty(&models)?;
    json.push('\n');
    write_text(out, &json)?;
    Ok(models)
}

pub fn run_match(
    scored: &Path,
    stories: &Path,
    gazetteer: &Path,
    models: &Path,
    out: &Path,
) -> Result<usize, PipelineError> {
    let sentences: Vec<ScoredSentence> = read_jsonl(scored)?;
    let gazetteer = Gazetteer::load(gazetteer)?;
    let pool = load_stories(stories, &gazetteer)?;
    let text = std::fs::read_to_string(models).map_err(|e| PipelineError::Data(format!("{}: {e}", models.display())))?;
    let entries: Vec<ModelEntry> = serde_json::from_str(&text)?;
    let by_genre: BTreeMap<Genre, &MatchModel> = entries.iter().map(|e| (e.model.genre, &e.model)).collect();
    let mut matches = Vec::new();
    for s in &sentences {
        let a = &s.annotated;
        let Some(model) = by_genre.get(&a.sentence.provider.genre) else {
            continue;
        };
        for (story_id, score) in classify(a, &pool, model, a.sentence.start_ms) {
            matches.push(SentenceMatch {
                sentence: a.sentence.id.clone(),
                provider: a.sentence.provider.clone(),
                story_id,
                ts: a.sentence.start_ms,
                score,
            });
        }
    }
    Ok(write_jsonl(out, &matches)?)
}

pub fn run_qualify(matches: &Path, config: &QualifyConfig, out: &Path) -> Result<usize, PipelineError> {
    let m: Vec<SentenceMatch> = read_jsonl(matches)?;
    Ok(write_jsonl(out, &qualify(&m, config))?)
}

fn read_lines(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

/// `entity_id \t area/activity` rows.
pub fn parse_professions(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .map(|(e, p)| (e.trim().to_string(), p.trim().to_string()))
        .collect()
}

pub struct AnalyzeInputs<'a> {
    pub scored: &'a Path,
    pub matches: &'a Path,
    pub qualified: &'a Path,
    pub stories: Option<&'a Path>,
    pub professions: Option<&'a Path>,
    pub stopwords: Option<&'a Path>,
}

pub fn load_analysis(with: &AnalyzeInputs, params: &AnalyticsParams) -> Result<AnalysisInput, PipelineError> {
    require(Stage::Analyze, with.scored, Stage::Score)?;
    require(Stage::Analyze, with.matches, Stage::Match)?;
    require(Stage::Analyze, with.qualified, Stage::Match)?;
    let sentences: Vec<ScoredSentence> = read_jsonl(with.scored)?;
    let matches: Vec<SentenceMatch> = read_jsonl(with.matches)?;
    let qualified: Vec<QualifiedMatching> = read_jsonl(with.qualified)?;
    let stories: Vec<(String, Genre)> = match with.stories {
        Some(p) => {
            let recs: Vec<StoryRecord> = read_jsonl(p)?;
            recs.into_iter().map(|r| (r.story_id, r.genre)).collect()
        }
        None => qualified
            .iter()
            .map(|q| (q.story_id.clone(), q.provider.genre))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let professions = match with.professions {
        Some(p) => parse_professions(&read_lines(p)?),
        None => BTreeMap::new(),
    };
    let mut params = params.clone();
    if let Some(p) = with.stopwords {
        params.outliers.stopwords = read_lines(p)?
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
    }
    Ok(AnalysisInput {
        sentences,
        matches,
        qualified,
        stories,
        professions,
        params,
    })
}

/// Writes one report (or all of them) into `out_dir`; returns written paths.
pub fn run_reports(input: &AnalysisInput, name: Option<&str>, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let selected: Vec<&dyn analytics::Report> = match name {
        Some(n) => vec![analytics::report(n).ok_or_else(|| {
            let known: Vec<_> = analytics::report_names().collect();
            PipelineError::Config(ConfigErrors(vec![format!(
                "unknown report `{n}` (known: {})",
                known.join(", ")
            )]))
        })?],
        None => analytics::reports().to_vec(),
    };
    let mut written = Vec::new();
    for r in selected {
        let path = out_dir.join(format!("{}.tsv", r.name()));
        write_text(&path, &r.render(input)?)?;
        written.push(path);
    }
    Ok(written)
}

fn is_word(t: &annotate::Token) -> bool {
    !t.is_punctuation() && !annotate::is_numeric(&t.surface)
}

/// Row labels, column labels and rows of a dense matrix.
pub type LabeledRows = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

/// Provider style vectors over the union of categories, for clustering.
pub fn provider_style_matrix(input: &AnalysisInput) -> Result<LabeledRows, PipelineError> {
    let mut vectors = Vec::new();
    let mut per: BTreeMap<&Provider, Vec<&annotate::Token>> = BTreeMap::new();
    for s in &input.sentences {
        per.entry(&s.annotated.sentence.provider).or_default().extend(&s.annotated.tokens);
    }
    for (p, tokens) in per {
        vectors.push(analytics::style_vector(&p.id(), tokens)?);
    }
    let categories: Vec<String> = vectors
        .iter()
        .flat_map(|v| v.category_freqs.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let rows = vectors
        .iter()
        .map(|v| categories.iter().map(|c| v.category_freqs.get(c).copied().unwrap_or(0.0)).collect())
        .collect();
    Ok((vectors.into_iter().map(|v| v.owner).collect(), categories, rows))
}

/// Provider × word counts over the `max_words` most frequent content words.
pub fn provider_word_counts(input: &AnalysisInput, max_words: usize) -> ArrayText {
    let stop = &input.params.outliers.stopwords;
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    let mut per: BTreeMap<&Provider, BTreeMap<&str, usize>> = BTreeMap::new();
    for s in &input.sentences {
        let row = per.entry(&s.annotated.sentence.provider).or_default();
        for t in s.annotated.tokens.iter().filter(|t| is_word(t) && !stop.contains(&t.lower)) {
            *freq.entry(&t.lower).or_insert(0) += 1;
            *row.entry(&t.lower).or_insert(0) += 1;
        }
    }
    let mut words: Vec<(&str, usize)> = freq.into_iter().collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    words.truncate(max_words);
    words.sort();
    let providers: Vec<&Provider> = per.keys().copied().collect();
    let m = DMatrix::from_fn(providers.len(), words.len(), |i, j| {
        per[providers[i]].get(words[j].0).copied().unwrap_or(0) as f64
    });
    ArrayText::from_matrix(
        &m,
        [
            providers.iter().map(|p| p.id()).collect(),
            words.iter().map(|w| w.0.to_string()).collect(),
        ],
    )
}

/// Newsmaker × POS tag × provider counts over sentences mentioning the
/// `top` most mentioned entities.
pub fn newsmaker_tensor(input: &AnalysisInput, top: usize) -> ArrayText {
    let mut mentions: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &input.sentences {
        for m in &s.annotated.mentions {
            *mentions.entry(&m.entity).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = mentions.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(top);
    let people: Vec<&str> = ranked.iter().map(|r| r.0).collect();
    let tags: Vec<&str> = input
        .sentences
        .iter()
        .flat_map(|s| s.annotated.tokens.iter().map(|t| t.pos.as_str()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let providers: Vec<Provider> = input.providers().into_iter().collect();
    let mut t = Tensor3::zeros([people.len().max(1), tags.len().max(1), providers.len().max(1)]);
    for s in &input.sentences {
        let a = &s.annotated;
        let Ok(k) = providers.binary_search(&a.sentence.provider) else {
            continue;
        };
        let present: BTreeSet<&str> = a.mentions.iter().map(|m| m.entity.as_str()).collect();
        for e in present {
            let Some(i) = people.iter().position(|p| *p == e) else {
                continue;
            };
            for tok in &a.tokens {
                if let Ok(j) = tags.binary_search(&tok.pos.as_str()) {
                    t[(i, j, k)] += 1.0;
                }
            }
        }
    }
    ArrayText::from_tensor(
        &t,
        [
            people.iter().map(|s| s.to_string()).collect(),
            tags.iter().map(|s| s.to_string()).collect(),
            providers.iter().map(|p| p.id()).collect(),
        ],
    )
}

pub fn render_biclusters(result: &factor::BiclusterResult, rows: &[String], cols: &[String]) -> String {
    let mut s = String::from("factor\tcohesiveness\ttop_rows\ttop_cols\n");
    for (i, f) in result.factors.iter().enumerate() {
        let order = |idx: &[usize], load: &[f64], names: &[String]| {
            let mut v: Vec<usize> = idx.to_vec();
            v.sort_by(|&a, &b| load[b].abs().total_cmp(&load[a].abs()).then(a.cmp(&b)));
            v.iter().map(|&j| names[j].clone()).collect::<Vec<_>>().join(",")
        };
        s.push_str(&format!(
            "{}\t{:.6}\t{}\t{}\n",
            i + 1,
            f.cohesiveness,
            order(&f.top_rows, &f.row_loadings, rows),
            order(&f.top_cols, &f.col_loadings, cols)
        ));
    }
    s
}

pub fn render_tucker_fit(model: &TuckerModel, ranks: [usize; 3]) -> String {
    let mut s = format!(
        "ranks\t{},{},{}\nfit\t{:.9}\niterations\t{}\n",
        ranks[0],
        ranks[1],
        ranks[2],
        model.fit,
        model.fit_history.len() - 1
    );
    for (i, f) in model.fit_history.iter().enumerate() {
        s.push_str(&format!("fit_{i}\t{f:.9}\n"));
    }
    s
}

pub fn render_projection(model: &TuckerModel, labels: &[Vec<String>]) -> Result<String, PipelineError> {
    let mut s = String::from("mode\tlabel\tx\ty\n");
    for mode in [Mode::Newsmakers, Mode::Providers] {
        if model.factors[mode.index()].ncols() < 2 {
            continue;
        }
        let name = match mode {
            Mode::Newsmakers => "newsmakers",
            Mode::Tags => "tags",
            Mode::Providers => "providers",
        };
        for p in project(model, mode, (0, 1), &labels[mode.index()])? {
            s.push_str(&format!("{name}\t{}\t{:.6}\t{:.6}\n", p.label, p.x, p.y));
        }
    }
    Ok(s)
}

/// Runs all reports plus the clustering and decomposition outputs.
pub fn run_analyze(
    input: &AnalysisInput,
    factor_params: &FactorParams,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = run_reports(input, None, out_dir)?;

    let (labels, categories, rows) = provider_style_matrix(input)?;
    if rows.len() >= 2 {
        let m = DMatrix::from_fn(rows.len(), categories.len(), |i, j| rows[i][j]);
        let path = out_dir.join("provider_style.txt");
        write_text(&path, &factor::write_array(&ArrayText::from_matrix(&m, [labels.clone(), categories])))?;
        written.push(path);
        let link = linkage(&factor_params.linkage).expect("validated linkage");
        let d = hac(&labels, &rows, link)?;
        let path = out_dir.join("dendrogram.json");
        write_text(&path, &(serde_json::to_string_pretty(&d)? + "\n"))?;
        written.push(path);
    } else {
        tracing::warn!("fewer than two providers; skipping clustering");
    }

    let words = provider_word_counts(input, factor_params.max_words);
    let path = out_dir.join("provider_words.txt");
    write_text(&path, &factor::write_array(&words))?;
    written.push(path);
    let counts = words.to_matrix()?;
    let k = factor_params.bicluster_k.min(counts.nrows().min(counts.ncols()));
    if k >= 1 {
        if k < factor_params.bicluster_k {
            tracing::warn!(k, "bicluster rank reduced to the matrix size");
        }
        let result = bicluster(
            &tfidf_row_normalize(&counts),
            &BiclusterConfig {
                k,
                sparsity: factor_params.sparsity,
                seed,
                ..Default::default()
            },
        )?;
        let path = out_dir.join("biclusters.tsv");
        write_text(&path, &render_biclusters(&result, &words.labels[0], &words.labels[1]))?;
        written.push(path);
    }

    let tensor = newsmaker_tensor(input, factor_params.top_newsmakers);
    let path = out_dir.join("newsmaker_tensor.txt");
    write_text(&path, &factor::write_array(&tensor))?;
    written.push(path);
    let mut x = tensor.to_tensor()?;
    if factor_params.log_counts {
        x = x.map(f64::ln_1p);
    }
    let dims = x.dims();
    let ranks = [0, 1, 2].map(|i| factor_params.ranks[i].min(dims[i]));
    if ranks != factor_params.ranks {
        tracing::warn!(?ranks, "Tucker ranks reduced to the tensor dimensions");
    }
    let model = tucker3(&x, &TuckerConfig { ranks, ..Default::default() })?;
    let path = out_dir.join("tucker_fit.txt");
    write_text(&path, &render_tucker_fit(&model, ranks))?;
    written.push(path);
    let path = out_dir.join("projection.tsv");
    write_text(&path, &render_projection(&model, &tensor.labels)?)?;
    written.push(path);
    Ok(written)
}

/// Checks that `stages` is a contiguous run of the stage order.
pub fn check_stages(stages: &[Stage]) -> Result<Vec<Stage>, PipelineError> {
    let mut s: Vec<Stage> = stages.to_vec();
    s.sort();
    s.dedup();
    for w in s.windows(2) {
        if w[1] as usize != w[0] as usize + 1 {
            let missing = Stage::ALL[w[0] as usize + 1];
            return Err(PipelineError::StageOrder {
                stage: w[1],
                missing: format!("the `{missing}` stage in the selection"),
                run_first: missing,
            });
        }
    }
    Ok(s)
}

/// Runs the selected stages against the configured inputs and work directory,
/// then refreshes the manifest. Returns the manifest text.
pub fn run_pipeline(config: &PipelineConfig, stages: &[Stage]) -> Result<String, PipelineError> {
    let stages = check_stages(stages)?;
    let work = &config.paths.work;
    let p = &config.paths;
    let art = |name: &str| work.join(name);
    for stage in stages {
        tracing::info!(%stage, "running");
        match stage {
            Stage::Ingest => {
                let s = run_ingest(
                    required(stage, "captions", &p.captions)?,
                    required(stage, "guide", &p.guide)?,
                    required(stage, "channels", &p.channels)?,
                    &art(CORPUS),
                )?;
                tracing::info!(lines = s.lines, rejects = s.rejects, off_guide = s.off_guide, "ingested");
            }
            Stage::Segment => {
                require(stage, &art(CORPUS), Stage::Ingest)?;
                run_segment(&art(CORPUS), &config.segmentation, &art(SENTENCES))?;
            }
            Stage::Annotate => {
                require(stage, &art(SENTENCES), Stage::Segment)?;
                let with = AnnotateInputs {
                    gazetteer: required(stage, "gazetteer", &p.gazetteer)?,
                    tag_lexicon: p.tag_lexicon.as_deref(),
                    suffix_rules: p.suffix_rules.as_deref(),
                    annotations: p.annotations.as_deref(),
                    min_salience: config.min_salience,
                };
                run_annotate(&art(SENTENCES), &with, &art(ANNOTATED))?;
            }
            Stage::Score => {
                require(stage, &art(ANNOTATED), Stage::Annotate)?;
                run_score(&art(ANNOTATED), required(stage, "lexicon", &p.lexicon)?, &art(SCORED))?;
            }
            Stage::Match => {
                require(stage, &art(SCORED), Stage::Score)?;
                let stories = required(stage, "stories", &p.stories)?;
                let gazetteer = required(stage, "gazetteer", &p.gazetteer)?;
                run_train(
                    &art(SCORED),
                    stories,
                    required(stage, "labels", &p.labels)?,
                    gazetteer,
                    &config.train,
                    &art(MODELS),
                )?;
                run_match(&art(SCORED), stories, gazetteer, &art(MODELS), &art(MATCHES))?;
                run_qualify(&art(MATCHES), &config.qualify, &art(QUALIFIED))?;
            }
            Stage::Analyze => {
                let with = AnalyzeInputs {
                    scored: &art(SCORED),
                    matches: &art(MATCHES),
                    qualified: &art(QUALIFIED),
                    stories: p.stories.as_deref(),
                    professions: p.professions.as_deref(),
                    stopwords: p.stopwords.as_deref(),
                };
                let input = load_analysis(&with, &config.analytics)?;
                run_analyze(&input, &config.factor, config.seed, &art(REPORTS))?;
            }
        }
    }
    Ok(write_manifest(work)?)
}
