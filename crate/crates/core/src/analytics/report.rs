use std::collections::{BTreeMap, BTreeSet};

use super::*;
use crate::ingest::{Genre, Millis, Provider};
use crate::matching::{QualifiedMatching, SentenceMatch};
use crate::scoring::{readability, sentiment_distribution, sort_by_mean, ScoredSentence};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticsParams {
    /// Minimum mentions for a provider × person sentiment cell.
    pub min_support: usize,
    /// Number of most mentioned entities in the sentiment table.
    pub table_entities: usize,
    pub outliers: OutlierConfig,
    pub coverage_bins: usize,
    pub histogram_bin_width: usize,
    pub breaking_window_ms: Millis,
}

impl Default for AnalyticsParams {
    fn default() -> Self {
        AnalyticsParams {
            min_support: 5,
            table_entities: 4,
            outliers: OutlierConfig::default(),
            coverage_bins: 10,
            histogram_bin_width: 1,
            breaking_window_ms: BREAKING_WINDOW_MS,
        }
    }
}

/// Everything the reports read.
#[derive(Debug, Clone, Default)]
pub struct AnalysisInput {
    pub sentences: Vec<ScoredSentence>,
    pub matches: Vec<SentenceMatch>,
    pub qualified: Vec<QualifiedMatching>,
    /// Candidate stories as `(story_id, genre)`.
    pub stories: Vec<(String, Genre)>,
    pub professions: BTreeMap<String, String>,
    pub params: AnalyticsParams,
}

impl AnalysisInput {
    /// Providers seen in sentences or qualified matchings.
    pub fn providers(&self) -> BTreeSet<Provider> {
        self.sentences
            .iter()
            .map(|s| s.annotated.sentence.provider.clone())
            .chain(self.qualified.iter().map(|q| q.provider.clone()))
            .collect()
    }

    fn prominence(&self) -> Vec<ProminenceRecord> {
        prominence_records(
            self.stories.iter().map(|(id, g)| (id.as_str(), *g)),
            &self.qualified,
            &self.providers(),
        )
    }

    fn by_provider(&self) -> BTreeMap<&Provider, Vec<&ScoredSentence>> {
        let mut out: BTreeMap<&Provider, Vec<&ScoredSentence>> = BTreeMap::new();
        for s in &self.sentences {
            out.entry(&s.annotated.sentence.provider).or_default().push(s);
        }
        out
    }
}

/// A tabular report over the analysis input, written as `<name>.tsv`.
pub trait Report: Sync {
    fn name(&self) -> &'static str;
    fn header(&self) -> &'static [&'static str];
    /// Rows in emission order.
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError>;

    /// `#`-prefixed lines written before the header.
    fn notes(&self, _input: &AnalysisInput) -> Vec<String> {
        Vec::new()
    }

    fn render(&self, input: &AnalysisInput) -> Result<String, AnalyticsError> {
        let mut out = String::new();
        for note in self.notes(input) {
            out.push_str(&format!("# {note}\n"));
        }
        out.push_str(&self.header().join("\t"));
        out.push('\n');
        for row in self.rows(input)? {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        Ok(out)
    }
}

static REPORTS: &[&dyn Report] = &[
    &SentimentTable,
    &OutlierTable,
    &CoverageCurve,
    &Prominence,
    &ProminenceHistogram,
    &Duration,
    &Breaking,
    &GenreStyle,
    &ProviderStyle,
    &Professions,
    &SentimentDistribution,
    &Readability,
    &Timeline,
];

pub fn reports() -> &'static [&'static dyn Report] {
    REPORTS
}

pub fn report(name: &str) -> Option<&'static dyn Report> {
    REPORTS.iter().copied().find(|r| r.name() == name)
}

pub fn report_names() -> impl Iterator<Item = &'static str> {
    REPORTS.iter().map(|r| r.name())
}

fn num(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    format!("{:.6}", if r == 0.0 { 0.0 } else { r })
}

struct SentimentTable;

impl Report for SentimentTable {
    fn name(&self) -> &'static str {
        "table5_sentiment"
    }
    fn header(&self) -> &'static [&'static str] {
        &["provider", "entity", "mentions", "mean_score"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let mentions = mention_records(&input.sentences);
        let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
        for m in &mentions {
            *totals.entry(m.entity.as_str()).or_insert(0) += 1;
        }
        let mut ranked: Vec<(&str, usize)> = totals.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let top: Vec<&str> = ranked
            .into_iter()
            .take(input.params.table_entities)
            .map(|(e, _)| e)
            .collect();
        let mut rows = Vec::new();
        for provider in input.providers() {
            for entity in &top {
                let n = mentions
                    .iter()
                    .filter(|m| m.entity == *entity && m.provider == provider)
                    .count();
                let mean = person_provider_sentiment(entity, &provider, &mentions, input.params.min_support);
                rows.push(vec![
                    provider.id(),
                    entity.to_string(),
                    n.to_string(),
                    mean.map(num).unwrap_or_default(),
                ]);
            }
        }
        Ok(rows)
    }
}

struct OutlierTable;

impl Report for OutlierTable {
    fn name(&self) -> &'static str {
        "table6_outliers"
    }
    fn header(&self) -> &'static [&'static str] {
        &["provider", "rank", "entity", "mentions", "jsd"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let mut rows = Vec::new();
        for (provider, sentences) in input.by_provider() {
            let annotated: Vec<_> = sentences.iter().map(|s| &s.annotated).collect();
            for (rank, o) in vocabulary_outliers(provider, &annotated, &input.params.outliers)
                .into_iter()
                .enumerate()
            {
                rows.push(vec![
                    provider.id(),
                    (rank + 1).to_string(),
                    o.entity,
                    o.mentions.to_string(),
                    num(o.jsd),
                ]);
            }
        }
        Ok(rows)
    }
}

struct CoverageCurve;

impl Report for CoverageCurve {
    fn name(&self) -> &'static str {
        "coverage_curve"
    }
    fn header(&self) -> &'static [&'static str] {
        &["provider", "bin_center", "stories", "covered", "p_cover"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let records = input.prominence();
        let mut rows = Vec::new();
        for provider in input.providers() {
            for c in coverage_curve(&provider, &records, &input.qualified, input.params.coverage_bins)? {
                rows.push(vec![
                    provider.id(),
                    num(c.bin_center),
                    c.stories.to_string(),
                    c.covered.to_string(),
                    num(c.probability),
                ]);
            }
        }
        Ok(rows)
    }
}

struct Prominence;

impl Report for Prominence {
    fn name(&self) -> &'static str {
        "prominence"
    }
    fn header(&self) -> &'static [&'static str] {
        &["genre", "story_id", "covering", "total", "prominence"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        Ok(input
            .prominence()
            .into_iter()
            .map(|r| {
                vec![
                    r.genre.to_string(),
                    r.story_id,
                    r.covering.to_string(),
                    r.total.to_string(),
                    num(r.prominence),
                ]
            })
            .collect())
    }
}

struct ProminenceHistogram;

impl Report for ProminenceHistogram {
    fn name(&self) -> &'static str {
        "prominence_histogram"
    }
    fn header(&self) -> &'static [&'static str] {
        &["genre", "covering_providers", "stories"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let records = input.prominence();
        let mut rows = Vec::new();
        for genre in Genre::ALL {
            for (k, n) in prominence_histogram(genre, &records, input.params.histogram_bin_width) {
                rows.push(vec![genre.to_string(), k.to_string(), n.to_string()]);
            }
        }
        Ok(rows)
    }
}

struct Duration;

impl Report for Duration {
    fn name(&self) -> &'static str {
        "duration"
    }
    fn header(&self) -> &'static [&'static str] {
        &["provider", "story_id", "hours"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let pairs: BTreeSet<(&Provider, &str)> = input
            .qualified
            .iter()
            .map(|q| (&q.provider, q.story_id.as_str()))
            .collect();
        pairs
            .into_iter()
            .map(|(p, s)| {
                let h = duration(p, s, &input.qualified)?;
                Ok(vec![p.id(), s.to_string(), num(h)])
            })
            .collect()
    }
}

struct Breaking;

impl Report for Breaking {
    fn name(&self) -> &'static str {
        "breaking"
    }
    fn header(&self) -> &'static [&'static str] {
        &["provider", "qualified_matchings", "stories", "breaking", "ratio"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        Ok(breaking_scatter(&input.providers(), &input.qualified, input.params.breaking_window_ms)
            .into_iter()
            .map(|b| {
                vec![
                    b.provider.id(),
                    b.qualified_matchings.to_string(),
                    b.stories.to_string(),
                    b.breaking.to_string(),
                    num(b.ratio),
                ]
            })
            .collect())
    }
}

fn style_rows(vectors: Vec<StyleVector>) -> Vec<Vec<String>> {
    vectors
        .into_iter()
        .flat_map(|v| {
            let owner = v.owner;
            v.category_freqs
                .into_iter()
                .map(move |(c, f)| vec![owner.clone(), c, num(f)])
        })
        .collect()
}

struct GenreStyle;

impl Report for GenreStyle {
    fn name(&self) -> &'static str {
        "fig2_style"
    }
    fn header(&self) -> &'static [&'static str] {
        &["genre", "category", "frequency"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let mut vectors = Vec::new();
        for genre in Genre::ALL {
            let tokens = input
                .sentences
                .iter()
                .filter(|s| s.annotated.sentence.provider.genre == genre)
                .flat_map(|s| &s.annotated.tokens);
            match style_vector(genre.as_str(), tokens) {
                Ok(v) => vectors.push(v),
                Err(AnalyticsError::EmptyOwner(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(style_rows(vectors))
    }
}

struct ProviderStyle;

impl Report for ProviderStyle {
    fn name(&self) -> &'static str {
        "provider_style"
    }
    fn header(&self) -> &'static [&'static str] {
        &["provider", "category", "frequency"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let vectors = input
            .by_provider()
            .into_iter()
            .map(|(p, s)| style_vector(&p.id(), s.iter().flat_map(|s| &s.annotated.tokens)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(style_rows(vectors))
    }
}

struct Professions;

impl Report for Professions {
    fn name(&self) -> &'static str {
        "professions"
    }
    fn header(&self) -> &'static [&'static str] {
        &["profession", "mentions", "mean_sentiment", "top_entities"]
    }
    fn notes(&self, input: &AnalysisInput) -> Vec<String> {
        let r = profession_rollup(&mention_records(&input.sentences), &input.professions);
        vec![format!("mapped_fraction\t{}", num(r.mapped_fraction))]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let r = profession_rollup(&mention_records(&input.sentences), &input.professions);
        Ok(r.professions
            .into_iter()
            .map(|p| {
                let top: Vec<String> = p
                    .top
                    .iter()
                    .map(|(e, share)| format!("{e}:{:.1}%", share * 100.0))
                    .collect();
                vec![p.profession, p.mentions.to_string(), num(p.mean_sentiment), top.join(",")]
            })
            .collect())
    }
}

struct SentimentDistribution;

impl Report for SentimentDistribution {
    fn name(&self) -> &'static str {
        "sentiment_distribution"
    }
    fn header(&self) -> &'static [&'static str] {
        &["provider", "sentences", "min", "q1", "median", "q3", "max", "mean", "pos_words", "neg_words"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let mut summaries: Vec<_> = input
            .by_provider()
            .into_iter()
            .filter_map(|(p, s)| {
                sentiment_distribution(
                    p,
                    s.iter().map(|s| {
                        (s.sentiment.score, s.sentiment.pos_word_count, s.sentiment.neg_word_count)
                    }),
                )
            })
            .collect();
        sort_by_mean(&mut summaries);
        Ok(summaries
            .into_iter()
            .map(|d| {
                vec![
                    d.provider.id(),
                    d.sentences.to_string(),
                    num(d.min),
                    num(d.q1),
                    num(d.median),
                    num(d.q3),
                    num(d.max),
                    num(d.mean),
                    d.pos_words.to_string(),
                    d.neg_words.to_string(),
                ]
            })
            .collect())
    }
}

struct Readability;

impl Report for Readability {
    fn name(&self) -> &'static str {
        "readability"
    }
    fn header(&self) -> &'static [&'static str] {
        &["provider", "sentences", "words_per_sentence", "complex_ratio", "fog"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        Ok(input
            .by_provider()
            .into_iter()
            .filter_map(|(p, s)| {
                let stats = readability(s.iter().map(|s| s.annotated.tokens.as_slice())).ok()?;
                Some(vec![
                    p.id(),
                    s.len().to_string(),
                    num(stats.words_per_sentence),
                    num(stats.complex_word_ratio),
                    num(stats.fog_index),
                ])
            })
            .collect())
    }
}

struct Timeline;

impl Report for Timeline {
    fn name(&self) -> &'static str {
        "timeline"
    }
    fn header(&self) -> &'static [&'static str] {
        &["story_id", "provider", "kind", "start_ms", "end_ms", "evidence"]
    }
    fn rows(&self, input: &AnalysisInput) -> Result<Vec<Vec<String>>, AnalyticsError> {
        let mut rows: Vec<(String, String, &str, Millis, Millis, usize)> = input
            .matches
            .iter()
            .map(|m| (m.story_id.clone(), m.provider.id(), "match", m.ts, m.ts, 1))
            .chain(input.qualified.iter().map(|q| {
                (
                    q.story_id.clone(),
                    q.provider.id(),
                    "qualified",
                    q.first_ts,
                    q.last_ts,
                    q.evidence_count,
                )
            }))
            .collect();
        rows.sort();
        rows.dedup();
        Ok(rows
            .into_iter()
            .map(|(s, p, k, a, b, n)| {
                vec![s, p, k.to_string(), a.to_string(), b.to_string(), n.to_string()]
            })
            .collect())
    }
}
