//! Provider and newsmaker measurements over scored sentences and qualified
//! matchings.

mod coverage;
mod newsmakers;
mod report;
mod style;
mod timeline;
mod vocabulary;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Millis, Provider};
use crate::scoring::ScoredSentence;

pub use coverage::{
    coverage_curve, prominence, prominence_histogram, prominence_records, CoveragePoint,
    ProminenceRecord,
};
pub use newsmakers::{
    person_provider_sentiment, profession_rollup, ProfessionRollup, ProfessionSummary,
    OTHER_PROFESSION,
};
pub use report::{report, report_names, reports, AnalysisInput, AnalyticsParams, Report};
pub use style::{style_vector, StyleVector};
pub use timeline::{
    breaking, breaking_by_story, breaking_scatter, duration, BreakingPoint, BREAKING_WINDOW_MS,
    MAX_DURATION_HOURS,
};
pub use vocabulary::{
    jensen_shannon, vocabulary_outliers, Outlier, OutlierConfig, DEFAULT_STOPWORDS,
};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("genre has no providers")]
    NoGenreProviders,
    #[error("unmatched story `{0}`")]
    UnmatchedStory(String),
    #[error("{provider} has no qualified matching for story `{story_id}`")]
    NotCovered { provider: String, story_id: String },
    #[error("`{0}` has no tokens")]
    EmptyOwner(String),
    #[error("bin count must be positive")]
    NoBins,
}

/// One newsmaker mention, scored with its containing sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub entity: String,
    pub provider: Provider,
    pub ts: Millis,
    pub sentence: String,
    pub score: i32,
}

/// One record per entity mention, in sentence order.
pub fn mention_records(sentences: &[ScoredSentence]) -> Vec<MentionRecord> {
    sentences
        .iter()
        .flat_map(|s| {
            let sentence = &s.annotated.sentence;
            s.annotated.mentions.iter().map(move |m| MentionRecord {
                entity: m.entity.clone(),
                provider: sentence.provider.clone(),
                ts: sentence.start_ms,
                sentence: sentence.id.clone(),
                score: s.sentiment.score,
            })
        })
        .collect()
}
