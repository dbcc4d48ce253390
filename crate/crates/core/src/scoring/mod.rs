//! Sentence-level sentiment and readability statistics.

mod distribution;
mod readability;
mod sentiment;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::AnnotatedSentence;

pub use distribution::{quantile, sentiment_distribution, sort_by_mean, DistributionSummary};
pub use readability::{count_syllables, fog_index, readability, ReadabilityStats};
pub use sentiment::{score_sentiment, SentimentResult, ValenceLexicon};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("no sentences")]
    NoSentences,
    #[error(transparent)]
    Io(#[from] crate::ingest::IngestError),
    #[error("{file}:{line}: {reason}")]
    Table {
        file: String,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    #[serde(flatten)]
    pub annotated: AnnotatedSentence,
    pub sentiment: SentimentResult,
}

pub fn score(annotated: AnnotatedSentence, lexicon: &ValenceLexicon) -> ScoredSentence {
    let sentiment = score_sentiment(&annotated.tokens, lexicon);
    ScoredSentence {
        annotated,
        sentiment,
    }
}
