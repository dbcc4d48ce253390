//! Sentence-to-story matching and aggregation into qualified matchings.
//!
//! A per-genre logistic model scores (sentence, story) pairs from entity
//! co-occurrence features. Sentence-level matches by one provider on one story
//! that bunch together in time are then grouped into qualified matchings.

mod features;
mod model;
mod qualify;
mod story;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Genre, Millis, Provider};

pub use features::{extract_features, Features, FEATURE_NAMES, N_FEATURES};
pub use model::{
    classify, logistic, precision_at, select_threshold, train_matcher, MatchModel, TrainConfig,
    TrainReport, FALLBACK_THRESHOLD,
};
pub use qualify::{qualify, QualifiedMatching, QualifyConfig};
pub use story::{parse_labels, Label, LabelRow, Story, StoryPool, StoryRecord};

/// Stories older than this, relative to the sentence, are never candidates.
pub const STORY_LIFETIME_MS: Millis = 3 * crate::ingest::MS_PER_DAY;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("training data for {genre} has a single class")]
    SingleClass { genre: Genre },
    #[error("training data for {genre} needs at least 2 examples per class (same: {same}, different: {different})")]
    TooFewExamples {
        genre: Genre,
        same: usize,
        different: usize,
    },
    #[error("non-finite feature in training example {0}")]
    NonFinite(usize),
    #[error("story `{0}` has a non-positive publication time")]
    BadStory(String),
    #[error("{file}:{line}: {reason}")]
    Table {
        file: String,
        line: usize,
        reason: String,
    },
}

/// One sentence-level match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceMatch {
    pub sentence: String,
    pub provider: Provider,
    pub story_id: String,
    pub ts: Millis,
    pub score: f64,
}
