use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotate::AnnotatedSentence;
use crate::ingest::Provider;

pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "are", "as", "at", "be", "been", "but",
    "by", "can", "did", "do", "for", "from", "had", "has", "have", "he", "her", "his", "i", "if",
    "in", "is", "it", "its", "just", "me", "my", "no", "not", "now", "of", "on", "or", "our",
    "out", "she", "so", "that", "the", "their", "them", "there", "they", "this", "to", "up",
    "us", "was", "we", "were", "what", "when", "which", "who", "will", "with", "would", "you",
    "your",
];

/// Jensen–Shannon divergence in nats between two distributions on the same
/// support. Symmetric and bounded by ln 2.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        let ta = if a > 0.0 { a * (a / m).ln() } else { 0.0 };
        let tb = if b > 0.0 { b * (b / m).ln() } else { 0.0 };
        d += 0.5 * (ta + tb);
    }
    d.clamp(0.0, std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierConfig {
    pub min_mentions: usize,
    pub alpha: f64,
    pub top: usize,
    pub stopwords: BTreeSet<String>,
}

impl Default for OutlierConfig {
    fn default() -> Self {
        OutlierConfig {
            min_mentions: 20,
            alpha: 0.5,
            top: 5,
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub entity: String,
    pub mentions: usize,
    pub jsd: f64,
}

/// Entities whose mention vocabulary on `provider` departs most from the
/// provider's overall vocabulary.
///
/// Words are lowercased non-punctuation tokens outside stopwords and outside
/// entity-mention spans. Both distributions are add-alpha smoothed over the
/// provider vocabulary. Results are sorted by divergence, descending.
pub fn vocabulary_outliers(
    provider: &Provider,
    sentences: &[&AnnotatedSentence],
    config: &OutlierConfig,
) -> Vec<Outlier> {
    let mut background: BTreeMap<&str, usize> = BTreeMap::new();
    let mut per_entity: BTreeMap<&str, (usize, BTreeMap<&str, usize>)> = BTreeMap::new();
    for s in sentences.iter().filter(|s| &s.sentence.provider == provider) {
        let words: Vec<&str> = s
            .tokens
            .iter()
            .enumerate()
            .filter(|(i, t)| {
                !t.is_punctuation()
                    && !config.stopwords.contains(&t.lower)
                    && !s.mentions.iter().any(|m| (m.span.0..m.span.1).contains(i))
            })
            .map(|(_, t)| t.lower.as_str())
            .collect();
        for w in &words {
            *background.entry(w).or_insert(0) += 1;
        }
        let mut seen = BTreeSet::new();
        for m in &s.mentions {
            let e = per_entity.entry(m.entity.as_str()).or_default();
            e.0 += 1;
            if seen.insert(m.entity.as_str()) {
                for w in &words {
                    *e.1.entry(w).or_insert(0) += 1;
                }
            }
        }
    }
    if background.is_empty() {
        return Vec::new();
    }
    let smooth = |counts: &dyn Fn(&str) -> usize, total: usize| -> Vec<f64> {
        let denom = total as f64 + config.alpha * background.len() as f64;
        background
            .keys()
            .map(|w| (counts(w) as f64 + config.alpha) / denom)
            .collect()
    };
    let bg_total: usize = background.values().sum();
    let bg = smooth(&|w| background[w], bg_total);

    let mut out: Vec<Outlier> = per_entity
        .into_iter()
        .filter(|(_, (n, _))| *n >= config.min_mentions)
        .map(|(entity, (n, counts))| {
            let total: usize = counts.values().sum();
            let p = smooth(&|w| counts.get(w).copied().unwrap_or(0), total);
            Outlier {
                entity: entity.to_string(),
                mentions: n,
                jsd: jensen_shannon(&p, &bg),
            }
        })
        .collect();
    out.sort_by(|a, b| b.jsd.total_cmp(&a.jsd).then_with(|| a.entity.cmp(&b.entity)));
    out.truncate(config.top);
    out
}
