use serde::Serialize;

use crate::ingest::Provider;

/// Box-plot summary of per-sentence scores for one provider.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub provider: Provider,
    pub sentences: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub pos_words: usize,
    pub neg_words: usize,
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summarizes `(score, pos_words, neg_words)` triples; `None` when empty.
pub fn sentiment_distribution(
    provider: &Provider,
    scores: impl IntoIterator<Item = (i32, usize, usize)>,
) -> Option<DistributionSummary> {
    let mut values = Vec::new();
    let (mut pos_words, mut neg_words) = (0, 0);
    for (score, p, n) in scores {
        values.push(f64::from(score));
        pos_words += p;
        neg_words += n;
    }
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    // integer scores: the sum is exact regardless of order
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Some(DistributionSummary {
        provider: provider.clone(),
        sentences: values.len(),
        min: values[0],
        q1: quantile(&values, 0.25),
        median: quantile(&values, 0.5),
        q3: quantile(&values, 0.75),
        max: values[values.len() - 1],
        mean,
        pos_words,
        neg_words,
    })
}

/// Orders summaries from most negative to most positive mean score.
pub fn sort_by_mean(summaries: &mut [DistributionSummary]) {
    summaries.sort_by(|a, b| a.mean.total_cmp(&b.mean).then_with(|| a.provider.cmp(&b.provider)));
}
