use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::ingest::{Genre, Provider};
use crate::matching::QualifiedMatching;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProminenceRecord {
    pub story_id: String,
    pub genre: Genre,
    pub prominence: f64,
    /// Number of covering providers.
    pub covering: usize,
    /// Number of providers of the genre.
    pub total: usize,
}

/// Fraction of `genre_providers` with at least one qualified matching on the story.
pub fn prominence(
    story_id: &str,
    genre: Genre,
    qualified: &[QualifiedMatching],
    genre_providers: &BTreeSet<Provider>,
) -> Result<ProminenceRecord, AnalyticsError> {
    if genre_providers.is_empty() {
        return Err(AnalyticsError::NoGenreProviders);
    }
    let covering = qualified
        .iter()
        .filter(|q| q.story_id == story_id && genre_providers.contains(&q.provider))
        .map(|q| &q.provider)
        .collect::<BTreeSet<_>>()
        .len();
    Ok(ProminenceRecord {
        story_id: story_id.to_string(),
        genre,
        prominence: covering as f64 / genre_providers.len() as f64,
        covering,
        total: genre_providers.len(),
    })
}

/// Prominence of every listed story, sorted by genre then story id.
///
/// Providers are grouped by their genre; genres without providers yield no
/// records.
pub fn prominence_records<'a>(
    stories: impl IntoIterator<Item = (&'a str, Genre)>,
    qualified: &[QualifiedMatching],
    providers: &BTreeSet<Provider>,
) -> Vec<ProminenceRecord> {
    let mut by_genre: BTreeMap<Genre, BTreeSet<Provider>> = BTreeMap::new();
    for p in providers {
        by_genre.entry(p.genre).or_default().insert(p.clone());
    }
    let mut covering: BTreeMap<&str, BTreeSet<&Provider>> = BTreeMap::new();
    for q in qualified {
        covering.entry(q.story_id.as_str()).or_default().insert(&q.provider);
    }
    let mut out: Vec<ProminenceRecord> = stories
        .into_iter()
        .filter_map(|(story_id, genre)| {
            let pool = by_genre.get(&genre)?;
            let n = covering
                .get(story_id)
                .map_or(0, |set| set.iter().filter(|p| pool.contains(**p)).count());
            Some(ProminenceRecord {
                story_id: story_id.to_string(),
                genre,
                prominence: n as f64 / pool.len() as f64,
                covering: n,
                total: pool.len(),
            })
        })
        .collect();
    out.sort_by(|a, b| (a.genre, &a.story_id).cmp(&(b.genre, &b.story_id)));
    out.dedup_by(|a, b| a.genre == b.genre && a.story_id == b.story_id);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub bin_center: f64,
    pub stories: usize,
    pub covered: usize,
    pub probability: f64,
}

/// Probability that `provider` covers a story of its genre, per prominence bin.
///
/// `bins` equal-width bins partition (0, 1]; bin `k` holds prominence in
/// `(k/bins, (k+1)/bins]`. Uncovered stories (prominence 0) and empty bins are
/// omitted.
pub fn coverage_curve(
    provider: &Provider,
    records: &[ProminenceRecord],
    qualified: &[QualifiedMatching],
    bins: usize,
) -> Result<Vec<CoveragePoint>, AnalyticsError> {
    if bins == 0 {
        return Err(AnalyticsError::NoBins);
    }
    let covered_by_provider: BTreeSet<&str> = qualified
        .iter()
        .filter(|q| &q.provider == provider)
        .map(|q| q.story_id.as_str())
        .collect();
    let mut counts = vec![(0usize, 0usize); bins];
    for r in records {
        if r.genre != provider.genre || r.covering == 0 || r.total == 0 {
            continue;
        }
        // integer form of ceil(prominence * bins) - 1
        let k = (r.covering * bins).div_ceil(r.total) - 1;
        let k = k.min(bins - 1);
        counts[k].0 += 1;
        if covered_by_provider.contains(r.story_id.as_str()) {
            counts[k].1 += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|(_, (n, _))| *n > 0)
        .map(|(k, (n, c))| CoveragePoint {
            bin_center: (k as f64 + 0.5) / bins as f64,
            stories: n,
            covered: c,
            probability: c as f64 / n as f64,
        })
        .collect())
}

/// Story counts keyed by the number of covering providers, bucketed by
/// `bin_width` (key = lower edge of the bucket).
pub fn prominence_histogram(
    genre: Genre,
    records: &[ProminenceRecord],
    bin_width: usize,
) -> BTreeMap<usize, usize> {
    let width = bin_width.max(1);
    let mut hist = BTreeMap::new();
    for r in records.iter().filter(|r| r.genre == genre) {
        *hist.entry(r.covering / width * width).or_insert(0) += 1;
    }
    hist
}
