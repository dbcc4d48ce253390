use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::ingest::{Millis, Provider, MS_PER_HOUR};
use crate::matching::QualifiedMatching;

pub const BREAKING_WINDOW_MS: Millis = MS_PER_HOUR;

/// Story lifetime in hours; longer durations come from corrupted input.
pub const MAX_DURATION_HOURS: f64 = 72.0;

/// Providers whose first qualified matching on the story falls within
/// `window_ms` of the earliest one.
pub fn breaking(
    story_id: &str,
    qualified: &[QualifiedMatching],
    window_ms: Millis,
) -> Result<BTreeSet<Provider>, AnalyticsError> {
    let story: Vec<&QualifiedMatching> =
        qualified.iter().filter(|q| q.story_id == story_id).collect();
    let t0 = story
        .iter()
        .map(|q| q.first_ts)
        .min()
        .ok_or_else(|| AnalyticsError::UnmatchedStory(story_id.to_string()))?;
    Ok(story
        .into_iter()
        .filter(|q| q.first_ts <= t0 + window_ms)
        .map(|q| q.provider.clone())
        .collect())
}

/// `breaking` for every story with qualified matchings, in one pass.
pub fn breaking_by_story(
    qualified: &[QualifiedMatching],
    window_ms: Millis,
) -> BTreeMap<&str, BTreeSet<&Provider>> {
    let mut t0: BTreeMap<&str, Millis> = BTreeMap::new();
    for q in qualified {
        let t = t0.entry(q.story_id.as_str()).or_insert(q.first_ts);
        *t = (*t).min(q.first_ts);
    }
    let mut out: BTreeMap<&str, BTreeSet<&Provider>> = BTreeMap::new();
    for q in qualified {
        let start = t0[q.story_id.as_str()];
        let set = out.entry(q.story_id.as_str()).or_default();
        if q.first_ts <= start + window_ms {
            set.insert(&q.provider);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakingPoint {
    pub provider: Provider,
    pub qualified_matchings: usize,
    /// Distinct stories the provider covered.
    pub stories: usize,
    pub breaking: usize,
    /// `breaking / stories`.
    pub ratio: f64,
}

/// Qualified-matching and breaking counts per provider; providers without
/// qualified matchings are left out.
pub fn breaking_scatter(
    providers: &BTreeSet<Provider>,
    qualified: &[QualifiedMatching],
    window_ms: Millis,
) -> Vec<BreakingPoint> {
    let broken = breaking_by_story(qualified, window_ms);
    let mut per: BTreeMap<&Provider, (usize, BTreeSet<&str>)> = BTreeMap::new();
    for q in qualified.iter().filter(|q| providers.contains(&q.provider)) {
        let e = per.entry(&q.provider).or_default();
        e.0 += 1;
        e.1.insert(&q.story_id);
    }
    per.into_iter()
        .map(|(provider, (n, stories))| {
            let b = stories
                .iter()
                .filter(|s| broken.get(*s).is_some_and(|set| set.contains(provider)))
                .count();
            BreakingPoint {
                provider: provider.clone(),
                qualified_matchings: n,
                stories: stories.len(),
                breaking: b,
                ratio: b as f64 / stories.len() as f64,
            }
        })
        .collect()
}

/// Hours between the provider's first and last matching of the story,
/// capped at [`MAX_DURATION_HOURS`].
pub fn duration(
    provider: &Provider,
    story_id: &str,
    qualified: &[QualifiedMatching],
) -> Result<f64, AnalyticsError> {
    let mut span: Option<(Millis, Millis)> = None;
    for q in qualified
        .iter()
        .filter(|q| &q.provider == provider && q.story_id == story_id)
    {
        span = Some(match span {
            None => (q.first_ts, q.last_ts),
            Some((a, b)) => (a.min(q.first_ts), b.max(q.last_ts)),
        });
    }
    let (first, last) = span.ok_or_else(|| AnalyticsError::NotCovered {
        provider: provider.id(),
        story_id: story_id.to_string(),
    })?;
    let hours = (last - first).max(0) as f64 / MS_PER_HOUR as f64;
    Ok(hours.min(MAX_DURATION_HOURS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Genre;

    fn qm(network: &str, first: Millis, last: Millis) -> QualifiedMatching {
        QualifiedMatching {
            provider: Provider::new(network, Genre::General),
            story_id: "s".into(),
            first_ts: first,
            last_ts: last,
            evidence_count: 2,
        }
    }

    const MIN: Millis = 60_000;

    #[test]
    fn sixty_minute_boundary() {
        let q = [qm("A", 0, 0), qm("B", 59 * MIN, 59 * MIN), qm("C", 61 * MIN, 61 * MIN)];
        let b = breaking("s", &q, BREAKING_WINDOW_MS).unwrap();
        let names: Vec<_> = b.iter().map(|p| p.network.as_str()).collect();
        assert_eq!(names, ["A", "B"]);
        assert!(matches!(breaking("x", &q, BREAKING_WINDOW_MS), Err(AnalyticsError::UnmatchedStory(_))));
    }

    #[test]
    fn durations() {
        let a = Provider::new("A", Genre::General);
        assert_eq!(duration(&a, "s", &[qm("A", 5, 5)]).unwrap(), 0.0);
        let span = (26.6 * MS_PER_HOUR as f64) as Millis;
        let d = duration(&a, "s", &[qm("A", 0, 1000), qm("A", span - 1000, span)]).unwrap();
        assert!((d - 26.6).abs() < 1e-12);
        assert_eq!(duration(&a, "s", &[qm("A", 0, 100 * MS_PER_HOUR)]).unwrap(), 72.0);
        assert!(duration(&a, "t", &[qm("A", 0, 0)]).is_err());
    }

    #[test]
    fn scatter_ratio() {
        let mut q = Vec::new();
        for i in 0..10 {
            // A is late on every story except the first
            let late = if i == 0 { 0 } else { 2 * MS_PER_HOUR };
            let mut a = qm("A", late, late);
            a.story_id = format!("s{i}");
            let mut b = qm("B", MIN, MIN);
            b.story_id = format!("s{i}");
            q.push(a);
            q.push(b);
        }
        let providers: BTreeSet<_> = ["A", "B", "C"]
            .iter()
            .map(|n| Provider::new(*n, Genre::General))
            .collect();
        let s = breaking_scatter(&providers, &q, BREAKING_WINDOW_MS);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].breaking, s[0].stories), (1, 10));
        assert!((s[0].ratio - 0.1).abs() < 1e-15);
        assert_eq!(s[1].ratio, 1.0);
    }
}
